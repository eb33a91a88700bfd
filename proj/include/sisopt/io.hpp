#pragma once

// Serialization: JSON documents for kernels, signals, fields, models, and
// tiles; CSV for measurement sequences; atomic file writes; a stable config
// hash for run manifests.
//
// Conventions. Complex numbers serialize as [re, im] pairs. Every JSON
// document carries format_version and a kind tag, and loaders check both.
// Model documents store one entry per nonempty grid point; loading pushes
// the stored vectors back through the orthonormalizing ingest path and then
// re-validates, so a tampered file cannot produce an invalid model. CSV
// numbers use 17 significant digits; JSON numbers use the library's
// shortest-round-trip formatting. Both reproduce doubles exactly, which
// keeps repeated runs byte-identical.

#include <array>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sisopt/bands.hpp"
#include "sisopt/paley_wiener.hpp"
#include "sisopt/sampling.hpp"

namespace sisopt {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

inline json to_json(const cx& z) { return json::array({z.real(), z.imag()}); }

inline cx cx_from_json(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw InputError(std::string(where) +
                     ": complex values must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json config_to_json(const GridConfig& cfg) {
  return json{{"n0", cfg.n0},
              {"G", cfg.G},
              {"L", cfg.L},
              {"K", cfg.K},
              {"lambda", cfg.lambda}};
}

inline GridConfig config_from_json(const json& j, const char* where) {
  if (!j.is_object()) throw InputError(std::string(where) + ": not an object");
  GridConfig cfg;
  try {
    cfg.n0 = j.at("n0").get<int>();
    cfg.G = j.at("G").get<int>();
    cfg.L = j.at("L").get<int>();
    cfg.K = j.at("K").get<int>();
    cfg.lambda = j.at("lambda").get<double>();
  } catch (const json::exception& e) {
    throw InputError(std::string(where) + ": bad grid config: " + e.what());
  }
  cfg.validate();
  return cfg;
}

namespace detail {

inline void check_header(const json& j, const char* kind, const char* where) {
  if (!j.is_object())
    throw InputError(std::string(where) + ": not a JSON object");
  if (!j.contains("format_version") ||
      j["format_version"].get<int>() != kFormatVersion)
    throw InputError(std::string(where) + ": unsupported format_version");
  if (!j.contains("kind") || j["kind"] != kind)
    throw InputError(std::string(where) + ": expected a '" +
                     std::string(kind) + "' document");
}

inline json rows_to_json(const std::vector<std::vector<cx>>& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json r = json::array();
    for (const cx& z : row) r.push_back(to_json(z));
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<std::vector<cx>> rows_from_json(const json& j, int n,
                                                   int width,
                                                   const char* where) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw InputError(std::string(where) + ": expected " + std::to_string(n) +
                     " rows");
  std::vector<std::vector<cx>> rows(n, std::vector<cx>(width));
  for (int t = 0; t < n; ++t) {
    if (!j[t].is_array() || static_cast<int>(j[t].size()) != width)
      throw InputError(std::string(where) + ": row " + std::to_string(t) +
                       " must hold " + std::to_string(width) + " entries");
    for (int i = 0; i < width; ++i) rows[t][i] = cx_from_json(j[t][i], where);
  }
  return rows;
}

}  // namespace detail

inline json signal_to_json(const FiberizedSignal& f) {
  return json{{"format_version", kFormatVersion},
              {"kind", "signal"},
              {"config", config_to_json(f.config)},
              {"rows", detail::rows_to_json(f.fibers)}};
}

inline FiberizedSignal signal_from_json(const json& j,
                                        const char* where = "signal") {
  detail::check_header(j, "signal", where);
  FiberizedSignal f;
  f.config = config_from_json(j.at("config"), where);
  f.fibers = detail::rows_from_json(j.at("rows"), f.config.points(),
                                    f.config.fiber_len(), where);
  return f;
}

inline json kernel_to_json(const SamplingKernel& g) {
  json j = signal_to_json(g.fibers);
  j["kind"] = "kernel";
  j["bound_M"] = g.bound_M;  // informational; recomputed on load
  return j;
}

inline SamplingKernel kernel_from_json(const json& j,
                                       const char* where = "kernel") {
  detail::check_header(j, "kernel", where);
  FiberizedSignal f;
  f.config = config_from_json(j.at("config"), where);
  f.fibers = detail::rows_from_json(j.at("rows"), f.config.points(),
                                    f.config.fiber_len(), where);
  return make_kernel(std::move(f));
}

inline json field_to_json(const FiberField& x) {
  json rows = json::array();
  for (const FiberVector& v : x.values) {
    json fib = json::array();
    for (const cx& z : v.fiber) fib.push_back(to_json(z));
    rows.push_back(json{{"scalar", to_json(v.scalar)}, {"fiber", fib}});
  }
  return json{{"format_version", kFormatVersion},
              {"kind", "field"},
              {"config", config_to_json(x.config)},
              {"rows", std::move(rows)}};
}

inline FiberField field_from_json(const json& j, const char* where = "field") {
  detail::check_header(j, "field", where);
  FiberField x;
  x.config = config_from_json(j.at("config"), where);
  const json& rows = j.at("rows");
  if (!rows.is_array() || static_cast<int>(rows.size()) != x.config.points())
    throw InputError(std::string(where) + ": wrong number of grid rows");
  for (const json& r : rows) {
    FiberVector v(x.config.fiber_len());
    v.scalar = cx_from_json(r.at("scalar"), where);
    const json& fib = r.at("fiber");
    if (!fib.is_array() ||
        static_cast<int>(fib.size()) != x.config.fiber_len())
      throw InputError(std::string(where) + ": wrong fiber length");
    for (int i = 0; i < x.config.fiber_len(); ++i)
      v.fiber[i] = cx_from_json(fib[i], where);
    x.values.push_back(std::move(v));
  }
  return x;
}

// Basis vectors serialize scalar-first: [scalar, fiber_0, ..., fiber_{2L}].
inline json model_to_json(const SisModel& model) {
  json per_point = json::array();
  for (int t = 0; t < model.config.points(); ++t) {
    if (model.dim(t) == 0) continue;
    json basis = json::array();
    for (const FiberVector& u : model.basis[t]) {
      json vec = json::array();
      vec.push_back(to_json(u.scalar));
      for (const cx& z : u.fiber) vec.push_back(to_json(z));
      basis.push_back(std::move(vec));
    }
    per_point.push_back(json{{"t", t},
                             {"band", model.config.band_of(t)},
                             {"basis", std::move(basis)}});
  }
  return json{{"format_version", kFormatVersion},
              {"kind", "model"},
              {"config", config_to_json(model.config)},
              {"class_tag", to_string(model.tag)},
              {"per_point", std::move(per_point)}};
}

inline SisModel model_from_json(const json& j, const char* where = "model") {
  detail::check_header(j, "model", where);
  const GridConfig cfg = config_from_json(j.at("config"), where);
  SisModel model = SisModel::empty(
      cfg, parse_model_class(j.at("class_tag").get<std::string>()));
  for (const json& p : j.at("per_point")) {
    const int t = p.at("t").get<int>();
    if (t < 0 || t >= cfg.points())
      throw InputError(std::string(where) + ": grid point " +
                       std::to_string(t) + " out of range");
    if (p.at("band").get<int>() != cfg.band_of(t))
      throw InputError(std::string(where) + ": band tag mismatch at point " +
                       std::to_string(t));
    for (const json& vec : p.at("basis")) {
      if (!vec.is_array() ||
          static_cast<int>(vec.size()) != cfg.fiber_len() + 1)
        throw InputError(std::string(where) +
                         ": basis vectors must hold scalar plus 2L+1 entries");
      FiberVector u(cfg.fiber_len());
      u.scalar = cx_from_json(vec[0], where);
      for (int i = 0; i < cfg.fiber_len(); ++i)
        u.fiber[i] = cx_from_json(vec[i + 1], where);
      if (!model.add_generator(t, u))  // re-orthonormalizes on ingest
        throw InputError(std::string(where) +
                         ": dependent basis vector at point " +
                         std::to_string(t));
    }
  }
  model.validate(where);
  return model;
}

inline json tile_to_json(const MultiTile& tile) {
  json per_point = json::array();
  for (int tb = 0; tb < tile.config.base_points(); ++tb)
    per_point.push_back(
        json{{"t", tb}, {"cells", tile.choice[tb].cells()}});
  return json{{"format_version", kFormatVersion},
              {"kind", "tile"},
              {"config", config_to_json(tile.config)},
              {"N", tile.N},
              {"per_point", std::move(per_point)}};
}

inline MultiTile tile_from_json(const json& j, const char* where = "tile") {
  detail::check_header(j, "tile", where);
  MultiTile tile;
  tile.config = config_from_json(j.at("config"), where);
  tile.N = j.at("N").get<int>();
  if (tile.N < 0) throw InputError(std::string(where) + ": negative N");
  const json& per_point = j.at("per_point");
  if (!per_point.is_array() ||
      static_cast<int>(per_point.size()) != tile.config.base_points())
    throw InputError(std::string(where) +
                     ": one cell list per base point required");
  tile.choice.assign(tile.config.base_points(), {});
  for (const json& p : per_point) {
    const int tb = p.at("t").get<int>();
    if (tb < 0 || tb >= tile.config.base_points())
      throw InputError(std::string(where) + ": base point " +
                       std::to_string(tb) + " out of range");
    TranslationAssignment a;
    a.n0 = tile.config.n0;
    a.N = tile.N;
    a.s.assign(tile.config.n0, {});
    int prev = 0;
    bool first = true;
    for (const json& cj : p.at("cells")) {
      const int cell = cj.get<int>();
      if (!first && cell <= prev)
        throw InputError(std::string(where) +
                         ": cells must be strictly increasing at base point " +
                         std::to_string(tb));
      first = false;
      prev = cell;
      const int k = ((cell % a.n0) + a.n0) % a.n0;
      a.s[k].push_back((cell - k) / a.n0);
    }
    tile.choice[tb] = std::move(a);
  }
  return tile;
}

// 17 significant digits: enough to reproduce any double exactly.
inline std::string format_double(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_measurements_csv(std::ostream& os,
                                   const MeasurementSet& Y) {
  os << "j,k,re,im\n";
  for (int j = 0; j < Y.count(); ++j) {
    bool wrote = false;
    for (int k = -Y.config.K; k <= Y.config.K; ++k) {
      const cx z = Y.sequences[j][k + Y.config.K];
      if (z == cx{0.0, 0.0}) continue;
      os << j << ',' << k << ',' << format_double(z.real()) << ','
         << format_double(z.imag()) << '\n';
      wrote = true;
    }
    // an explicit zero row keeps all-zero sequences in the round trip
    if (!wrote) os << j << ",0,0,0\n";
  }
}

// Sparse j,k,re,im rows; indices j start at 0, k must fit in [-K, K].
// Unlisted entries are zero. Errors carry 1-based line numbers.
inline MeasurementSet read_measurements_csv(std::istream& is,
                                            const GridConfig& cfg,
                                            const std::string& name) {
  MeasurementSet Y;
  Y.config = cfg;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw InputError(name + ":" + std::to_string(lineno) + ": " + msg);
  };
  if (!std::getline(is, line)) {
    lineno = 1;
    fail("empty file, expected a j,k,re,im header");
  }
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "j,k,re,im") fail("expected header 'j,k,re,im'");
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string, 4> col;
    std::size_t start = 0;
    for (int c = 0; c < 4; ++c) {
      const std::size_t comma = line.find(',', start);
      if (c < 3 && comma == std::string::npos) fail("expected 4 columns");
      if (c == 3 && comma != std::string::npos) fail("expected 4 columns");
      col[c] = line.substr(start, comma - start);
      start = comma + 1;
    }
    std::size_t used = 0;
    int j = 0, k = 0;
    double re = 0.0, im = 0.0;
    try {
      j = std::stoi(col[0], &used);
      if (used != col[0].size()) fail("bad sequence index '" + col[0] + "'");
      k = std::stoi(col[1], &used);
      if (used != col[1].size()) fail("bad sample index '" + col[1] + "'");
      re = std::stod(col[2], &used);
      if (used != col[2].size()) fail("bad real part '" + col[2] + "'");
      im = std::stod(col[3], &used);
      if (used != col[3].size()) fail("bad imaginary part '" + col[3] + "'");
    } catch (const InputError&) {
      throw;
    } catch (const std::exception&) {
      fail("unparseable row '" + line + "'");
    }
    if (j < 0 || j > 4096) fail("sequence index out of range");
    if (k < -cfg.K || k > cfg.K)
      fail("sample index " + std::to_string(k) +
           " outside the measurement support [-K, K], K = " +
           std::to_string(cfg.K));
    if (j >= Y.count())
      Y.sequences.resize(j + 1, std::vector<cx>(cfg.seq_len()));
    Y.sequences[j][k + cfg.K] += cx{re, im};
  }
  if (Y.count() == 0) fail("no measurement rows");
  return Y;
}

// Write-to-temp then rename, so readers never observe partial files.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw InputError("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw InputError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw InputError("cannot move " + tmp.string() + " into place: " +
                     ec.message());
}

inline void write_json_file(const std::filesystem::path& path,
                            const json& j) {
  atomic_write(path, j.dump(2) + "\n");
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return j;
}

// FNV-1a over the canonical config string; stable across platforms.
inline std::uint64_t config_hash(const GridConfig& cfg) {
  std::ostringstream os;
  os << "n0=" << cfg.n0 << ";G=" << cfg.G << ";L=" << cfg.L << ";K=" << cfg.K
     << ";lambda=" << format_double(cfg.lambda);
  const std::string s = os.str();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash_hex(const GridConfig& cfg) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, config_hash(cfg));
  return buf;
}

}  // namespace sisopt
