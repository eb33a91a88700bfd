#pragma once

// Command orchestration behind the sisopt binary. Each subcommand loads its
// inputs, runs the corresponding pipeline, and writes machine-readable
// artifacts (JSON + plot CSVs) plus a manifest into one output directory.
// All writes are atomic and contain no timestamps or absolute paths, so a
// fixed configuration reproduces byte-identical artifacts.
//
// Exit codes: 0 success, 2 input problems (files, formats, parameter
// ranges), 3 numerical-invariant failures (a violated property or a failed
// verification report).

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sisopt/extra_invariant.hpp"
#include "sisopt/io.hpp"
#include "sisopt/oracle.hpp"
#include "sisopt/paley_wiener.hpp"

namespace sisopt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

struct RunConfig {
  std::string command;
  std::filesystem::path kernel_path;
  std::filesystem::path measurements_path;
  std::filesystem::path model_path;
  std::filesystem::path coeffs_path;
  std::filesystem::path out_dir;
  std::optional<double> lambda;    // regularization override
  std::optional<int> grid;         // must equal the stored G
  std::optional<int> truncation;   // may shrink the stored L
  std::optional<std::uint64_t> enum_cap;
  int l = 1;
  int N = 1;
  std::uint64_t seed = 0;
  double noise_scale = 0.0;
  int candidates = 200;  // oracle-verify population size
};

namespace cli_detail {

// Drop fiber offsets beyond a smaller truncation.
inline FiberizedSignal truncate_fibers(const FiberizedSignal& f, int newL) {
  if (newL == f.config.L) return f;
  if (newL < 0 || newL > f.config.L)
    throw InputError("truncation must lie in [0, stored L]");
  FiberizedSignal out;
  out.config = f.config;
  out.config.L = newL;
  out.fibers.assign(out.config.points(),
                    std::vector<cx>(out.config.fiber_len()));
  for (int t = 0; t < out.config.points(); ++t)
    for (int i = -newL; i <= newL; ++i)
      out.fibers[t][i + newL] = f.fibers[t][i + f.config.L];
  return out;
}

inline SamplingKernel load_kernel(const RunConfig& rc) {
  if (rc.kernel_path.empty()) throw InputError("a --kernel file is required");
  SamplingKernel g =
      kernel_from_json(read_json_file(rc.kernel_path), "kernel");
  if (rc.grid && *rc.grid != g.config().G)
    throw InputError("--grid " + std::to_string(*rc.grid) +
                     " does not match the kernel's stored grid G = " +
                     std::to_string(g.config().G) +
                     "; kernels are sampled on a fixed grid");
  FiberizedSignal fibers = g.fibers;
  if (rc.truncation) fibers = truncate_fibers(fibers, *rc.truncation);
  if (rc.lambda) {
    if (!(*rc.lambda > 0.0)) throw InputError("--lambda must be positive");
    fibers.config.lambda = *rc.lambda;
  }
  return make_kernel(std::move(fibers));
}

inline MeasurementSet load_measurements(const RunConfig& rc,
                                        const GridConfig& cfg) {
  if (rc.measurements_path.empty())
    throw InputError("a --measurements file is required");
  std::ifstream is(rc.measurements_path);
  if (!is)
    throw InputError("cannot open " + rc.measurements_path.string());
  MeasurementSet Y =
      read_measurements_csv(is, cfg, rc.measurements_path.filename().string());
  Y.validate_shape("measurements");
  return Y;
}

inline std::uint64_t effective_enum_cap(const RunConfig& rc) {
  if (rc.enum_cap) return *rc.enum_cap;
  if (const char* env = std::getenv("SISOPT_ENUM_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw InputError(std::string("SISOPT_ENUM_CAP is not a number: ") + env);
    return v;
  }
  return kDefaultEnumCap;
}

// One output directory per run: artifacts first, manifest last.
struct ArtifactSink {
  std::filesystem::path dir;
  std::vector<std::string> names;

  explicit ArtifactSink(const std::filesystem::path& out_dir) : dir(out_dir) {
    if (dir.empty()) throw InputError("an --out directory is required");
    std::filesystem::create_directories(dir);
  }

  void add_json(const std::string& name, const json& j) {
    write_json_file(dir / name, j);
    names.push_back(name);
  }

  void add_text(const std::string& name, const std::string& content) {
    atomic_write(dir / name, content);
    names.push_back(name);
  }

  void finish(const RunConfig& rc, const GridConfig& cfg, json parameters) {
    std::sort(names.begin(), names.end());
    json m{{"format_version", kFormatVersion},
           {"kind", "manifest"},
           {"command", rc.command},
           {"config", config_to_json(cfg)},
           {"config_hash", config_hash_hex(cfg)},
           {"parameters", std::move(parameters)},
           {"artifacts", names}};
    write_json_file(dir / "manifest.json", m);
  }
};

inline std::string artifact_index(int j) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", j);
  return buf;
}

inline int cmd_check_kernel(const RunConfig& rc, std::ostream& out) {
  const SamplingKernel g = load_kernel(rc);
  const GridConfig& cfg = g.config();
  out << "kernel " << rc.kernel_path.string() << "\n"
      << "grid: n0=" << cfg.n0 << " G=" << cfg.G << " L=" << cfg.L
      << " K=" << cfg.K << " lambda=" << format_double(cfg.lambda) << "\n"
      << "config hash " << config_hash_hex(cfg) << "\n"
      << "bound M = " << format_double(g.bound_M) << "\n";
  if (!(g.bound_M > 0.0))
    out << "warning: the kernel is identically zero, reconstructions will "
           "be degenerate\n";
  return kExitOk;
}

inline int cmd_denoise(const RunConfig& rc, std::ostream& out) {
  const SamplingKernel g = load_kernel(rc);
  const DenoisingFilter filter = build_filter(g);
  const MeasurementSet Y = load_measurements(rc, filter.config);
  ArtifactSink sink(rc.out_dir);
  json rows = json::array();
  double total_residual = 0.0, total_captured = 0.0;
  for (int j = 0; j < Y.count(); ++j) {
    const FiberField recon = reconstruct(Y.sequences[j], filter);
    const double captured = field_norm_sq(recon);
    const double residual = data_residual(Y.sequences[j], filter);
    total_residual += residual;
    total_captured += captured;
    const std::string name =
        "reconstruction_" + artifact_index(j) + ".json";
    sink.add_json(name, field_to_json(recon));
    rows.push_back(json{{"j", j},
                        {"artifact", name},
                        {"measurement_energy", seq_norm_sq(Y.sequences[j])},
                        {"captured_energy", captured},
                        {"data_residual", residual}});
  }
  sink.add_json("denoise.json",
                json{{"format_version", kFormatVersion},
                     {"kind", "denoise-report"},
                     {"config", config_to_json(filter.config)},
                     {"sequences", std::move(rows)},
                     {"total_captured", total_captured},
                     {"total_residual", total_residual}});
  sink.finish(rc, filter.config,
              json{{"lambda", filter.config.lambda}});
  out << "denoised " << Y.count() << " sequence(s); total data residual = "
      << format_double(total_residual) << "\n";
  return kExitOk;
}

inline int cmd_fit_extra(const RunConfig& rc, std::ostream& out) {
  if (rc.l < 1) throw InputError("--l must be a positive length bound");
  const SamplingKernel g = load_kernel(rc);
  const DenoisingFilter filter = build_filter(g);
  const MeasurementSet Y = load_measurements(rc, filter.config);
  const ExtraInvariantResult res = assemble_optimal(Y, filter, rc.l);
  const GridConfig& cfg = filter.config;

  ArtifactSink sink(rc.out_dir);
  sink.add_json("model_w.json", model_to_json(res.W));
  sink.add_json("model_u.json", model_to_json(res.U));
  json d_table = json::array();
  for (int tb = 0; tb < cfg.base_points(); ++tb)
    d_table.push_back(res.D[tb]);
  sink.add_json("fit_extra.json",
                json{{"format_version", kFormatVersion},
                     {"kind", "fit-extra-report"},
                     {"config", config_to_json(cfg)},
                     {"l", rc.l},
                     {"objective_W", res.objective_W},
                     {"objective_U", res.objective_U},
                     {"tau", res.tau},
                     {"degenerate", res.degenerate},
                     {"selected_bands", std::move(d_table)},
                     {"model_length", model_length(res.W)}});
  std::ostringstream csv;
  csv << "t,band,energy,selected\n";
  for (int tb = 0; tb < cfg.base_points(); ++tb)
    for (int k = 0; k < cfg.n0; ++k) {
      const bool sel = std::find(res.D[tb].begin(), res.D[tb].end(), k) !=
                       res.D[tb].end();
      csv << tb << ',' << k << ',' << format_double(res.energy[k][tb]) << ','
          << (sel ? 1 : 0) << '\n';
    }
  sink.add_text("band_energies.csv", csv.str());
  sink.finish(rc, cfg, json{{"l", rc.l}, {"lambda", cfg.lambda}});
  out << "fit-extra: objective_W = " << format_double(res.objective_W)
      << ", objective_U = " << format_double(res.objective_U)
      << ", model length " << model_length(res.W) << "\n";
  if (res.degenerate)
    out << "warning: degenerate filter, the optimal model is empty\n";
  return kExitOk;
}

inline int cmd_fit_pw(const RunConfig& rc, std::ostream& out) {
  if (rc.l < 1) throw InputError("--l must be a positive cell count");
  if (rc.N < 0) throw InputError("--N must be nonnegative");
  const SamplingKernel g = load_kernel(rc);
  const double lambda = g.config().lambda;
  const MeasurementSet Y = load_measurements(rc, g.config());
  const PwResult res =
      optimize_tile(Y, g, lambda, rc.N, rc.l, effective_enum_cap(rc));
  const SisModel model = tile_to_model(res.tile, g, lambda);
  const GridConfig& cfg = res.tile.config;

  ArtifactSink sink(rc.out_dir);
  sink.add_json("tile.json", tile_to_json(res.tile));
  sink.add_json("model_pw.json", model_to_json(model));
  sink.add_json("fit_pw.json",
                json{{"format_version", kFormatVersion},
                     {"kind", "fit-pw-report"},
                     {"config", config_to_json(cfg)},
                     {"N", rc.N},
                     {"l", rc.l},
                     {"captured", res.captured},
                     {"residual", res.residual},
                     {"model_length", model_length(model)}});
  // plot CSV: chosen cells and score per base point
  std::vector<double> power(cfg.points(), 0.0);
  for (int t = 0; t < cfg.points(); ++t)
    for (int j = 0; j < Y.count(); ++j)
      power[t] += std::norm(measurement_scalar(cfg, Y.sequences[j], t));
  std::ostringstream csv;
  csv << "t,cells,score\n";
  for (int tb = 0; tb < cfg.base_points(); ++tb) {
    const std::vector<double> F =
        tile_energy(res.tile.choice[tb], g, lambda, tb);
    double score = 0.0;
    for (int k = 0; k < cfg.n0; ++k) score += power[cfg.point(k, tb)] * F[k];
    csv << tb << ',';
    const std::vector<int> cells = res.tile.choice[tb].cells();
    for (std::size_t i = 0; i < cells.size(); ++i)
      csv << (i ? " " : "") << cells[i];
    csv << ',' << format_double(score) << '\n';
  }
  sink.add_text("tile_cells.csv", csv.str());
  sink.finish(rc, cfg,
              json{{"N", rc.N}, {"l", rc.l}, {"lambda", lambda}});
  out << "fit-pw: captured = " << format_double(res.captured)
      << ", residual = " << format_double(res.residual) << "\n";
  return kExitOk;
}

inline int cmd_evaluate(const RunConfig& rc, std::ostream& out) {
  if (rc.model_path.empty()) throw InputError("a --model file is required");
  const SisModel model =
      model_from_json(read_json_file(rc.model_path), "model");
  RunConfig kernel_rc = rc;
  kernel_rc.lambda = model.config.lambda;  // the model fixes the metric
  const SamplingKernel g = load_kernel(kernel_rc);
  require_same_config(model.config, g.config(), "evaluate");
  const DenoisingFilter filter = build_filter(g);
  const MeasurementSet Y = load_measurements(rc, filter.config);

  const double form2 = objective_extra(model, Y, filter);
  const double form1 = form1_objective(model, Y, filter);
  double dr = 0.0;
  for (const auto& y : Y.sequences) dr += data_residual(y, filter);
  const double gap = std::abs(form1 - (dr + form2));
  const bool pass = gap <= 1e-9 * std::max(std::abs(form1), 1.0);

  ArtifactSink sink(rc.out_dir);
  sink.add_json("evaluate.json",
                json{{"format_version", kFormatVersion},
                     {"kind", "evaluate-report"},
                     {"config", config_to_json(filter.config)},
                     {"class_tag", to_string(model.tag)},
                     {"model_length", model_length(model)},
                     {"form1", form1},
                     {"form2", form2},
                     {"data_residual", dr},
                     {"split_gap", gap},
                     {"split_check", pass ? "PASS" : "FAIL"}});
  sink.finish(rc, filter.config, json{{"lambda", filter.config.lambda}});
  out << "form1 = " << format_double(form1)
      << ", form2 = " << format_double(form2)
      << ", data residual = " << format_double(dr) << "\n"
      << "residual split check: " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitNumerical;
}

inline int cmd_synthesize(const RunConfig& rc, std::ostream& out) {
  if (rc.model_path.empty()) throw InputError("a --model file is required");
  if (rc.coeffs_path.empty()) throw InputError("a --coeffs file is required");
  const SisModel model =
      model_from_json(read_json_file(rc.model_path), "model");
  RunConfig kernel_rc = rc;
  kernel_rc.lambda = model.config.lambda;
  const SamplingKernel g = load_kernel(kernel_rc);
  require_same_config(model.config, g.config(), "synthesize");

  const json cj = read_json_file(rc.coeffs_path);
  detail::check_header(cj, "coefficients", "coefficients");
  std::vector<std::vector<cx>> coeffs;
  for (const json& seq : cj.at("sequences")) {
    std::vector<cx> c;
    for (const json& z : seq) c.push_back(cx_from_json(z, "coefficients"));
    coeffs.push_back(std::move(c));
  }

  const SynthesisResult res = synthesize(model, coeffs, g, std::nullopt,
                                         rc.noise_scale, rc.seed);
  ArtifactSink sink(rc.out_dir);
  sink.add_json("signal.json", signal_to_json(res.signal));
  std::ostringstream csv;
  write_measurements_csv(csv, res.measurements);
  sink.add_text("measurements.csv", csv.str());
  sink.add_json(
      "synthesize.json",
      json{{"format_version", kFormatVersion},
           {"kind", "synthesize-report"},
           {"config", config_to_json(model.config)},
           {"seed", rc.seed},
           {"noise_scale", rc.noise_scale},
           {"signal_energy", res.signal.norm_sq()},
           {"measurement_energy",
            seq_norm_sq(res.measurements.sequences[0])}});
  sink.finish(rc, model.config,
              json{{"seed", rc.seed}, {"noise_scale", rc.noise_scale}});
  out << "synthesized 1 signal and 1 measurement sequence\n";
  return kExitOk;
}

struct PropertyReport {
  std::string name;
  bool pass = true;
  std::string detail;
};

inline int cmd_oracle_verify(const RunConfig& rc, std::ostream& out) {
  const SamplingKernel g = load_kernel(rc);
  const DenoisingFilter filter = build_filter(g);
  const GridConfig& cfg = filter.config;
  const MeasurementSet Y = load_measurements(rc, cfg);
  const int l = std::max(rc.l, 1);
  std::mt19937_64 rng(rc.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<PropertyReport> reports;

  {  // closed-form projection vs dense normal equations
    PropertyReport rep{"projection_agreement", true, ""};
    double worst = 0.0;
    for (int rep_i = 0; rep_i < 100; ++rep_i) {
      const int t =
          std::uniform_int_distribution<int>(0, cfg.points() - 1)(rng);
      FiberVector target(cfg.fiber_len());
      target.scalar = cx{gauss(rng), gauss(rng)};
      for (cx& z : target.fiber) z = cx{gauss(rng), gauss(rng)};
      const FiberVector prod = project_A(g.fibers, t, target);
      GsRow row = gs_basis(g.fibers, t, cfg.fiber_len());
      std::vector<FiberVector> basis;
      for (int n = -cfg.L; n <= cfg.L; ++n) {
        FiberVector e(cfg.fiber_len());
        e.fiber[n + cfg.L] = cx{1.0, 0.0};
        e.scalar = kernel_coefficient(g.fibers, t, n);
        basis.push_back(std::move(e));
      }
      const FiberVector ora = oracle_project(basis, target, cfg.lambda).value;
      double diff = std::abs(prod.scalar - ora.scalar);
      for (int i = 0; i < cfg.fiber_len(); ++i)
        diff = std::max(diff, std::abs(prod.fiber[i] - ora.fiber[i]));
      worst = std::max(worst, diff);
    }
    rep.pass = worst <= 1e-8;
    rep.detail = "max deviation " + format_double(worst);
    reports.push_back(std::move(rep));
  }

  {  // rank-one band Gramians
    PropertyReport rep{"rank_one_gramians", true, ""};
    double worst = 0.0;
    for (int k = 0; k < cfg.n0; ++k)
      for (int tb = 0; tb < cfg.base_points(); ++tb) {
        const OracleSpectrum s =
            oracle_eigensolver(band_gramian(Y, filter, k, tb));
        if (s.eigenvalues.size() < 2) continue;
        const double bound = 1e-10 * std::max(s.eigenvalues[0], 1.0);
        worst = std::max(worst, std::abs(s.eigenvalues[1]) / bound);
      }
    rep.pass = worst <= 1.0;
    rep.detail = "worst lambda2 at " + format_double(worst) + " of the bound";
    reports.push_back(std::move(rep));
  }

  {  // extra-invariant optimality: exhaustive match + candidate dominance
    PropertyReport rep{"extra_optimality", true, ""};
    const ExtraInvariantResult res = assemble_optimal(Y, filter, l);
    const double oracle = oracle_extra_exhaustive(Y, filter, l);
    const double gap = std::abs(res.objective_W - oracle);
    bool pass = gap <= 1e-12 * std::max(oracle, 1.0);
    int beaten = 0;
    for (int i = 0; i < rc.candidates; ++i) {
      CandidateSpec spec;
      spec.seed = rc.seed * 1000003ull + i;
      spec.klass = ModelClass::extra_invariant;
      spec.l = l;
      const SisModel cand = random_candidate(spec, filter);
      if (res.objective_W > objective_extra(cand, Y, filter) + 1e-9) ++beaten;
    }
    pass = pass && beaten == 0;
    rep.pass = pass;
    rep.detail = "exhaustive gap " + format_double(gap) + ", " +
                 std::to_string(beaten) + " of " +
                 std::to_string(rc.candidates) + " candidates beat the fit";
    reports.push_back(std::move(rep));
  }

  if (2 * rc.N + 1 >= l) {  // multi-tile optimality, when feasible
    PropertyReport rep{"pw_optimality", true, ""};
    const PwResult prod =
        optimize_tile(Y, g, cfg.lambda, rc.N, l, effective_enum_cap(rc));
    const OraclePwResult ora =
        exhaustive_pw(Y, g, cfg.lambda, rc.N, l, effective_enum_cap(rc));
    const double gap = std::abs(prod.captured - ora.captured);
    bool pass = gap <= 1e-12 * std::max(ora.captured, 1.0);
    int beaten = 0;
    for (int i = 0; i < rc.candidates; ++i) {
      const MultiTile tile =
          random_tile(rc.seed * 2000003ull + i, cfg, rc.N, l);
      const SisModel cand = tile_to_model(tile, g, cfg.lambda);
      if (captured_energy(cand, Y, filter) > prod.captured + 1e-9) ++beaten;
    }
    pass = pass && beaten == 0;
    rep.pass = pass;
    rep.detail = "exhaustive gap " + format_double(gap) + ", " +
                 std::to_string(beaten) + " of " +
                 std::to_string(rc.candidates) + " tiles beat the fit";
    reports.push_back(std::move(rep));
  }

  {  // Form-1 = data residual + Form-2 on random candidates
    PropertyReport rep{"residual_split", true, ""};
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      CandidateSpec spec;
      spec.seed = rc.seed * 3000017ull + i;
      spec.klass = ModelClass::extra_invariant;
      spec.l = l;
      const SisModel cand = random_candidate(spec, filter);
      double split = objective_extra(cand, Y, filter);
      for (const auto& y : Y.sequences) split += data_residual(y, filter);
      const double direct = form1_objective(cand, Y, filter);
      worst = std::max(worst, std::abs(direct - split) /
                                  std::max(std::abs(direct), 1.0));
    }
    rep.pass = worst <= 1e-9;
    rep.detail = "worst relative gap " + format_double(worst);
    reports.push_back(std::move(rep));
  }

  bool all_pass = true;
  json props = json::array();
  for (const PropertyReport& r : reports) {
    all_pass = all_pass && r.pass;
    props.push_back(json{{"name", r.name},
                         {"pass", r.pass},
                         {"detail", r.detail}});
    out << (r.pass ? "PASS" : "FAIL") << "  " << r.name << ": " << r.detail
        << "\n";
  }
  ArtifactSink sink(rc.out_dir);
  sink.add_json("oracle_verify.json",
                json{{"format_version", kFormatVersion},
                     {"kind", "oracle-report"},
                     {"config", config_to_json(cfg)},
                     {"seed", rc.seed},
                     {"properties", std::move(props)},
                     {"all_pass", all_pass}});
  sink.finish(rc, cfg,
              json{{"l", l},
                   {"N", rc.N},
                   {"seed", rc.seed},
                   {"candidates", rc.candidates}});
  out << (all_pass ? "all properties hold\n" : "property violations found\n");
  return all_pass ? kExitOk : kExitNumerical;
}

}  // namespace cli_detail

// Dispatch a parsed run configuration. Never throws; failures map to the
// documented exit codes with a diagnostic on err.
inline int run(const RunConfig& rc, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  try {
    if (rc.command == "check-kernel") return cli_detail::cmd_check_kernel(rc, out);
    if (rc.command == "denoise") return cli_detail::cmd_denoise(rc, out);
    if (rc.command == "fit-extra") return cli_detail::cmd_fit_extra(rc, out);
    if (rc.command == "fit-pw") return cli_detail::cmd_fit_pw(rc, out);
    if (rc.command == "evaluate") return cli_detail::cmd_evaluate(rc, out);
    if (rc.command == "synthesize") return cli_detail::cmd_synthesize(rc, out);
    if (rc.command == "oracle-verify")
      return cli_detail::cmd_oracle_verify(rc, out);
    throw InputError("unknown command: " + rc.command);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace sisopt
