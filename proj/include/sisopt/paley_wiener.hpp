#pragma once

// Optimal translation-invariant models over multi-tiles.
//
// The competing spaces are Paley-Wiener spaces of frequency sets Omega that
// tile the line l times under integer translation, with Omega drawn from
// cells {j + [0,1) : |j| <= N}. Choosing l of the 2N+1 cells and splitting
// each chosen j by residue mod n0 into j = k + n0 s gives, per band k, a
// translation list s_k; the model fiber at a banded grid point is then the
// span of the kernel-coefficient vectors at the selected fiber offsets. The
// captured measurement energy factorizes per point into coefficient power
// times F_{s_k}, the squared norm of the projection of the unit measurement
// direction onto that span, so the optimal tile is a per-base-point argmax
// over the finite assignment set. Ties go to the first assignment in the
// lexicographic cell order, which keeps runs reproducible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "sisopt/bands.hpp"
#include "sisopt/projection.hpp"
#include "sisopt/sampling.hpp"

namespace sisopt {

// Refusal point for the C(2N+1, l) assignment enumeration.
inline constexpr std::uint64_t kDefaultEnumCap = 1000000;

// One admissible choice of translations, stored per band.
struct TranslationAssignment {
  int n0 = 1;
  int N = 0;
  std::vector<std::vector<int>> s;  // s[k] strictly increasing

  int total() const {
    int sum = 0;
    for (const auto& sk : s) sum += static_cast<int>(sk.size());
    return sum;
  }

  // The chosen frequency cells j = k + n0 s, in increasing order.
  std::vector<int> cells() const {
    std::vector<int> out;
    for (int k = 0; k < static_cast<int>(s.size()); ++k)
      for (int v : s[k]) out.push_back(k + n0 * v);
    std::sort(out.begin(), out.end());
    return out;
  }
};

namespace detail {

inline std::uint64_t choose_count(int n, int r) {
  if (r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  long double acc = 1.0L;
  for (int i = 1; i <= r; ++i) acc = acc * (n - r + i) / i;
  if (acc > 1.8e19L) return UINT64_MAX;
  return static_cast<std::uint64_t>(acc + 0.5L);
}

}  // namespace detail

// All ways to pick l distinct cells |j| <= N, re-indexed by residue mod n0.
// Lexicographic in the increasing cell lists. Refuses above the cap.
inline std::vector<TranslationAssignment> enumerate_translations(
    int N, int l, int n0, std::uint64_t cap = kDefaultEnumCap) {
  if (N < 0) throw InputError("enumerate_translations: N must be >= 0");
  if (l < 1) throw InputError("enumerate_translations: l must be positive");
  if (n0 < 1) throw InputError("enumerate_translations: n0 must be positive");
  const int cells = 2 * N + 1;
  if (cells < l)
    throw InputError(
        "enumerate_translations: not enough cells, need 2N+1 >= l");
  const std::uint64_t count = detail::choose_count(cells, l);
  if (count > cap)
    throw InputError("enumerate_translations: " + std::to_string(count) +
                     " assignments exceed the enumeration cap of " +
                     std::to_string(cap));
  std::vector<TranslationAssignment> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> pick(l);
  for (int i = 0; i < l; ++i) pick[i] = i;  // indices into -N..N
  while (true) {
    TranslationAssignment a;
    a.n0 = n0;
    a.N = N;
    a.s.assign(n0, {});
    for (int i = 0; i < l; ++i) {
      const int j = pick[i] - N;
      const int k = ((j % n0) + n0) % n0;
      a.s[k].push_back((j - k) / n0);  // increasing j gives increasing s
    }
    out.push_back(std::move(a));
    int i = l - 1;
    while (i >= 0 && pick[i] == cells - l + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < l; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

// Per-band captured fraction F_{s_k} at one base point: the squared weighted
// norm of the projection of the unit measurement direction onto the span of
// the kernel-coefficient vectors at the selected offsets.
inline std::vector<double> tile_energy(const TranslationAssignment& s,
                                       const SamplingKernel& g, double lambda,
                                       int tb) {
  const GridConfig cfg = g.config();
  if (s.n0 != cfg.n0)
    throw InputError("tile_energy: assignment and kernel band counts differ");
  if (tb < 0 || tb >= cfg.base_points())
    throw InputError("tile_energy: base point outside [0, G)");
  if (!(lambda > 0.0)) throw InputError("tile_energy: lambda must be positive");
  std::vector<double> out(cfg.n0, 0.0);
  FiberVector unit(cfg.fiber_len());
  unit.scalar = cx{1.0, 0.0};
  for (int k = 0; k < cfg.n0; ++k) {
    if (s.s[k].empty()) continue;
    const int t = cfg.point(k, tb);
    std::vector<cx> a;
    a.reserve(s.s[k].size());
    for (int off : s.s[k]) {
      if (std::abs(off) > cfg.L)
        throw InputError(
            "tile_energy: cell needs fiber offset " + std::to_string(off) +
            ", outside the truncation L = " + std::to_string(cfg.L));
      a.push_back(kernel_coefficient(g.fibers, t, off));
    }
    const GsRow row = gs_recursion(a, s.s[k], lambda, cfg.fiber_len(), cfg.L);
    out[k] = project_row(row, unit, lambda).norm_sq(lambda);
  }
  return out;
}

// A per-base-point choice of translation assignment.
struct MultiTile {
  GridConfig config;
  int N = 0;
  std::vector<TranslationAssignment> choice;  // one per base point
};

struct TileReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Exactly l distinct in-range cells at every base point.
inline TileReport validate_multitile(const MultiTile& tile, int l) {
  TileReport rep;
  auto fail = [&rep](std::string msg) {
    rep.ok = false;
    rep.violations.push_back(std::move(msg));
  };
  if (static_cast<int>(tile.choice.size()) != tile.config.base_points()) {
    fail("tile holds " + std::to_string(tile.choice.size()) +
         " assignments for " + std::to_string(tile.config.base_points()) +
         " base points");
    return rep;
  }
  for (int tb = 0; tb < tile.config.base_points(); ++tb) {
    const TranslationAssignment& a = tile.choice[tb];
    const std::string at = "base point " + std::to_string(tb) + ": ";
    if (a.n0 != tile.config.n0) fail(at + "wrong band count");
    if (a.N != tile.N) fail(at + "wrong cell cutoff");
    if (a.total() != l)
      fail(at + std::to_string(a.total()) + " cells chosen, want " +
           std::to_string(l));
    for (const auto& sk : a.s)
      for (std::size_t i = 1; i < sk.size(); ++i)
        if (sk[i - 1] >= sk[i]) fail(at + "translations not increasing");
    const std::vector<int> cells = a.cells();
    for (std::size_t i = 1; i < cells.size(); ++i)
      if (cells[i - 1] == cells[i])
        fail(at + "cell " + std::to_string(cells[i]) + " repeated");
    for (int j : cells)
      if (std::abs(j) > tile.N)
        fail(at + "cell " + std::to_string(j) + " outside [-N, N]");
  }
  return rep;
}

struct PwResult {
  MultiTile tile;
  double captured = 0.0;  // model energy captured from the reconstructions
  double residual = 0.0;  // Form-2 objective
};

// Per-base-point argmax of the factorized captured energy over the full
// assignment set. Ties keep the earlier assignment.
inline PwResult optimize_tile(const MeasurementSet& Y, const SamplingKernel& g,
                              double lambda, int N, int l,
                              std::uint64_t cap = kDefaultEnumCap) {
  Y.validate_shape("optimize_tile");
  require_same_config(Y.config, g.config(), "optimize_tile");
  const std::vector<TranslationAssignment> cand =
      enumerate_translations(N, l, g.config().n0, cap);

  const DenoisingFilter filter = build_filter(g, lambda);
  const GridConfig& cfg = filter.config;

  // Coefficient power per banded point, shared across assignments.
  std::vector<double> power(cfg.points(), 0.0);
  for (int t = 0; t < cfg.points(); ++t)
    for (int j = 0; j < Y.count(); ++j)
      power[t] += std::norm(measurement_scalar(cfg, Y.sequences[j], t));

  PwResult out;
  out.tile.config = cfg;
  out.tile.N = N;
  out.tile.choice.reserve(cfg.base_points());
  double captured = 0.0;
  for (int tb = 0; tb < cfg.base_points(); ++tb) {
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      const std::vector<double> F = tile_energy(cand[i], g, lambda, tb);
      double score = 0.0;
      for (int k = 0; k < cfg.n0; ++k) score += power[cfg.point(k, tb)] * F[k];
      if (score > best) {
        best = score;
        best_i = i;
      }
    }
    out.tile.choice.push_back(cand[best_i]);
    captured += best;
  }
  out.captured = captured / cfg.G;

  double total = 0.0;
  for (int j = 0; j < Y.count(); ++j)
    total += field_norm_sq(reconstruct(Y.sequences[j], filter));
  const double r = total - out.captured;
  if (r < -1e-9)
    throw NumericalError(
        "optimize_tile: captured energy exceeds the reconstruction energy");
  out.residual = std::max(r, 0.0);
  return out;
}

// Materialize the tile as a model: per banded point, the orthonormalized
// kernel-coefficient vectors at the selected offsets.
inline SisModel tile_to_model(const MultiTile& tile, const SamplingKernel& g,
                              double lambda) {
  // Only the grid geometry must match; the tile may carry an overridden
  // regularization weight from the fit that produced it.
  GridConfig want = g.config();
  want.lambda = tile.config.lambda;
  require_same_config(tile.config, want, "tile_to_model");
  if (!(lambda > 0.0))
    throw InputError("tile_to_model: lambda must be positive");
  GridConfig cfg = tile.config;
  cfg.lambda = lambda;
  if (static_cast<int>(tile.choice.size()) != cfg.base_points())
    throw InputError("tile_to_model: one assignment per base point required");
  SisModel model = SisModel::empty(cfg, ModelClass::paley_wiener);
  for (int tb = 0; tb < cfg.base_points(); ++tb) {
    const TranslationAssignment& a = tile.choice[tb];
    if (a.n0 != cfg.n0)
      throw InputError("tile_to_model: assignment band count mismatch");
    for (int k = 0; k < cfg.n0; ++k) {
      if (a.s[k].empty()) continue;
      const int t = cfg.point(k, tb);
      std::vector<cx> coef;
      coef.reserve(a.s[k].size());
      for (int off : a.s[k]) {
        if (std::abs(off) > cfg.L)
          throw InputError("tile_to_model: cell outside the fiber truncation");
        coef.push_back(kernel_coefficient(g.fibers, t, off));
      }
      const GsRow row = gs_recursion(coef, a.s[k], lambda, cfg.fiber_len(),
                                     cfg.L);
      for (std::size_t n = 0; n < row.v.size(); ++n)
        model.basis[t].push_back((cx{1.0 / std::sqrt(row.norm_sq[n]), 0.0}) *
                                 row.v[n]);
    }
  }
  model.validate("tile_to_model");
  return model;
}

}  // namespace sisopt
