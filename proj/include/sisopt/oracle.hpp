#pragma once

// Independent verification paths. Everything here recomputes quantities the
// production modules obtain from closed forms, using dense linear algebra or
// plain enumeration instead, so agreement between the two routes is evidence
// rather than tautology. These functions are first-class citizens: the
// command line exposes them through oracle-verify.

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "sisopt/extra_invariant.hpp"
#include "sisopt/paley_wiener.hpp"
#include "sisopt/projection.hpp"

namespace sisopt {

struct OracleProjection {
  FiberVector value;
  bool pseudo_inverse = false;  // set when the Gram matrix was rank-deficient
};

// Least squares min ||target - sum_j c_j basis_j|| in the lambda-weighted
// metric, solved through the dense normal equations. The basis need not be
// orthogonal; a Gram matrix that is singular beyond 1e-12 relative falls
// back to the pseudo-inverse and is flagged.
inline OracleProjection oracle_project(const std::vector<FiberVector>& basis,
                                       const FiberVector& target,
                                       double lambda) {
  OracleProjection out;
  out.value = FiberVector(static_cast<int>(target.fiber.size()));
  const int n = static_cast<int>(basis.size());
  if (n == 0) return out;
  Eigen::MatrixXcd G(n, n);
  Eigen::VectorXcd rhs(n);
  for (int i = 0; i < n; ++i) {
    rhs(i) = weighted_inner_product(target, basis[i], lambda);
    for (int j = 0; j < n; ++j)
      G(i, j) = weighted_inner_product(basis[j], basis[i], lambda);
  }
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(G);
  Eigen::VectorXcd c;
  const Eigen::VectorXd d = ldlt.vectorD().real();
  const double dmax = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
  const double dmin = d.size() ? d.cwiseAbs().minCoeff() : 0.0;
  if (ldlt.info() == Eigen::Success && dmax > 0.0 && dmin > 1e-12 * dmax) {
    c = ldlt.solve(rhs);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(G);
    cod.setThreshold(1e-12);
    c = cod.solve(rhs);
    out.pseudo_inverse = true;
  }
  for (int j = 0; j < n; ++j) out.value = out.value + c(j) * basis[j];
  return out;
}

struct OracleSpectrum {
  std::vector<double> eigenvalues;  // descending
  std::vector<cx> top;              // eigenvector of the largest eigenvalue
};

// Dense Hermitian eigensolve of a small Gram matrix.
inline OracleSpectrum oracle_eigensolver(
    const std::vector<std::vector<cx>>& gram) {
  const int n = static_cast<int>(gram.size());
  Eigen::MatrixXcd G(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(gram[i].size()) != n)
      throw InputError("oracle_eigensolver: matrix is not square");
    for (int j = 0; j < n; ++j) G(i, j) = gram[i][j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
  if (es.info() != Eigen::Success)
    throw NumericalError("oracle_eigensolver: eigensolve did not converge");
  OracleSpectrum out;
  out.eigenvalues.resize(n);
  out.top.resize(n);
  for (int i = 0; i < n; ++i)
    out.eigenvalues[i] = es.eigenvalues()(n - 1 - i);
  for (int i = 0; i < n; ++i) out.top[i] = es.eigenvectors()(i, n - 1);
  return out;
}

// Reproducible sampler over the feasible competitor classes.
struct CandidateSpec {
  std::uint64_t seed = 0;
  ModelClass klass = ModelClass::extra_invariant;
  int l = 1;  // length bound / cell count
  int N = 1;  // cell cutoff, paley-wiener only
};

// A random multi-tile: l distinct cells in [-N, N] per base point.
inline MultiTile random_tile(std::uint64_t seed, const GridConfig& cfg, int N,
                             int l) {
  if (l < 1 || l > 2 * N + 1)
    throw InputError("random_tile: need 1 <= l <= 2N+1");
  std::mt19937_64 rng(seed);
  MultiTile tile;
  tile.config = cfg;
  tile.N = N;
  std::vector<int> cells(2 * N + 1);
  std::iota(cells.begin(), cells.end(), -N);
  for (int tb = 0; tb < cfg.base_points(); ++tb) {
    for (int i = 0; i < l; ++i) {
      std::uniform_int_distribution<int> pick(i, 2 * N);
      std::swap(cells[i], cells[pick(rng)]);
    }
    TranslationAssignment a;
    a.n0 = cfg.n0;
    a.N = N;
    a.s.assign(cfg.n0, {});
    for (int i = 0; i < l; ++i) {
      const int j = cells[i];
      const int k = ((j % cfg.n0) + cfg.n0) % cfg.n0;
      a.s[k].push_back((j - k) / cfg.n0);
    }
    for (auto& sk : a.s) std::sort(sk.begin(), sk.end());
    tile.choice.push_back(std::move(a));
  }
  return tile;
}

// A feasible competitor model. Extra-invariant: per base point, a random
// band subset of size <= l carrying random unit fibers drawn inside A_xi
// (coefficient vectors pushed through the kernel functional, so the
// candidate is measurement consistent). Paley-wiener: a random multi-tile
// materialized through tile_to_model.
inline SisModel random_candidate(const CandidateSpec& spec,
                                 const DenoisingFilter& filter) {
  const GridConfig& cfg = filter.config;
  if (spec.l < 0) throw InputError("random_candidate: l must be >= 0");
  if (spec.klass == ModelClass::paley_wiener) {
    if (spec.l == 0)
      return SisModel::empty(cfg, ModelClass::paley_wiener);
    MultiTile tile = random_tile(spec.seed, cfg, spec.N, spec.l);
    return tile_to_model(tile, make_kernel(filter.kernel), cfg.lambda);
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SisModel model = SisModel::empty(cfg, ModelClass::extra_invariant);
  if (spec.l == 0) return model;
  std::vector<int> bands(cfg.n0);
  std::iota(bands.begin(), bands.end(), 0);
  const int cap = std::min(spec.l, cfg.n0);
  for (int tb = 0; tb < cfg.base_points(); ++tb) {
    std::uniform_int_distribution<int> howmany(0, cap);
    const int active = howmany(rng);
    for (int i = 0; i < active; ++i) {
      std::uniform_int_distribution<int> pick(i, cfg.n0 - 1);
      std::swap(bands[i], bands[pick(rng)]);
    }
    for (int i = 0; i < active; ++i) {
      const int t = cfg.point(bands[i], tb);
      FiberVector v(cfg.fiber_len());
      for (int n = -cfg.L; n <= cfg.L; ++n) {
        const cx coef{gauss(rng), gauss(rng)};
        v.fiber[n + cfg.L] = coef;
        v.scalar += coef * kernel_coefficient(filter.kernel, t, n);
      }
      model.add_generator(t, v);
    }
  }
  return model;
}

// Ground-truth Form-2 optimum for the extra-invariant class: per base point,
// every band subset of size <= l is scored by dense per-measurement
// projections onto the filter direction, and the best captured energy is
// subtracted from the total reconstruction energy.
inline double oracle_extra_exhaustive(const MeasurementSet& Y,
                                      const DenoisingFilter& filter, int l) {
  Y.validate_shape("oracle_extra_exhaustive");
  require_same_config(Y.config, filter.config, "oracle_extra_exhaustive");
  const GridConfig& cfg = filter.config;
  if (l < 1) throw InputError("oracle_extra_exhaustive: l must be positive");
  if (cfg.n0 > 20)
    throw InputError("oracle_extra_exhaustive: too many bands to enumerate");

  std::vector<FiberField> recon;
  double total = 0.0;
  for (int j = 0; j < Y.count(); ++j) {
    recon.push_back(reconstruct(Y.sequences[j], filter));
    total += field_norm_sq(recon.back());
  }

  double captured = 0.0;
  for (int tb = 0; tb < cfg.base_points(); ++tb) {
    std::vector<double> band_energy(cfg.n0, 0.0);
    for (int k = 0; k < cfg.n0; ++k) {
      const int t = cfg.point(k, tb);
      const std::vector<FiberVector> basis{filter.lifted.values[t]};
      for (int j = 0; j < Y.count(); ++j)
        band_energy[k] +=
            oracle_project(basis, recon[j].values[t], cfg.lambda)
                .value.norm_sq(cfg.lambda);
    }
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << cfg.n0); ++mask) {
      if (std::popcount(mask) > l) continue;
      double score = 0.0;
      for (int k = 0; k < cfg.n0; ++k)
        if (mask & (1u << k)) score += band_energy[k];
      best = std::max(best, score);
    }
    captured += best;
  }
  return std::max(total - captured / cfg.G, 0.0);
}

struct OraclePwResult {
  MultiTile tile;
  double captured = 0.0;
};

// Ground truth for the multi-tile argmax: every assignment is scored at
// every base point by dense projections of each reconstruction onto the raw
// generating vectors, with no factorization of the objective.
inline OraclePwResult exhaustive_pw(const MeasurementSet& Y,
                                    const SamplingKernel& g, double lambda,
                                    int N, int l,
                                    std::uint64_t cap = kDefaultEnumCap) {
  Y.validate_shape("exhaustive_pw");
  require_same_config(Y.config, g.config(), "exhaustive_pw");
  const std::vector<TranslationAssignment> cand =
      enumerate_translations(N, l, g.config().n0, cap);
  const DenoisingFilter filter = build_filter(g, lambda);
  const GridConfig& cfg = filter.config;

  std::vector<FiberField> recon;
  for (int j = 0; j < Y.count(); ++j)
    recon.push_back(reconstruct(Y.sequences[j], filter));

  OraclePwResult out;
  out.tile.config = cfg;
  out.tile.N = N;
  for (int tb = 0; tb < cfg.base_points(); ++tb) {
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      double score = 0.0;
      for (int k = 0; k < cfg.n0; ++k) {
        if (cand[i].s[k].empty()) continue;
        const int t = cfg.point(k, tb);
        std::vector<FiberVector> basis;
        for (int off : cand[i].s[k]) {
          if (std::abs(off) > cfg.L)
            throw InputError("exhaustive_pw: cell outside the truncation");
          FiberVector e(cfg.fiber_len());
          e.fiber[off + cfg.L] = cx{1.0, 0.0};
          e.scalar = std::conj(g.fibers.fibers[t][off + cfg.L]) /
                     cfg.sqrt_n0();
          basis.push_back(std::move(e));
        }
        for (int j = 0; j < Y.count(); ++j)
          score += oracle_project(basis, recon[j].values[t], lambda)
                       .value.norm_sq(lambda);
      }
      if (score > best) {
        best = score;
        best_i = i;
      }
    }
    out.tile.choice.push_back(cand[best_i]);
    out.captured += best;
  }
  out.captured /= cfg.G;
  return out;
}

}  // namespace sisopt
