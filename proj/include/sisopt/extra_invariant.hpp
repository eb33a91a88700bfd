#pragma once

// Optimal model construction in the extra-invariant class.
//
// The class being optimized over: finitely generated model spaces of length
// at most l whose fibers decompose along the n0 bands (one generator fiber
// per active band per base point suffices). For measurement sequences
// y^1..y^m the per-band data Gramian at a base point has entries
// c_i conj(c_j) w, where c_j is the measurement-track value of sequence j at
// the banded grid point and w the squared weighted norm of the denoising
// filter there. The Gramian is rank one by construction, so its top
// eigenpair is analytic: lambda_1 = w sum_j |c_j|^2, z_1 = c/|c|. The
// optimal per-band generator fiber is the filter's lifted vector wherever it
// and the coefficient power clear an activity threshold, and the captured
// band energy is eps_k = (sum_j |c_j|^2) w on that active set. When n0 > l,
// keeping the min(l, n0) most energetic bands per base point (ties to the
// smaller band index) yields the optimal length-l space; otherwise the full
// per-band sum U is already optimal.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "sisopt/bands.hpp"
#include "sisopt/projection.hpp"
#include "sisopt/sampling.hpp"

namespace sisopt {

// Activity threshold: 1e-12 times the filter's largest squared point norm.
// Grid-level stand-in for "alpha != 0 a.e."; anything below it is treated as
// an exact zero of the band spectrum.
inline double activity_threshold(const DenoisingFilter& filter) {
  return 1e-12 * filter.scale_sq;
}

// Eigenstructure of the m x m band Gramian at one (band, base point) pair.
struct BandSpectrum {
  std::vector<std::vector<cx>> gramian;  // row-major, m x m
  std::vector<double> eigenvalues;       // descending, rank <= 1
  std::vector<cx> z1;                    // unit top eigenvector
};

// Gramian entries c_i conj(c_j) w at band k, base point tb.
inline std::vector<std::vector<cx>> band_gramian(const MeasurementSet& Y,
                                                 const DenoisingFilter& filter,
                                                 int k, int tb) {
  Y.validate_shape("band_gramian");
  require_same_config(Y.config, filter.config, "band_gramian");
  const GridConfig& cfg = filter.config;
  if (k < 0 || k >= cfg.n0)
    throw InputError("band_gramian: band index outside [0, n0)");
  if (tb < 0 || tb >= cfg.base_points())
    throw InputError("band_gramian: base point outside [0, G)");
  const int t = cfg.point(k, tb);
  const double w = filter.lifted.values[t].norm_sq(cfg.lambda);
  const int m = Y.count();
  std::vector<cx> c(m);
  for (int j = 0; j < m; ++j)
    c[j] = measurement_scalar(cfg, Y.sequences[j], t);
  std::vector<std::vector<cx>> gram(m, std::vector<cx>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) gram[i][j] = c[i] * std::conj(c[j]) * w;
  return gram;
}

// Analytic eigendecomposition of the rank-one band Gramian. The dense
// eigensolver route exists only as a test oracle.
inline BandSpectrum band_spectrum(const MeasurementSet& Y,
                                  const DenoisingFilter& filter, int k,
                                  int tb) {
  BandSpectrum out;
  out.gramian = band_gramian(Y, filter, k, tb);
  const GridConfig& cfg = filter.config;
  const int t = cfg.point(k, tb);
  const double w = filter.lifted.values[t].norm_sq(cfg.lambda);
  const int m = Y.count();
  double power = 0.0;
  std::vector<cx> c(m);
  for (int j = 0; j < m; ++j) {
    c[j] = measurement_scalar(cfg, Y.sequences[j], t);
    power += std::norm(c[j]);
  }
  out.eigenvalues.assign(std::max(m, 1), 0.0);
  out.eigenvalues[0] = w * power;
  out.z1.assign(std::max(m, 1), cx{0.0, 0.0});
  if (power > 0.0) {
    const double inv = 1.0 / std::sqrt(power);
    for (int j = 0; j < m; ++j) out.z1[j] = c[j] * inv;
  } else {
    out.z1[0] = cx{1.0, 0.0};
  }
  return out;
}

// One band's optimal generator data across all base points.
struct PerBandGenerator {
  int band = 0;
  std::vector<bool> mask;          // base point active in C~_k
  std::vector<double> energy;      // eps_k per base point, 0 off the mask
  std::vector<FiberVector> fiber;  // unit generator fiber, zero off the mask
};

inline PerBandGenerator per_band_generator(const MeasurementSet& Y,
                                           const DenoisingFilter& filter,
                                           int k) {
  Y.validate_shape("per_band_generator");
  require_same_config(Y.config, filter.config, "per_band_generator");
  const GridConfig& cfg = filter.config;
  if (k < 0 || k >= cfg.n0)
    throw InputError("per_band_generator: band index outside [0, n0)");
  const double tau = activity_threshold(filter);
  PerBandGenerator out;
  out.band = k;
  out.mask.assign(cfg.base_points(), false);
  out.energy.assign(cfg.base_points(), 0.0);
  out.fiber.assign(cfg.base_points(), FiberVector(cfg.fiber_len()));
  for (int tb = 0; tb < cfg.base_points(); ++tb) {
    const int t = cfg.point(k, tb);
    const double w = filter.lifted.values[t].norm_sq(cfg.lambda);
    double power = 0.0;
    for (int j = 0; j < Y.count(); ++j)
      power += std::norm(measurement_scalar(cfg, Y.sequences[j], t));
    if (!(w > tau) || !(power > tau)) continue;
    out.mask[tb] = true;
    out.energy[tb] = power * w;
    out.fiber[tb] =
        (cx{1.0 / std::sqrt(w), 0.0}) * filter.lifted.values[t];
  }
  return out;
}

// Indices of the min(l, n) largest energies, ties to the smaller band index,
// returned in increasing band order.
inline std::vector<int> select_bands(const std::vector<double>& energies,
                                     int l) {
  if (l < 1) throw InputError("select_bands: l must be positive");
  const int n = static_cast<int>(energies.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (energies[a] != energies[b]) return energies[a] > energies[b];
    return a < b;
  });
  idx.resize(std::min(l, n));
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Form-2 objective: quadrature of the squared residuals of the per-point
// model projection applied to each regularized reconstruction.
inline double objective_extra(const SisModel& model, const MeasurementSet& Y,
                              const DenoisingFilter& filter) {
  Y.validate_shape("objective_extra");
  require_same_config(Y.config, filter.config, "objective_extra");
  require_same_config(model.config, filter.config, "objective_extra");
  double total = 0.0;
  for (int j = 0; j < Y.count(); ++j) {
    const FiberField recon = reconstruct(Y.sequences[j], filter);
    total += field_norm_sq(recon - range_project(model, recon));
  }
  return total;
}

// Model energy captured from the reconstructions; complement of Form 2.
inline double captured_energy(const SisModel& model, const MeasurementSet& Y,
                              const DenoisingFilter& filter) {
  Y.validate_shape("captured_energy");
  require_same_config(Y.config, filter.config, "captured_energy");
  require_same_config(model.config, filter.config, "captured_energy");
  double total = 0.0;
  for (int j = 0; j < Y.count(); ++j)
    total += field_norm_sq(
        range_project(model, reconstruct(Y.sequences[j], filter)));
  return total;
}

// Form-1 objective, evaluated directly as measurement energy minus captured
// model energy. Equals sum_j data_residual + Form 2 when the model fibers
// lie inside the admissible subspaces A_xi.
inline double form1_objective(const SisModel& model, const MeasurementSet& Y,
                              const DenoisingFilter& filter) {
  double total = 0.0;
  for (int j = 0; j < Y.count(); ++j) total += seq_norm_sq(Y.sequences[j]);
  return total - captured_energy(model, Y, filter);
}

struct ExtraInvariantResult {
  SisModel U;  // every active band kept
  SisModel W;  // band-selected, length <= l
  std::vector<std::vector<int>> D;        // per base point, increasing bands
  std::vector<std::vector<bool>> c_mask;  // [band][base point]
  std::vector<std::vector<double>> energy;  // [band][base point]
  double objective_U = 0.0;
  double objective_W = 0.0;
  double tau = 0.0;
  bool degenerate = false;
};

inline ExtraInvariantResult assemble_optimal(const MeasurementSet& Y,
                                             const DenoisingFilter& filter,
                                             int l) {
  if (l < 1) throw InputError("assemble_optimal: l must be positive");
  Y.validate_shape("assemble_optimal");
  require_same_config(Y.config, filter.config, "assemble_optimal");
  const GridConfig& cfg = filter.config;

  ExtraInvariantResult out;
  out.tau = activity_threshold(filter);
  out.degenerate = !(filter.scale_sq > out.tau);
  out.U = SisModel::empty(cfg, ModelClass::extra_invariant);
  out.W = SisModel::empty(cfg, ModelClass::extra_invariant);
  out.D.assign(cfg.base_points(), {});
  out.c_mask.assign(cfg.n0, {});
  out.energy.assign(cfg.n0, {});

  std::vector<PerBandGenerator> gens;
  gens.reserve(cfg.n0);
  for (int k = 0; k < cfg.n0; ++k) {
    gens.push_back(per_band_generator(Y, filter, k));
    out.c_mask[k] = gens[k].mask;
    out.energy[k] = gens[k].energy;
    for (int tb = 0; tb < cfg.base_points(); ++tb)
      if (gens[k].mask[tb])
        out.U.add_generator(cfg.point(k, tb), gens[k].fiber[tb]);
  }

  if (cfg.n0 <= l) {
    // Case split: no masking needed, the per-band sum is already feasible.
    out.W = out.U;
    std::vector<int> all(cfg.n0);
    std::iota(all.begin(), all.end(), 0);
    for (int tb = 0; tb < cfg.base_points(); ++tb) out.D[tb] = all;
  } else {
    std::vector<double> at_point(cfg.n0);
    for (int tb = 0; tb < cfg.base_points(); ++tb) {
      for (int k = 0; k < cfg.n0; ++k) at_point[k] = gens[k].energy[tb];
      out.D[tb] = select_bands(at_point, l);
      for (int k : out.D[tb])
        if (gens[k].mask[tb])
          out.W.add_generator(cfg.point(k, tb), gens[k].fiber[tb]);
    }
  }

  out.objective_U = objective_extra(out.U, Y, filter);
  out.objective_W = objective_extra(out.W, Y, filter);
  return out;
}

}  // namespace sisopt
