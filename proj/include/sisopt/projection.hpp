#pragma once

// Regularized projection onto the lifted measurement-consistency subspace.
//
// At a grid point xi the admissible field values form
//   A_xi = { (<a, g_xi>, a) : a in C^{2L+1} },
// where <a, g_xi> = n0^{-1/2} sum_l a_l conj(ghat(xi + l n0)) is the scaled
// kernel functional. Enumerating the fiber offsets as 0, 1, -1, 2, -2, ...
// with kernel coefficients a_n along that order, the Gram-Schmidt
// orthogonalization of the generating vectors (a_n, e_n) has the closed form
//
//   c_n   = lambda + |a_0|^2 + ... + |a_{n-1}|^2
//   v_n   = ( lambda a_n / c_n ,  e_n - (a_n / c_n) sum_{j<n} conj(a_j) e_j )
//   ||v_n||^2 = lambda c_{n+1} / c_n ,
//
// which this module uses as the production path. Projection coefficients use
// conj(a_n): for a target (beta, 0),  <(beta,0), v_n> = beta lambda
// conj(a_n) / c_n, and the conjugate is what the normal equations demand for
// complex kernels (for real kernels it is invisible). The projection of
// (1, 0) is the pointwise denoising filter; the regularized reconstruction
// from a measurement sequence is that filter scaled by the sequence's
// measurement polynomial, one rank-one multiple per grid point.

#include <optional>
#include <vector>

#include "sisopt/sampling.hpp"

namespace sisopt {

// Enumeration of fiber offsets as 0, 1, -1, 2, -2, ...
inline int interleave_offset(int n) {
  if (n == 0) return 0;
  return (n % 2 == 1) ? (n + 1) / 2 : -(n / 2);
}

// a = conj(ghat(xi_t + offset n0)) / sqrt(n0), the kernel coefficient of the
// scaled functional at one fiber offset.
inline cx kernel_coefficient(const FiberizedSignal& g, int t, int offset) {
  if (offset < -g.config.L || offset > g.config.L)
    throw InputError("kernel_coefficient: offset outside truncation");
  return std::conj(g.fibers[t][offset + g.config.L]) / g.config.sqrt_n0();
}

// One grid point's orthogonal basis of A_xi (or of a selected sub-span).
struct GsRow {
  std::vector<int> offsets;        // fiber offset of unit vector n
  std::vector<cx> a;               // kernel coefficients along offsets
  std::vector<FiberVector> v;      // orthogonal basis, closed form above
  std::vector<double> norm_sq;     // ||v_n||^2
  std::vector<double> cumulative;  // c_n, with c_0 = lambda; length order+1
};

// Closed-form recursion over an arbitrary list of distinct fiber offsets.
inline GsRow gs_recursion(const std::vector<cx>& a,
                          const std::vector<int>& offsets, double lambda,
                          int fiber_len, int L) {
  if (a.size() != offsets.size())
    throw InputError("gs_recursion: coefficient/offset length mismatch");
  if (!(lambda > 0.0)) throw InputError("gs_recursion: lambda must be positive");
  const int order = static_cast<int>(a.size());
  GsRow row;
  row.offsets = offsets;
  row.a = a;
  row.cumulative.assign(order + 1, 0.0);
  row.cumulative[0] = lambda;
  row.v.reserve(order);
  row.norm_sq.reserve(order);
  for (int n = 0; n < order; ++n) {
    const double cn = row.cumulative[n];
    FiberVector vn(fiber_len);
    vn.scalar = lambda * a[n] / cn;
    vn.fiber[offsets[n] + L] = cx{1.0, 0.0};
    for (int j = 0; j < n; ++j)
      vn.fiber[offsets[j] + L] = -a[n] * std::conj(a[j]) / cn;
    row.cumulative[n + 1] = cn + std::norm(a[n]);
    row.norm_sq.push_back(lambda * row.cumulative[n + 1] / cn);
    row.v.push_back(std::move(vn));
  }
  return row;
}

// Full A_xi basis at grid point t in the interleaved offset order. The order
// is capped by the fiber truncation, 2L+1 vectors at most.
inline GsRow gs_basis(const FiberizedSignal& g, int t, int order) {
  if (order < 0 || order > g.config.fiber_len())
    throw InputError("gs_basis: order must lie in [0, 2L+1]");
  std::vector<int> offsets(order);
  std::vector<cx> a(order);
  for (int n = 0; n < order; ++n) {
    offsets[n] = interleave_offset(n);
    a[n] = kernel_coefficient(g, t, offsets[n]);
  }
  return gs_recursion(a, offsets, g.config.lambda, g.config.fiber_len(),
                      g.config.L);
}

// Orthogonal projection onto the span of a precomputed row.
inline FiberVector project_row(const GsRow& row, const FiberVector& target,
                               double lambda) {
  FiberVector out(static_cast<int>(target.fiber.size()));
  for (std::size_t n = 0; n < row.v.size(); ++n) {
    const cx coeff =
        weighted_inner_product(target, row.v[n], lambda) / row.norm_sq[n];
    out = out + coeff * row.v[n];
  }
  return out;
}

// P_{A_xi} target at grid point t, through the full-order closed-form basis.
inline FiberVector project_A(const FiberizedSignal& g, int t,
                             const FiberVector& target) {
  if (static_cast<int>(target.fiber.size()) != g.config.fiber_len())
    throw InputError("project_A: target fiber length mismatch");
  const GsRow row = gs_basis(g, t, g.config.fiber_len());
  return project_row(row, target, g.config.lambda);
}

// Measurement-track value of a sequence at grid point t, isometry-scaled.
inline cx measurement_scalar(const GridConfig& cfg, const std::vector<cx>& y,
                             int t) {
  return measurement_poly(cfg, y, t) / cfg.sqrt_n0();
}

// Pointwise projection of the unit measurement onto A_xi. The fiber track d
// is the reconstruction prefilter; every regularized reconstruction is a
// scalar multiple of `lifted` per grid point.
struct DenoisingFilter {
  GridConfig config;
  FiberizedSignal kernel;
  std::vector<std::vector<cx>> d;  // d[t][l + L]
  FiberField lifted;
  double scale_sq = 0.0;  // max point norm^2; activity thresholds scale by it

  void validate(const char* where) const {
    kernel.validate_shape(where);
    lifted.validate_shape(where);
    require_same_config(config, kernel.config, where);
    require_same_config(config, lifted.config, where);
    for (int t = 0; t < config.points(); ++t) {
      cx ip{0.0, 0.0};
      for (int i = 0; i < config.fiber_len(); ++i)
        ip += d[t][i] * std::conj(kernel.fibers[t][i]);
      ip /= config.sqrt_n0();
      if (std::abs(lifted.values[t].scalar - ip) >
          1e-10 * std::max(1.0, std::abs(lifted.values[t].scalar)))
        throw NumericalError(
            std::string(where) +
            ": filter scalar track is inconsistent with its fiber track");
    }
  }
};

inline DenoisingFilter build_filter(const SamplingKernel& g) {
  g.fibers.validate_shape("build_filter");
  DenoisingFilter out;
  out.config = g.config();
  out.kernel = g.fibers;
  out.lifted = FiberField::zeros(out.config);
  out.d.assign(out.config.points(), std::vector<cx>(out.config.fiber_len()));
  for (int t = 0; t < out.config.points(); ++t) {
    FiberVector unit(out.config.fiber_len());
    unit.scalar = cx{1.0, 0.0};
    FiberVector p = project_A(g.fibers, t, unit);
    out.d[t] = p.fiber;
    out.lifted.values[t] = std::move(p);
    out.scale_sq = std::max(
        out.scale_sq, out.lifted.values[t].norm_sq(out.config.lambda));
  }
  out.validate("build_filter");
  return out;
}

// Same filter under a different regularization weight.
inline DenoisingFilter build_filter(const SamplingKernel& g, double lambda) {
  if (!(lambda > 0.0)) throw InputError("build_filter: lambda must be positive");
  if (lambda == g.config().lambda) return build_filter(g);
  FiberizedSignal fibers = g.fibers;
  fibers.config.lambda = lambda;
  return build_filter(make_kernel(std::move(fibers)));
}

// Regularized reconstruction of one measurement sequence: per grid point the
// filter scaled by the sequence's measurement-track value.
inline FiberField reconstruct(const std::vector<cx>& y,
                              const DenoisingFilter& filter) {
  if (static_cast<int>(y.size()) != filter.config.seq_len())
    throw InputError("reconstruct: measurement length must be 2K+1");
  FiberField out = FiberField::zeros(filter.config);
  for (int t = 0; t < filter.config.points(); ++t)
    out.values[t] =
        measurement_scalar(filter.config, y, t) * filter.lifted.values[t];
  return out;
}

// ||y||^2 minus the captured lift energy: the data-fidelity part of the
// reconstruction objective. Pythagoras makes it nonnegative; anything below
// -1e-9 means the filter or field state is corrupt.
inline double data_residual(const std::vector<cx>& y,
                            const DenoisingFilter& filter) {
  const double captured = field_norm_sq(reconstruct(y, filter));
  const double r = seq_norm_sq(y) - captured;
  if (r < -1e-9)
    throw NumericalError(
        "data_residual: captured energy exceeds the measurement energy");
  return std::max(r, 0.0);
}

}  // namespace sisopt
