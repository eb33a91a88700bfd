#pragma once

// Fiberization of the regularized sampling problem.
//
// A pair (c, f) of a measurement sequence c = {c_k}, |k| <= K, and a signal f
// carries the weighted norm  ||(c,f)||^2 = sum_k |c_k|^2 + lambda ||f||^2.
// The fiber map sends it to a field over the grid,
//
//   (c, f)  |->  ( n0^{-1/2} sum_k c_k e^{-2 pi i k xi_t / n0},
//                  { fhat(xi_t + l n0) }_{|l| <= L} ),
//
// one scalar-plus-fiber value per grid point. The n0^{-1/2} factor makes the
// map isometric on the grid: with quadrature weight 1/G the field norm equals
// the weighted norm of (c, f) exactly for in-band sequences, because the
// exponentials e^{-2 pi i k xi / n0} are orthogonal under midpoint quadrature
// and each carries squared mass n0 over one period. All downstream algebra
// (projections, energies, band selection) happens pointwise on such fields.

#include <utility>
#include <vector>

#include "sisopt/grid.hpp"

namespace sisopt {

// Relative out-of-band energy above which a scalar track is rejected as not
// being a measurement-band trigonometric polynomial.
inline constexpr double kOutOfBandTol = 1e-8;

// One field value: a measurement-track scalar and a signal-track fiber.
struct FiberVector {
  cx scalar{0.0, 0.0};
  std::vector<cx> fiber;  // index i stores offset l = i - L

  FiberVector() = default;
  explicit FiberVector(int fiber_len) : fiber(fiber_len) {}
  FiberVector(cx s, std::vector<cx> fib) : scalar(s), fiber(std::move(fib)) {}

  // ||v||^2 = |scalar|^2 + lambda sum_l |fiber_l|^2
  double norm_sq(double lambda) const {
    double s = std::norm(scalar);
    double fs = 0.0;
    for (const cx& z : fiber) fs += std::norm(z);
    return s + lambda * fs;
  }
};

// <u, v> = u.scalar conj(v.scalar) + lambda sum_l u_l conj(v_l).
// Conjugate-linear in the second argument; every projection in this library
// relies on that orientation.
inline cx weighted_inner_product(const FiberVector& u, const FiberVector& v,
                                 double lambda) {
  if (u.fiber.size() != v.fiber.size())
    throw InputError("weighted_inner_product: fiber length mismatch");
  cx acc = u.scalar * std::conj(v.scalar);
  cx fib{0.0, 0.0};
  for (std::size_t i = 0; i < u.fiber.size(); ++i)
    fib += u.fiber[i] * std::conj(v.fiber[i]);
  return acc + lambda * fib;
}

inline FiberVector operator+(const FiberVector& a, const FiberVector& b) {
  FiberVector r = a;
  r.scalar += b.scalar;
  if (a.fiber.size() != b.fiber.size())
    throw InputError("FiberVector: fiber length mismatch");
  for (std::size_t i = 0; i < r.fiber.size(); ++i) r.fiber[i] += b.fiber[i];
  return r;
}

inline FiberVector operator-(const FiberVector& a, const FiberVector& b) {
  FiberVector r = a;
  r.scalar -= b.scalar;
  if (a.fiber.size() != b.fiber.size())
    throw InputError("FiberVector: fiber length mismatch");
  for (std::size_t i = 0; i < r.fiber.size(); ++i) r.fiber[i] -= b.fiber[i];
  return r;
}

inline FiberVector operator*(cx a, const FiberVector& v) {
  FiberVector r = v;
  r.scalar *= a;
  for (cx& z : r.fiber) z *= a;
  return r;
}

// Fourier samples of one signal: fibers[t][l + L] = fhat(xi_t + l n0).
struct FiberizedSignal {
  GridConfig config;
  std::vector<std::vector<cx>> fibers;

  static FiberizedSignal zeros(const GridConfig& cfg) {
    FiberizedSignal s;
    s.config = cfg;
    s.fibers.assign(cfg.points(), std::vector<cx>(cfg.fiber_len()));
    return s;
  }

  // ||f||^2 = (1/G) sum_{t,l} |fhat|^2, the quadrature of the L^2 norm.
  double norm_sq() const {
    double acc = 0.0;
    for (const auto& row : fibers)
      for (const cx& z : row) acc += std::norm(z);
    return acc / config.G;
  }

  void validate_shape(const char* where) const {
    config.validate();
    if (static_cast<int>(fibers.size()) != config.points())
      throw InputError(std::string(where) + ": wrong number of grid rows");
    for (const auto& row : fibers)
      if (static_cast<int>(row.size()) != config.fiber_len())
        throw InputError(std::string(where) + ": wrong fiber length");
  }
};

// Integer translation by k acts on fibers as the pointwise phase
// e^{-2 pi i k (xi_t + l n0)} = e^{-2 pi i k xi_t}, the same for every l.
inline FiberizedSignal translate_signal(const FiberizedSignal& f, int k) {
  FiberizedSignal g = f;
  for (int t = 0; t < f.config.points(); ++t) {
    const cx ph = cis(-k * f.config.xi(t));
    for (cx& z : g.fibers[t]) z *= ph;
  }
  return g;
}

// A field over the grid with one FiberVector per point.
struct FiberField {
  GridConfig config;
  std::vector<FiberVector> values;

  static FiberField zeros(const GridConfig& cfg) {
    FiberField f;
    f.config = cfg;
    f.values.assign(cfg.points(), FiberVector(cfg.fiber_len()));
    return f;
  }

  void validate_shape(const char* where) const {
    config.validate();
    if (static_cast<int>(values.size()) != config.points())
      throw InputError(std::string(where) + ": wrong number of grid values");
    for (const auto& v : values)
      if (static_cast<int>(v.fiber.size()) != config.fiber_len())
        throw InputError(std::string(where) + ": wrong fiber length");
  }
};

// (1/G) sum_t ||values[t]||^2, the quadrature of the [0, n0] field integral.
inline double field_norm_sq(const FiberField& field) {
  double acc = 0.0;
  for (const FiberVector& v : field.values)
    acc += v.norm_sq(field.config.lambda);
  return acc / field.config.G;
}

// (1/G) sum_t <a_t, b_t>
inline cx field_inner_product(const FiberField& a, const FiberField& b) {
  require_same_config(a.config, b.config, "field_inner_product");
  cx acc{0.0, 0.0};
  for (int t = 0; t < a.config.points(); ++t)
    acc += weighted_inner_product(a.values[t], b.values[t], a.config.lambda);
  return acc / static_cast<double>(a.config.G);
}

inline FiberField operator-(const FiberField& a, const FiberField& b) {
  require_same_config(a.config, b.config, "FiberField subtraction");
  FiberField r = a;
  for (int t = 0; t < a.config.points(); ++t)
    r.values[t] = a.values[t] - b.values[t];
  return r;
}

// sum_k c_k e^{-2 pi i k xi_t / n0}, the raw measurement polynomial.
inline cx measurement_poly(const GridConfig& cfg, const std::vector<cx>& c,
                           int t) {
  if (static_cast<int>(c.size()) != cfg.seq_len())
    throw InputError("measurement_poly: sequence length must be 2K+1");
  cx acc{0.0, 0.0};
  const double x = cfg.xi(t) / cfg.n0;
  for (int k = -cfg.K; k <= cfg.K; ++k) acc += c[k + cfg.K] * cis(-k * x);
  return acc;
}

// Fiber map of (c, f). Scalar track carries the n0^{-1/2} isometry factor.
inline FiberField fiber_map(const std::vector<cx>& c,
                            const FiberizedSignal& f) {
  f.validate_shape("fiber_map");
  if (static_cast<int>(c.size()) != f.config.seq_len())
    throw InputError("fiber_map: sequence length must be 2K+1");
  FiberField out = FiberField::zeros(f.config);
  const double s = 1.0 / f.config.sqrt_n0();
  for (int t = 0; t < f.config.points(); ++t) {
    out.values[t].scalar = s * measurement_poly(f.config, c, t);
    out.values[t].fiber = f.fibers[t];
  }
  return out;
}

inline FiberField fiber_map(const GridConfig& cfg, const std::vector<cx>& c) {
  return fiber_map(c, FiberizedSignal::zeros(cfg));
}

struct InverseFiberMap {
  std::vector<cx> c;
  FiberizedSignal f;
};

// Inverts the fiber map. The sequence comes back through the quadrature DFT
//   c_k = (1/(G sqrt(n0))) sum_t scalar_t e^{+2 pi i k xi_t / n0},
// which is exact when the scalar track is an in-band polynomial; tracks with
// relative out-of-band energy above kOutOfBandTol are rejected.
inline InverseFiberMap inverse_fiber_map(const FiberField& field) {
  field.validate_shape("inverse_fiber_map");
  const GridConfig& cfg = field.config;
  InverseFiberMap out;
  out.c.assign(cfg.seq_len(), cx{0.0, 0.0});
  for (int k = -cfg.K; k <= cfg.K; ++k) {
    cx acc{0.0, 0.0};
    for (int t = 0; t < cfg.points(); ++t)
      acc += field.values[t].scalar * cis(k * cfg.xi(t) / cfg.n0);
    out.c[k + cfg.K] = acc / (cfg.G * cfg.sqrt_n0());
  }
  out.f = FiberizedSignal::zeros(cfg);
  for (int t = 0; t < cfg.points(); ++t) out.f.fibers[t] = field.values[t].fiber;

  // Out-of-band check: resynthesize the scalar track and compare energies.
  double track = 0.0, diff = 0.0;
  const double s = 1.0 / cfg.sqrt_n0();
  for (int t = 0; t < cfg.points(); ++t) {
    const cx resyn = s * measurement_poly(cfg, out.c, t);
    track += std::norm(field.values[t].scalar);
    diff += std::norm(field.values[t].scalar - resyn);
  }
  if (diff > kOutOfBandTol * std::max(track, 1e-300))
    throw InputError(
        "inverse_fiber_map: scalar track has out-of-band energy; it is not a "
        "measurement-band polynomial on this grid");
  return out;
}

// Lift of a signal against kernel fibers g:
//   ( n0^{-1/2} sum_l fhat conj(ghat) at xi_t + l n0, { fhat } ).
// The scalar track is exactly the fiber-mapped sample sequence of f, so the
// lift of an admissible signal is a fiber-mapped pair.
inline FiberField lift(const FiberizedSignal& f, const FiberizedSignal& g) {
  f.validate_shape("lift");
  g.validate_shape("lift");
  require_same_config(f.config, g.config, "lift");
  FiberField out = FiberField::zeros(f.config);
  const double s = 1.0 / f.config.sqrt_n0();
  for (int t = 0; t < f.config.points(); ++t) {
    cx acc{0.0, 0.0};
    for (int i = 0; i < f.config.fiber_len(); ++i)
      acc += f.fibers[t][i] * std::conj(g.fibers[t][i]);
    out.values[t].scalar = s * acc;
    out.values[t].fiber = f.fibers[t];
  }
  return out;
}

}  // namespace sisopt
