#pragma once

// Shared fixtures and reference computations for the test suite. Reference
// paths deliberately avoid the library's production formulas: norms are
// accumulated in long double by direct summation, transforms are naive DFT
// loops, and orthogonalization is the generic modified Gram-Schmidt.

#include <random>
#include <vector>

#include "sisopt/fiber.hpp"
#include "sisopt/sampling.hpp"

namespace sisopt::testing {

struct TestRng {
  std::mt19937_64 eng;
  explicit TestRng(std::uint64_t seed) : eng(seed) {}

  double unit() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(eng);
  }
  double gauss() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
  cx cgauss() { return {gauss(), gauss()}; }
  int index(int n) {
    return std::uniform_int_distribution<int>(0, n - 1)(eng);
  }
};

inline GridConfig make_config(int n0, int G, int L, int K, double lambda) {
  GridConfig cfg;
  cfg.n0 = n0;
  cfg.G = G;
  cfg.L = L;
  cfg.K = K;
  cfg.lambda = lambda;
  cfg.validate();
  return cfg;
}

inline std::vector<cx> random_sequence(TestRng& rng, int len) {
  std::vector<cx> c(len);
  for (cx& z : c) z = rng.cgauss();
  return c;
}

// Signal whose fiber rows are trigonometric polynomials of degree <= deg in
// the modes e^{-2 pi i p xi / n0}. Products of two such signals stay in the
// measurement band when the degrees sum to at most K.
inline FiberizedSignal random_trig_signal(TestRng& rng, const GridConfig& cfg,
                                          int deg) {
  FiberizedSignal f = FiberizedSignal::zeros(cfg);
  for (int i = 0; i < cfg.fiber_len(); ++i) {
    std::vector<cx> coef(2 * deg + 1);
    for (cx& z : coef) z = rng.cgauss();
    for (int t = 0; t < cfg.points(); ++t) {
      cx acc{0.0, 0.0};
      for (int p = -deg; p <= deg; ++p)
        acc += coef[p + deg] * cis(-p * cfg.xi(t) / cfg.n0);
      f.fibers[t][i] = acc;
    }
  }
  return f;
}

// Fully unstructured fibers; not sampleable, fine for pointwise algebra.
inline FiberizedSignal random_dense_signal(TestRng& rng,
                                           const GridConfig& cfg) {
  FiberizedSignal f = FiberizedSignal::zeros(cfg);
  for (auto& row : f.fibers)
    for (cx& z : row) z = rng.cgauss();
  return f;
}

inline FiberVector random_fiber_vector(TestRng& rng, int fiber_len) {
  FiberVector v(fiber_len);
  v.scalar = rng.cgauss();
  for (cx& z : v.fiber) z = rng.cgauss();
  return v;
}

// ---- reference computations ----

inline double ref_seq_norm_sq(const std::vector<cx>& c) {
  long double acc = 0.0L;
  for (const cx& z : c)
    acc += static_cast<long double>(z.real()) * z.real() +
           static_cast<long double>(z.imag()) * z.imag();
  return static_cast<double>(acc);
}

inline double ref_signal_norm_sq(const FiberizedSignal& f) {
  long double acc = 0.0L;
  for (const auto& row : f.fibers)
    for (const cx& z : row)
      acc += static_cast<long double>(std::norm(z));
  return static_cast<double>(acc / f.config.G);
}

inline double ref_field_norm_sq(const FiberField& x) {
  long double acc = 0.0L;
  for (const FiberVector& v : x.values) {
    acc += static_cast<long double>(std::norm(v.scalar));
    long double fib = 0.0L;
    for (const cx& z : v.fiber) fib += static_cast<long double>(std::norm(z));
    acc += static_cast<long double>(x.config.lambda) * fib;
  }
  return static_cast<double>(acc / x.config.G);
}

// Generic modified Gram-Schmidt without normalization; in exact arithmetic it
// coincides with classical orthogonalization of the same ordered vectors.
inline std::vector<FiberVector> ref_modified_gram_schmidt(
    std::vector<FiberVector> vecs, double lambda) {
  std::vector<FiberVector> out;
  for (FiberVector& v : vecs) {
    for (const FiberVector& u : out) {
      const double un = u.norm_sq(lambda);
      if (un <= 0.0) continue;
      const cx coeff = weighted_inner_product(v, u, lambda) / un;
      v = v - coeff * u;
    }
    out.push_back(v);
  }
  return out;
}

inline double max_abs_diff(const FiberVector& a, const FiberVector& b) {
  double m = std::abs(a.scalar - b.scalar);
  for (std::size_t i = 0; i < a.fiber.size(); ++i)
    m = std::max(m, std::abs(a.fiber[i] - b.fiber[i]));
  return m;
}

inline double max_abs_diff(const FiberField& a, const FiberField& b) {
  double m = 0.0;
  for (std::size_t t = 0; t < a.values.size(); ++t)
    m = std::max(m, max_abs_diff(a.values[t], b.values[t]));
  return m;
}

}  // namespace sisopt::testing
