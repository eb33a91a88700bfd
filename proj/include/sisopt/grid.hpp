#pragma once

// Frequency grid shared by every module.
//
// Signals enter in fiberized form: the Fourier transform is sampled on the
// midpoint grid xi_t = (t + 1/2)/G, t = 0..n0*G-1, covering one fiber period
// [0, n0), and fiber offsets l in [-L, L] address the translated frequencies
// xi_t + l*n0. Measurement sequences are supported on k in [-K, K]. Midpoint
// quadrature with weight 1/G integrates trigonometric polynomials on the
// grid exactly, provided n0*G >= 2K+1 so the exponentials of the measurement
// band stay distinguishable; that inequality is enforced here once and
// assumed everywhere else.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sisopt {

using cx = std::complex<double>;

// Invalid configuration or malformed input data.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical invariant failed on internally produced data.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// e^{2 pi i x}
inline cx cis(double x) {
  const double th = 2.0 * std::numbers::pi * x;
  return {std::cos(th), std::sin(th)};
}

struct GridConfig {
  int n0 = 1;           // sampling rate; one fiber period spans [0, n0)
  int G = 8;            // grid points per unit frequency
  int L = 2;            // fiber truncation, offsets l in [-L, L]
  int K = 2;            // measurement support, k in [-K, K]
  double lambda = 1.0;  // regularization weight on the signal track

  int points() const { return n0 * G; }
  int base_points() const { return G; }
  int fiber_len() const { return 2 * L + 1; }
  int seq_len() const { return 2 * K + 1; }
  double xi(int t) const { return (t + 0.5) / G; }
  // xi_t is never an integer, so each grid point lies in exactly one band.
  int band_of(int t) const { return t / G; }
  int point(int band, int tb) const { return band * G + tb; }
  double sqrt_n0() const { return std::sqrt(static_cast<double>(n0)); }

  void validate() const {
    if (n0 < 1) throw InputError("grid: n0 must be >= 1");
    if (G < 1) throw InputError("grid: G must be >= 1");
    if (L < 0) throw InputError("grid: L must be >= 0");
    if (K < 0) throw InputError("grid: K must be >= 0");
    if (!(lambda > 0.0)) throw InputError("grid: lambda must be positive");
    if (n0 * G < 2 * K + 1)
      throw InputError(
          "grid: n0*G must be >= 2K+1 so the grid resolves the measurement "
          "support");
  }

  bool operator==(const GridConfig&) const = default;
};

inline void require_same_config(const GridConfig& a, const GridConfig& b,
                                const char* where) {
  if (!(a == b))
    throw InputError(std::string(where) + ": mismatched grid configurations");
}

}  // namespace sisopt
