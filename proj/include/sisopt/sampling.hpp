#pragma once

// Uniform sampling against a kernel, and synthesis of test signals.
//
// The measurement sequence of a signal f against kernel g is the Fourier
// coefficient sequence of the bracket sum_l fhat conj(ghat) (xi + l n0) over
// one period [0, n0). On the grid that bracket is computed pointwise and the
// coefficients come back through the quadrature DFT; if the bracket carries
// energy outside the measurement band |k| <= K the configuration cannot
// represent the samples and the call refuses instead of aliasing.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "sisopt/bands.hpp"
#include "sisopt/fiber.hpp"

namespace sisopt {

struct KernelBound {
  bool bounded = true;
  double M = 0.0;  // max over grid points of sum_l |ghat|^2
};

// On a finite grid every kernel is bounded; the constant itself is what
// matters, since ||sample(f, g)||^2 <= M n0 ||f||^2.
inline KernelBound verify_kernel_bound(const FiberizedSignal& g) {
  g.validate_shape("verify_kernel_bound");
  KernelBound out;
  for (const auto& row : g.fibers) {
    double s = 0.0;
    for (const cx& z : row) s += std::norm(z);
    out.M = std::max(out.M, s);
    if (!std::isfinite(s)) out.bounded = false;
  }
  return out;
}

struct SamplingKernel {
  FiberizedSignal fibers;
  double bound_M = 0.0;

  const GridConfig& config() const { return fibers.config; }
};

inline SamplingKernel make_kernel(FiberizedSignal fibers) {
  const KernelBound b = verify_kernel_bound(fibers);
  if (!b.bounded) throw InputError("make_kernel: kernel fibers are not finite");
  return SamplingKernel{std::move(fibers), b.M};
}

inline FiberField lift(const FiberizedSignal& f, const SamplingKernel& g) {
  return lift(f, g.fibers);
}

struct MeasurementSet {
  GridConfig config;
  std::vector<std::vector<cx>> sequences;  // sequences[j][k + K]

  int count() const { return static_cast<int>(sequences.size()); }

  void validate_shape(const char* where) const {
    config.validate();
    for (const auto& y : sequences)
      if (static_cast<int>(y.size()) != config.seq_len())
        throw InputError(std::string(where) +
                         ": measurement length must be 2K+1");
  }
};

inline double seq_norm_sq(const std::vector<cx>& y) {
  double s = 0.0;
  for (const cx& z : y) s += std::norm(z);
  return s;
}

// y_k = (1/(n0 G)) sum_t bracket_t e^{+2 pi i k xi_t / n0}, |k| <= K.
// Refuses when the bracket is not an in-band polynomial: the relative
// out-of-band energy is reported so the caller can grow K.
inline std::vector<cx> sample(const FiberizedSignal& f,
                              const SamplingKernel& g) {
  f.validate_shape("sample");
  require_same_config(f.config, g.config(), "sample");
  const GridConfig& cfg = f.config;
  std::vector<cx> bracket(cfg.points());
  for (int t = 0; t < cfg.points(); ++t) {
    cx acc{0.0, 0.0};
    for (int i = 0; i < cfg.fiber_len(); ++i)
      acc += f.fibers[t][i] * std::conj(g.fibers.fibers[t][i]);
    bracket[t] = acc;
  }
  std::vector<cx> y(cfg.seq_len());
  for (int k = -cfg.K; k <= cfg.K; ++k) {
    cx acc{0.0, 0.0};
    for (int t = 0; t < cfg.points(); ++t)
      acc += bracket[t] * cis(k * cfg.xi(t) / cfg.n0);
    y[k + cfg.K] = acc / static_cast<double>(cfg.n0 * cfg.G);
  }
  double track = 0.0, diff = 0.0;
  for (int t = 0; t < cfg.points(); ++t) {
    track += std::norm(bracket[t]);
    diff += std::norm(bracket[t] - measurement_poly(cfg, y, t));
  }
  if (diff > kOutOfBandTol * std::max(track, 1e-300)) {
    const double rel = diff / track;
    throw InputError(
        "sample: bracket has relative out-of-band energy " +
        std::to_string(rel) +
        "; the measurement support K is too small for this signal/kernel");
  }
  return y;
}

// Deterministic complex gaussian noise for measurement sequences.
inline std::vector<cx> make_gaussian_noise(const GridConfig& cfg,
                                           std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<cx> out(cfg.seq_len());
  for (cx& z : out) {
    const double re = nd(rng);
    const double im = nd(rng);
    z = scale * cx{re, im};
  }
  return out;
}

struct SynthesisResult {
  FiberizedSignal signal;
  MeasurementSet measurements;
};

// Build f = sum_i p_i(xi) . generator_i with 1-periodic coefficient
// polynomials p_i(xi) = sum_k coeff_i[k] e^{-2 pi i k xi}, then sample it.
// Generators are the model's (band, slot) signals in generator_signals
// order. Coefficient sequences must be odd length and resolvable on the base
// grid (2 Kc + 1 <= G). Optional explicit noise, or seeded gaussian noise
// with the given scale, is added to the measurement sequence.
inline SynthesisResult synthesize(const SisModel& model,
                                  const std::vector<std::vector<cx>>& coeffs,
                                  const SamplingKernel& g,
                                  const std::optional<std::vector<cx>>& noise,
                                  double noise_scale = 0.0,
                                  std::uint64_t seed = 0) {
  require_same_config(model.config, g.config(), "synthesize");
  const GridConfig& cfg = model.config;
  const std::vector<FiberizedSignal> gens = generator_signals(model);
  if (coeffs.size() != gens.size())
    throw InputError(
        "synthesize: got " + std::to_string(coeffs.size()) +
        " coefficient sequences for " + std::to_string(gens.size()) +
        " model generators");
  for (const auto& c : coeffs) {
    if (c.empty() || c.size() % 2 == 0)
      throw InputError("synthesize: coefficient sequences must have odd length");
    if (static_cast<int>(c.size()) > cfg.G)
      throw InputError(
          "synthesize: coefficient sequence exceeds the base grid resolution");
  }
  FiberizedSignal f = FiberizedSignal::zeros(cfg);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const int kc = (static_cast<int>(coeffs[i].size()) - 1) / 2;
    for (int t = 0; t < cfg.points(); ++t) {
      cx p{0.0, 0.0};
      for (int k = -kc; k <= kc; ++k)
        p += coeffs[i][k + kc] * cis(-k * cfg.xi(t));
      if (p == cx{0.0, 0.0}) continue;
      for (int ii = 0; ii < cfg.fiber_len(); ++ii)
        f.fibers[t][ii] += p * gens[i].fibers[t][ii];
    }
  }
  std::vector<cx> y = sample(f, g);
  if (noise) {
    if (static_cast<int>(noise->size()) != cfg.seq_len())
      throw InputError("synthesize: noise length must be 2K+1");
    for (int i = 0; i < cfg.seq_len(); ++i) y[i] += (*noise)[i];
  } else if (noise_scale > 0.0) {
    const std::vector<cx> n = make_gaussian_noise(cfg, seed, noise_scale);
    for (int i = 0; i < cfg.seq_len(); ++i) y[i] += n[i];
  }
  return SynthesisResult{std::move(f), MeasurementSet{cfg, {std::move(y)}}};
}

}  // namespace sisopt
