#pragma once

// Band decomposition and finitely generated model spaces.
//
// The fiber period [0, n0) splits into unit bands [k, k+1); via the n0 Z
// periodization each band induces the frequency set B_k = union_j [k, k+1) +
// n0 j, so masking a fiberized object by band k means zeroing every grid
// point whose base frequency falls outside [k, k+1). A model space is stored
// extensionally: for each grid point an orthonormal list of FiberVectors
// spanning the range fiber there. Length, activity, and projections all read
// off that per-point data.

#include <algorithm>
#include <string>
#include <vector>

#include "sisopt/fiber.hpp"

namespace sisopt {

// Relative tolerance for numerical rank decisions when ingesting generators.
inline constexpr double kRankTol = 1e-8;

enum class ModelClass { generic, extra_invariant, paley_wiener };

inline std::string to_string(ModelClass c) {
  switch (c) {
    case ModelClass::generic: return "generic";
    case ModelClass::extra_invariant: return "extra-invariant";
    case ModelClass::paley_wiener: return "paley-wiener";
  }
  throw InputError("unknown model class tag");
}

inline ModelClass parse_model_class(const std::string& s) {
  if (s == "generic") return ModelClass::generic;
  if (s == "extra-invariant") return ModelClass::extra_invariant;
  if (s == "paley-wiener") return ModelClass::paley_wiener;
  throw InputError("unknown model class tag: " + s);
}

// Zero out every grid row of x outside band k. All fiber offsets at a kept
// point stay, matching the n0 Z periodicity of B_k.
template <class T>
T band_project(const T& x, int k) {
  if (k < 0 || k >= x.config.n0)
    throw InputError("band_project: band index outside [0, n0)");
  T out = x;
  for (int t = 0; t < x.config.points(); ++t) {
    if (x.config.band_of(t) == k) continue;
    if constexpr (requires { out.fibers; }) {
      std::fill(out.fibers[t].begin(), out.fibers[t].end(), cx{0.0, 0.0});
    } else {
      out.values[t] = FiberVector(x.config.fiber_len());
    }
  }
  return out;
}

struct SisModel {
  GridConfig config;
  ModelClass tag = ModelClass::generic;
  // basis[t] is an orthonormal list in the lambda-weighted inner product.
  std::vector<std::vector<FiberVector>> basis;

  static SisModel empty(const GridConfig& cfg, ModelClass tag) {
    SisModel m;
    m.config = cfg;
    m.tag = tag;
    m.basis.assign(cfg.points(), {});
    return m;
  }

  int dim(int t) const { return static_cast<int>(basis[t].size()); }

  // Ingest one generator fiber at grid point t: orthonormalize against the
  // vectors already stored and keep the remainder when it is numerically
  // independent. Returns false for (near) dependent or negligible input.
  bool add_generator(int t, FiberVector v) {
    const double lam = config.lambda;
    const double n0sq = std::sqrt(v.norm_sq(lam));
    if (!(n0sq > 0.0) || !std::isfinite(n0sq)) return false;
    v = (cx{1.0 / n0sq, 0.0}) * v;
    // Two passes keep the stored list orthonormal to rounding error.
    for (int pass = 0; pass < 2; ++pass)
      for (const FiberVector& u : basis[t])
        v = v - weighted_inner_product(v, u, lam) * u;
    const double r = std::sqrt(v.norm_sq(lam));
    if (r <= kRankTol) return false;
    basis[t].push_back((cx{1.0 / r, 0.0}) * v);
    return true;
  }

  void validate(const char* where) const {
    config.validate();
    if (static_cast<int>(basis.size()) != config.points())
      throw InputError(std::string(where) + ": wrong number of grid rows");
    const double lam = config.lambda;
    for (int t = 0; t < config.points(); ++t) {
      for (std::size_t i = 0; i < basis[t].size(); ++i) {
        if (static_cast<int>(basis[t][i].fiber.size()) != config.fiber_len())
          throw InputError(std::string(where) + ": wrong fiber length");
        for (std::size_t j = 0; j <= i; ++j) {
          const cx ip = weighted_inner_product(basis[t][i], basis[t][j], lam);
          const double want = (i == j) ? 1.0 : 0.0;
          if (std::abs(ip - cx{want, 0.0}) > 1e-8)
            throw NumericalError(std::string(where) +
                                 ": stored basis is not orthonormal");
        }
      }
    }
  }
};

// Bands with at least one generator at base point tb, in increasing order.
inline std::vector<int> active_bands(const SisModel& model, int tb) {
  std::vector<int> out;
  for (int k = 0; k < model.config.n0; ++k)
    if (model.dim(model.config.point(k, tb)) > 0) out.push_back(k);
  return out;
}

// Len V = max over base points of sum_k dim J(xi + k).
inline int model_length(const SisModel& model) {
  int len = 0;
  for (int tb = 0; tb < model.config.base_points(); ++tb) {
    int total = 0;
    for (int k = 0; k < model.config.n0; ++k)
      total += model.dim(model.config.point(k, tb));
    len = std::max(len, total);
  }
  return len;
}

// Pointwise orthogonal projection onto the stored range fibers.
inline FiberField range_project(const SisModel& model, const FiberField& x) {
  require_same_config(model.config, x.config, "range_project");
  FiberField out = FiberField::zeros(x.config);
  const double lam = x.config.lambda;
  for (int t = 0; t < x.config.points(); ++t)
    for (const FiberVector& u : model.basis[t])
      out.values[t] =
          out.values[t] + weighted_inner_product(x.values[t], u, lam) * u;
  return out;
}

// Flatten the model into one fiberized signal per (band, slot) pair, k-major.
// Slot i of band k collects the i-th stored basis fiber at every point of the
// band, zero where fewer vectors are stored.
inline std::vector<FiberizedSignal> generator_signals(const SisModel& model) {
  std::vector<FiberizedSignal> out;
  for (int k = 0; k < model.config.n0; ++k) {
    int slots = 0;
    for (int tb = 0; tb < model.config.base_points(); ++tb)
      slots = std::max(slots, model.dim(model.config.point(k, tb)));
    for (int i = 0; i < slots; ++i) {
      FiberizedSignal s = FiberizedSignal::zeros(model.config);
      for (int tb = 0; tb < model.config.base_points(); ++tb) {
        const int t = model.config.point(k, tb);
        if (i < model.dim(t)) s.fibers[t] = model.basis[t][i].fiber;
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace sisopt
