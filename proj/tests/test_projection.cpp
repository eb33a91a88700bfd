#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "sisopt/oracle.hpp"
#include "sisopt/projection.hpp"

using namespace sisopt;
using namespace sisopt::testing;

namespace {

// Kernel with prescribed fibers at every grid point (same row everywhere).
SamplingKernel constant_kernel(const GridConfig& cfg,
                               const std::vector<cx>& row) {
  FiberizedSignal g = FiberizedSignal::zeros(cfg);
  for (int t = 0; t < cfg.points(); ++t) g.fibers[t] = row;
  return make_kernel(std::move(g));
}

// The ordered generating set of A_xi, assembled independently of gs_basis.
std::vector<FiberVector> generating_set(const FiberizedSignal& g, int t,
                                        int order) {
  std::vector<FiberVector> out;
  for (int n = 0; n < order; ++n) {
    const int off = interleave_offset(n);
    FiberVector b(g.config.fiber_len());
    b.scalar =
        std::conj(g.fibers[t][off + g.config.L]) / g.config.sqrt_n0();
    b.fiber[off + g.config.L] = cx{1.0, 0.0};
    out.push_back(std::move(b));
  }
  return out;
}

double fiber_track_energy(const FiberField& x) {
  double acc = 0.0;
  for (const FiberVector& v : x.values)
    for (const cx& z : v.fiber) acc += std::norm(z);
  return acc / x.config.G;
}

}  // namespace

TEST_CASE("offset interleaving enumerates 0, 1, -1, 2, -2") {
  CHECK(interleave_offset(0) == 0);
  CHECK(interleave_offset(1) == 1);
  CHECK(interleave_offset(2) == -1);
  CHECK(interleave_offset(3) == 2);
  CHECK(interleave_offset(4) == -2);
  CHECK(interleave_offset(5) == 3);
}

TEST_CASE("recursion on a zero kernel returns bare unit vectors") {
  const GridConfig cfg = make_config(1, 8, 2, 2, 0.7);
  const SamplingKernel g = constant_kernel(cfg, std::vector<cx>(5));
  const GsRow row = gs_basis(g.fibers, 0, 5);
  for (int n = 0; n < 5; ++n) {
    CHECK(row.v[n].scalar == cx{0.0, 0.0});
    CHECK(row.norm_sq[n] == Catch::Approx(0.7).epsilon(1e-14));
    for (int i = 0; i < 5; ++i) {
      const cx want =
          (i == interleave_offset(n) + cfg.L) ? cx{1.0, 0.0} : cx{0.0, 0.0};
      CHECK(row.v[n].fiber[i] == want);
    }
  }
}

TEST_CASE("first basis vector and its norm") {
  // a0 = 2, lambda = 1: v0 = (2, e0), ||v0||^2 = 5
  const GridConfig cfg = make_config(1, 8, 1, 2, 1.0);
  const SamplingKernel g = constant_kernel(cfg, {cx{0, 0}, cx{2, 0}, cx{0, 0}});
  const GsRow row = gs_basis(g.fibers, 3, 3);
  CHECK(row.a[0] == cx{2.0, 0.0});
  CHECK(row.v[0].scalar == cx{2.0, 0.0});
  CHECK(row.v[0].fiber[cfg.L] == cx{1.0, 0.0});
  CHECK(row.norm_sq[0] == Catch::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("second norm follows the cumulative ratio") {
  // ||v1||^2 = lambda (|a1|^2 + |a0|^2 + lambda) / (|a0|^2 + lambda)
  const GridConfig cfg = make_config(1, 8, 1, 2, 0.5);
  const SamplingKernel g =
      constant_kernel(cfg, {cx{0, 0}, cx{1.0, -2.0}, cx{0.5, 1.5}});
  const GsRow row = gs_basis(g.fibers, 0, 3);
  const double a0 = std::norm(row.a[0]);
  const double a1 = std::norm(row.a[1]);
  const double want = 0.5 * (a1 + a0 + 0.5) / (a0 + 0.5);
  CHECK(row.norm_sq[1] == Catch::Approx(want).epsilon(1e-14));
  CHECK(row.cumulative[0] == 0.5);
  CHECK(row.cumulative[1] == Catch::Approx(0.5 + a0).epsilon(1e-14));
}

TEST_CASE("closed-form basis pinned against hand values") {
  // lambda = 2, fibers (offset -1, 0, +1) = (-1, 2, 2i); a = (2, -2i, -1)
  const GridConfig cfg = make_config(1, 8, 1, 2, 2.0);
  const SamplingKernel g =
      constant_kernel(cfg, {cx{-1, 0}, cx{2, 0}, cx{0, 2}});
  const GsRow row = gs_basis(g.fibers, 5, 3);
  REQUIRE(row.a.size() == 3);
  CHECK(std::abs(row.a[0] - cx{2, 0}) < 1e-15);
  CHECK(std::abs(row.a[1] - cx{0, -2}) < 1e-15);
  CHECK(std::abs(row.a[2] - cx{-1, 0}) < 1e-15);
  CHECK(row.cumulative == std::vector<double>{2, 6, 10, 11});

  CHECK(std::abs(row.v[0].scalar - cx{2, 0}) < 1e-15);
  CHECK(row.norm_sq[0] == Catch::Approx(6.0).epsilon(1e-14));

  // v1 = (-2i/3, e_{+1} + (2i/3) e_0), ||v1||^2 = 10/3
  CHECK(std::abs(row.v[1].scalar - cx{0, -2.0 / 3}) < 1e-15);
  CHECK(std::abs(row.v[1].fiber[2] - cx{1, 0}) < 1e-15);
  CHECK(std::abs(row.v[1].fiber[1] - cx{0, 2.0 / 3}) < 1e-15);
  CHECK(row.norm_sq[1] == Catch::Approx(10.0 / 3).epsilon(1e-14));

  // v2 = (-1/5, e_{-1} + (i/5) e_{+1} + (1/5) e_0), ||v2||^2 = 11/5
  CHECK(std::abs(row.v[2].scalar - cx{-0.2, 0}) < 1e-15);
  CHECK(std::abs(row.v[2].fiber[0] - cx{1, 0}) < 1e-15);
  CHECK(std::abs(row.v[2].fiber[2] - cx{0, 0.2}) < 1e-15);
  CHECK(std::abs(row.v[2].fiber[1] - cx{0.2, 0}) < 1e-15);
  CHECK(row.norm_sq[2] == Catch::Approx(2.2).epsilon(1e-14));
}

TEST_CASE("closed form matches generic modified Gram-Schmidt") {
  TestRng rng(1212);
  for (int rep = 0; rep < 25; ++rep) {
    const int n0 = 1 + rng.index(3);
    const GridConfig cfg = make_config(n0, 8, 2, 3, 0.2 + rng.unit());
    const FiberizedSignal g = random_dense_signal(rng, cfg);
    const int t = rng.index(cfg.points());
    const int order = cfg.fiber_len();
    const GsRow row = gs_basis(g, t, order);
    const std::vector<FiberVector> generic =
        ref_modified_gram_schmidt(generating_set(g, t, order), cfg.lambda);
    REQUIRE(generic.size() == row.v.size());
    for (std::size_t n = 0; n < generic.size(); ++n) {
      CHECK(max_abs_diff(row.v[n], generic[n]) < 1e-9);
      CHECK(std::abs(generic[n].norm_sq(cfg.lambda) - row.norm_sq[n]) <
            1e-9 * row.norm_sq[n]);
    }
  }
}

TEST_CASE("projection of the unit measurement, real kernel") {
  // single nonzero a0 = 2, lambda = 1: P(1,0) = (4/5, (2/5) e_0)
  const GridConfig cfg = make_config(1, 8, 1, 2, 1.0);
  const SamplingKernel g = constant_kernel(cfg, {cx{0, 0}, cx{2, 0}, cx{0, 0}});
  FiberVector unit(cfg.fiber_len());
  unit.scalar = cx{1.0, 0.0};
  const FiberVector p = project_A(g.fibers, 0, unit);
  CHECK(std::abs(p.scalar - cx{0.8, 0.0}) < 1e-14);
  CHECK(std::abs(p.fiber[1] - cx{0.4, 0.0}) < 1e-14);
  CHECK(std::abs(p.fiber[0]) < 1e-14);
  CHECK(std::abs(p.fiber[2]) < 1e-14);
}

TEST_CASE("projection coefficients conjugate the kernel, complex case") {
  // ghat = 2i at offset 0: a0 = -2i and P(1,0) = (4/5, (2i/5) e_0). Without
  // the conjugate the fiber coefficient would flip sign.
  const GridConfig cfg = make_config(1, 8, 1, 2, 1.0);
  const SamplingKernel g = constant_kernel(cfg, {cx{0, 0}, cx{0, 2}, cx{0, 0}});
  FiberVector unit(cfg.fiber_len());
  unit.scalar = cx{1.0, 0.0};
  const FiberVector p = project_A(g.fibers, 0, unit);
  CHECK(std::abs(p.scalar - cx{0.8, 0.0}) < 1e-14);
  CHECK(std::abs(p.fiber[1] - cx{0.0, 0.4}) < 1e-14);
}

TEST_CASE("projection agrees with the normal equations oracle") {
  TestRng rng(1313);
  for (int rep = 0; rep < 30; ++rep) {
    const int n0 = 1 + rng.index(3);
    const GridConfig cfg = make_config(n0, 8, 2, 3, 0.2 + rng.unit());
    const FiberizedSignal g = random_dense_signal(rng, cfg);
    const int t = rng.index(cfg.points());
    const FiberVector target = random_fiber_vector(rng, cfg.fiber_len());
    const FiberVector prod = project_A(g, t, target);
    const OracleProjection ora = oracle_project(
        generating_set(g, t, cfg.fiber_len()), target, cfg.lambda);
    CHECK_FALSE(ora.pseudo_inverse);
    CHECK(max_abs_diff(prod, ora.value) < 1e-8);
  }
}

TEST_CASE("projection is idempotent and residuals are orthogonal") {
  TestRng rng(1414);
  const GridConfig cfg = make_config(2, 8, 2, 3, 0.6);
  const FiberizedSignal g = random_dense_signal(rng, cfg);
  for (int rep = 0; rep < 10; ++rep) {
    const int t = rng.index(cfg.points());
    const FiberVector target = random_fiber_vector(rng, cfg.fiber_len());
    const FiberVector p = project_A(g, t, target);
    CHECK(max_abs_diff(project_A(g, t, p), p) < 1e-12);
    const FiberVector r = target - p;
    const GsRow row = gs_basis(g, t, cfg.fiber_len());
    for (const FiberVector& v : row.v)
      CHECK(std::abs(weighted_inner_product(r, v, cfg.lambda)) < 1e-10);
  }
}

TEST_CASE("filter matches the rank-one ridge closed form") {
  TestRng rng(1515);
  for (int n0 : {1, 2}) {
    const GridConfig cfg = make_config(n0, 8, 2, 3, 0.8);
    const SamplingKernel g = make_kernel(random_dense_signal(rng, cfg));
    const DenoisingFilter filter = build_filter(g);
    for (int t = 0; t < cfg.points(); ++t) {
      double gn = 0.0;  // ||g_xi||^2 / n0
      for (const cx& z : g.fibers.fibers[t]) gn += std::norm(z);
      gn /= cfg.n0;
      const double denom = cfg.lambda + gn;
      for (int i = 0; i < cfg.fiber_len(); ++i) {
        const cx want = g.fibers.fibers[t][i] / (cfg.sqrt_n0() * denom);
        CHECK(std::abs(filter.d[t][i] - want) < 1e-12);
      }
      const double w = filter.lifted.values[t].norm_sq(cfg.lambda);
      CHECK(w == Catch::Approx(1.0 - cfg.lambda / denom).margin(1e-12));
    }
  }
}

TEST_CASE("frozen filter fibers for the pinned kernel") {
  // lambda = 2, fibers (-1, 2, 2i): d = (-1/11, 2/11, 2i/11), w = 9/11
  const GridConfig cfg = make_config(1, 8, 1, 2, 2.0);
  const SamplingKernel g =
      constant_kernel(cfg, {cx{-1, 0}, cx{2, 0}, cx{0, 2}});
  const DenoisingFilter filter = build_filter(g);
  const int t = 4;
  CHECK(std::abs(filter.d[t][0] - cx{-1.0 / 11, 0}) < 1e-14);
  CHECK(std::abs(filter.d[t][1] - cx{2.0 / 11, 0}) < 1e-14);
  CHECK(std::abs(filter.d[t][2] - cx{0, 2.0 / 11}) < 1e-14);
  CHECK(std::abs(filter.lifted.values[t].scalar - cx{9.0 / 11, 0}) < 1e-14);
}

TEST_CASE("reconstruction is the filter scaled by the measurement track") {
  TestRng rng(1616);
  const GridConfig cfg = make_config(1, 8, 2, 3, 1.0);
  const SamplingKernel g = make_kernel(random_dense_signal(rng, cfg));
  const DenoisingFilter filter = build_filter(g);
  std::vector<cx> delta(cfg.seq_len(), cx{0, 0});
  delta[cfg.K] = cx{1.0, 0.0};
  const FiberField rec = reconstruct(delta, filter);
  CHECK(max_abs_diff(rec, filter.lifted) < 1e-14);

  const std::vector<cx> y = random_sequence(rng, cfg.seq_len());
  const FiberField ry = reconstruct(y, filter);
  for (int t = 0; t < cfg.points(); ++t) {
    const cx a = measurement_scalar(cfg, y, t);
    CHECK(max_abs_diff(ry.values[t], a * filter.lifted.values[t]) < 1e-12);
  }
}

TEST_CASE("reconstruction is the pointwise projection of the lifted data") {
  TestRng rng(1717);
  for (int n0 : {1, 2, 3}) {
    const GridConfig cfg = make_config(n0, 8, 2, 3, 0.4);
    const SamplingKernel g = make_kernel(random_dense_signal(rng, cfg));
    const DenoisingFilter filter = build_filter(g);
    const std::vector<cx> y = random_sequence(rng, cfg.seq_len());
    const FiberField data = fiber_map(cfg, y);
    const FiberField rec = reconstruct(y, filter);
    for (int t = 0; t < cfg.points(); ++t) {
      const FiberVector p = project_A(g.fibers, t, data.values[t]);
      CHECK(max_abs_diff(rec.values[t], p) < 1e-12);
    }
  }
}

TEST_CASE("data residual on a zero kernel is the full energy") {
  const GridConfig cfg = make_config(1, 8, 2, 3, 1.0);
  const SamplingKernel g =
      constant_kernel(cfg, std::vector<cx>(cfg.fiber_len()));
  const DenoisingFilter filter = build_filter(g);
  TestRng rng(1818);
  const std::vector<cx> y = random_sequence(rng, cfg.seq_len());
  CHECK(data_residual(y, filter) ==
        Catch::Approx(seq_norm_sq(y)).epsilon(1e-14));
}

TEST_CASE("data residual is a pythagorean split") {
  TestRng rng(1919);
  for (int rep = 0; rep < 15; ++rep) {
    const int n0 = 1 + rng.index(3);
    const GridConfig cfg = make_config(n0, 8, 2, 3, 0.3 + rng.unit());
    const SamplingKernel g = make_kernel(random_dense_signal(rng, cfg));
    const DenoisingFilter filter = build_filter(g);
    const std::vector<cx> y = random_sequence(rng, cfg.seq_len());
    const double res = data_residual(y, filter);
    CHECK(res >= 0.0);
    // independent route: quadrature of the pointwise projection residuals
    const FiberField data = fiber_map(cfg, y);
    long double acc = 0.0L;
    for (int t = 0; t < cfg.points(); ++t) {
      const FiberVector p = project_A(g.fibers, t, data.values[t]);
      acc += (data.values[t] - p).norm_sq(cfg.lambda);
    }
    const double want = static_cast<double>(acc / cfg.G);
    CHECK(res == Catch::Approx(want).margin(1e-9));
  }
}

TEST_CASE("reconstructed signal energy shrinks as lambda grows") {
  TestRng rng(2020);
  const GridConfig cfg = make_config(2, 8, 2, 3, 1.0);
  const SamplingKernel g = make_kernel(random_dense_signal(rng, cfg));
  const std::vector<cx> y = random_sequence(rng, cfg.seq_len());
  double prev = -1.0;
  bool first = true;
  for (double lam : {1e-2, 1e-1, 1.0, 1e1, 1e2}) {
    const DenoisingFilter filter = build_filter(g, lam);
    const double energy = fiber_track_energy(reconstruct(y, filter));
    if (!first) CHECK(energy <= prev + 1e-12);
    prev = energy;
    first = false;
  }
}
