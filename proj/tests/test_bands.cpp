#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "sisopt/bands.hpp"
#include "sisopt/oracle.hpp"

using namespace sisopt;
using namespace sisopt::testing;

TEST_CASE("band projection partitions a signal") {
  TestRng rng(2101);
  const GridConfig cfg = make_config(3, 8, 2, 3, 1.0);
  const FiberizedSignal f = random_dense_signal(rng, cfg);
  FiberizedSignal sum = FiberizedSignal::zeros(cfg);
  for (int k = 0; k < cfg.n0; ++k) {
    const FiberizedSignal part = band_project(f, k);
    // idempotent
    const FiberizedSignal twice = band_project(part, k);
    for (int t = 0; t < cfg.points(); ++t)
      for (int i = 0; i < cfg.fiber_len(); ++i) {
        sum.fibers[t][i] += part.fibers[t][i];
        CHECK(twice.fibers[t][i] == part.fibers[t][i]);
      }
  }
  for (int t = 0; t < cfg.points(); ++t)
    for (int i = 0; i < cfg.fiber_len(); ++i)
      CHECK(sum.fibers[t][i] == f.fibers[t][i]);
}

TEST_CASE("distinct band projections are orthogonal") {
  TestRng rng(2202);
  const GridConfig cfg = make_config(3, 8, 2, 3, 0.5);
  const FiberizedSignal f = random_dense_signal(rng, cfg);
  const FiberizedSignal g = random_dense_signal(rng, cfg);
  for (int i = 0; i < cfg.n0; ++i)
    for (int j = 0; j < cfg.n0; ++j) {
      if (i == j) continue;
      const FiberizedSignal fi = band_project(f, i);
      const FiberizedSignal gj = band_project(g, j);
      long double ip = 0.0L;
      for (int t = 0; t < cfg.points(); ++t)
        for (int c = 0; c < cfg.fiber_len(); ++c) {
          const cx term = fi.fibers[t][c] * std::conj(gj.fibers[t][c]);
          ip += term.real() + term.imag();
        }
      CHECK(static_cast<double>(ip) == 0.0);
    }
}

TEST_CASE("band projection at n0 = 1 is the identity") {
  TestRng rng(2303);
  const GridConfig cfg = make_config(1, 8, 2, 3, 1.0);
  const FiberizedSignal f = random_dense_signal(rng, cfg);
  const FiberizedSignal p = band_project(f, 0);
  for (int t = 0; t < cfg.points(); ++t)
    CHECK(p.fibers[t] == f.fibers[t]);
  CHECK_THROWS_AS(band_project(f, 1), InputError);
  CHECK_THROWS_AS(band_project(f, -1), InputError);
}

TEST_CASE("generator ingestion keeps the basis orthonormal") {
  TestRng rng(2404);
  const GridConfig cfg = make_config(2, 8, 2, 3, 0.7);
  SisModel model = SisModel::empty(cfg, ModelClass::generic);
  const int t = 5;
  for (int i = 0; i < 4; ++i)
    model.add_generator(t, random_fiber_vector(rng, cfg.fiber_len()));
  CHECK(model.dim(t) == 4);
  model.validate("test");
  // a vector already in the span is rejected
  FiberVector dep(cfg.fiber_len());
  for (int i = 0; i < model.dim(t); ++i)
    dep = dep + cx{0.5 * (i + 1), -0.25} * model.basis[t][i];
  CHECK_FALSE(model.add_generator(t, dep));
  CHECK(model.dim(t) == 4);
  // the zero vector is rejected
  CHECK_FALSE(model.add_generator(t, FiberVector(cfg.fiber_len())));
}

TEST_CASE("near-dependent generators are dropped at the rank tolerance") {
  const GridConfig cfg = make_config(1, 8, 1, 2, 1.0);
  SisModel model = SisModel::empty(cfg, ModelClass::generic);
  FiberVector a(cfg.fiber_len());
  a.fiber[0] = cx{1.0, 0.0};
  REQUIRE(model.add_generator(0, a));
  FiberVector b = a;
  b.fiber[1] = cx{1e-10, 0.0};  // relative perturbation below 1e-8
  CHECK_FALSE(model.add_generator(0, b));
  FiberVector c = a;
  c.fiber[1] = cx{1e-4, 0.0};
  CHECK(model.add_generator(0, c));
}

TEST_CASE("model length is the worst base point generator count") {
  const GridConfig cfg = make_config(3, 4, 1, 1, 1.0);
  SisModel model = SisModel::empty(cfg, ModelClass::extra_invariant);
  CHECK(model_length(model) == 0);
  FiberVector e0(cfg.fiber_len());
  e0.fiber[1] = cx{1.0, 0.0};
  FiberVector e1(cfg.fiber_len());
  e1.fiber[2] = cx{1.0, 0.0};
  // one generator on band 0 at every base point: length 1
  for (int tb = 0; tb < cfg.base_points(); ++tb)
    model.add_generator(cfg.point(0, tb), e0);
  CHECK(model_length(model) == 1);
  // band 2 active at one base point only: length 2 there
  model.add_generator(cfg.point(2, 1), e1);
  CHECK(model_length(model) == 2);
  // a second vector at the same point raises the per-point dimension
  model.add_generator(cfg.point(2, 1), e0);
  CHECK(model_length(model) == 3);
  CHECK(active_bands(model, 1) == std::vector<int>{0, 2});
  CHECK(active_bands(model, 0) == std::vector<int>{0});
}

TEST_CASE("range projection of the empty model is zero") {
  TestRng rng(2505);
  const GridConfig cfg = make_config(2, 8, 2, 3, 1.0);
  const SisModel model = SisModel::empty(cfg, ModelClass::generic);
  FiberField x = FiberField::zeros(cfg);
  for (auto& v : x.values) v = random_fiber_vector(rng, cfg.fiber_len());
  CHECK(field_norm_sq(range_project(model, x)) == 0.0);
}

TEST_CASE("range projection is idempotent and fixes the span") {
  TestRng rng(2606);
  const GridConfig cfg = make_config(2, 8, 2, 3, 0.4);
  SisModel model = SisModel::empty(cfg, ModelClass::generic);
  for (int t = 0; t < cfg.points(); ++t)
    for (int i = 0; i < 2; ++i)
      model.add_generator(t, random_fiber_vector(rng, cfg.fiber_len()));
  FiberField x = FiberField::zeros(cfg);
  for (auto& v : x.values) v = random_fiber_vector(rng, cfg.fiber_len());
  const FiberField p = range_project(model, x);
  const FiberField pp = range_project(model, p);
  CHECK(max_abs_diff(pp, p) < 1e-12);
  // projecting a member of the span returns it
  FiberField member = FiberField::zeros(cfg);
  for (int t = 0; t < cfg.points(); ++t)
    member.values[t] = cx{0.3, -1.1} * model.basis[t][0] +
                       cx{-0.7, 0.2} * model.basis[t][1];
  CHECK(max_abs_diff(range_project(model, member), member) < 1e-12);
}

TEST_CASE("range projection agrees with the normal equations oracle") {
  TestRng rng(2707);
  const GridConfig cfg = make_config(2, 8, 2, 3, 0.9);
  SisModel model = SisModel::empty(cfg, ModelClass::generic);
  for (int t = 0; t < cfg.points(); ++t)
    for (int i = 0; i < 1 + t % 3; ++i)
      model.add_generator(t, random_fiber_vector(rng, cfg.fiber_len()));
  FiberField x = FiberField::zeros(cfg);
  for (auto& v : x.values) v = random_fiber_vector(rng, cfg.fiber_len());
  const FiberField p = range_project(model, x);
  for (int t = 0; t < cfg.points(); ++t) {
    const OracleProjection ora =
        oracle_project(model.basis[t], x.values[t], cfg.lambda);
    CHECK(max_abs_diff(p.values[t], ora.value) < 1e-10);
  }
}

TEST_CASE("generator signals flatten bands in order") {
  const GridConfig cfg = make_config(2, 4, 1, 1, 1.0);
  SisModel model = SisModel::empty(cfg, ModelClass::extra_invariant);
  FiberVector e0(cfg.fiber_len());
  e0.fiber[1] = cx{1.0, 0.0};
  FiberVector e1(cfg.fiber_len());
  e1.fiber[2] = cx{1.0, 0.0};
  // band 0: two slots at base point 0; band 1: one slot everywhere
  model.add_generator(cfg.point(0, 0), e0);
  model.add_generator(cfg.point(0, 0), e1);
  for (int tb = 0; tb < cfg.base_points(); ++tb)
    model.add_generator(cfg.point(1, tb), e0);
  const std::vector<FiberizedSignal> gens = generator_signals(model);
  REQUIRE(gens.size() == 3);  // band 0 slots 0,1 then band 1 slot 0
  // slot signals are masked to their band
  for (int t = 0; t < cfg.points(); ++t) {
    const bool in_band0 = cfg.band_of(t) == 0;
    double n0e = 0.0, n1e = 0.0;
    for (const cx& z : gens[0].fibers[t]) n0e += std::norm(z);
    for (const cx& z : gens[2].fibers[t]) n1e += std::norm(z);
    if (in_band0) CHECK(n1e == 0.0);
    if (!in_band0) CHECK(n0e == 0.0);
  }
}

TEST_CASE("model class tags round trip") {
  CHECK(parse_model_class(to_string(ModelClass::generic)) ==
        ModelClass::generic);
  CHECK(parse_model_class(to_string(ModelClass::extra_invariant)) ==
        ModelClass::extra_invariant);
  CHECK(parse_model_class(to_string(ModelClass::paley_wiener)) ==
        ModelClass::paley_wiener);
  CHECK_THROWS_AS(parse_model_class("fsis"), InputError);
}
