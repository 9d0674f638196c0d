#include <catch_amalgamated.hpp>

#include "test_support.hpp"
#include "xfer/errors.hpp"
#include "xfer/transfer.hpp"

using namespace xfer;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const TransferKernel& coin() {
  static const TransferKernel k = make_kernel(AtomsKernelSpec{{{0.0, 0.5}, {1.0, 0.5}}});
  return k;
}

}  // namespace

TEST_CASE("k_b examples", "[transfer]") {
  CHECK(k_b(make_kernel(DiracKernelSpec{0.3}), 1.0, 0.0) == AtomicMeasure::dirac(0.7));
  CHECK(k_b(coin(), 1.0, 1.0) == AtomicMeasure({{0, 0.25}, {1, 0.5}, {2, 0.25}}));
  CHECK(k_b(make_kernel(DensityKernelSpec{DensityFamily::uniform, 1, 1, {}, 16}), 0.0, 0.0) ==
        AtomicMeasure::dirac(0.0));
  CHECK_THROWS_AS(k_b(coin(), -1.0, 1.0), InvalidArgument);
}

TEST_CASE("k_b is a probability measure on [0, x1 + x2]", "[transfer][property]") {
  Rng rng(8);
  std::uniform_real_distribution<double> x(0.0, 4.0);
  for (int i = 0; i < 300; ++i) {
    const auto k = testing::random_kernel(rng, 6);
    const double x1 = x(rng), x2 = x(rng);
    const AtomicMeasure m = k_b(k, x1, x2);
    CHECK_THAT(m.mass(), WithinAbs(1.0, 1e-14));
    CHECK(m.max_location() <= x1 + x2);
  }
}

TEST_CASE("t_b examples", "[transfer]") {
  const auto k = make_kernel(DiracKernelSpec{0.3});
  const AtomicMeasure u({{1.0, 1.0}, {2.0, 1.0}});
  const AtomicMeasure v({{0.5, 1.0}, {1.5, 2.0}});
  CHECK_THAT(t_b(k, u, v, 100).measure.mass(), WithinRel(6.0, 1e-15));

  for (const auto& spec : {KernelSpec{DiracKernelSpec{0.4}}, KernelSpec{AtomsKernelSpec{{{0.0, 0.5}, {1.0, 0.5}}}}}) {
    CHECK(t_b(make_kernel(spec), AtomicMeasure::dirac(0.0), AtomicMeasure::dirac(0.0), 10).measure ==
          AtomicMeasure::dirac(0.0));
  }

  const AtomicMeasure r = t_b(coin(), AtomicMeasure::dirac(1.0), AtomicMeasure::dirac(1.0), 10).measure;
  CHECK(moment(r, 1) == 1.0);
  CHECK(moment(r, 2) == 1.5);
}

TEST_CASE("predicted moments examples", "[transfer]") {
  const auto p = predicted_moments(make_kernel(DiracKernelSpec{0.3}), AtomicMeasure::dirac(1.0),
                                   AtomicMeasure::dirac(1.0));
  CHECK(p.m0 == 1.0);
  CHECK_THAT(p.m1, WithinAbs(1.0, 1e-15));
  CHECK_THAT(p.m2, WithinAbs(1.0, 1e-15));

  const auto z = predicted_moments(coin(), AtomicMeasure::dirac(0.0, 2.0), AtomicMeasure::dirac(0.0, 2.0));
  CHECK(z.m0 == 4.0);
  CHECK(z.m1 == 0.0);
  CHECK(z.m2 == 0.0);

  CHECK(predicted_moments(coin(), AtomicMeasure::dirac(1.0), AtomicMeasure::dirac(1.0)).m2 == 1.5);
}

TEST_CASE("moments of the exact product match the closed form", "[transfer][property]") {
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const auto k = testing::random_kernel(rng, 8);
    const AtomicMeasure u = testing::random_measure(rng, 8, 5.0, true);
    const AtomicMeasure v = testing::random_measure(rng, 8, 5.0, true);
    const AtomicMeasure r = t_b_exact(k, u, v);
    const auto p = predicted_moments(k, u, v);
    CHECK_THAT(moment(r, 0), WithinRel(p.m0, 1e-10));
    if (p.m1 > 0.0) CHECK_THAT(moment(r, 1), WithinRel(p.m1, 1e-10));
    if (p.m2 > 0.0) CHECK_THAT(moment(r, 2), WithinRel(p.m2, 1e-10));
  }
}

TEST_CASE("structural identities of t_b", "[transfer][property]") {
  Rng rng(77);
  for (int i = 0; i < 300; ++i) {
    const auto k = testing::random_kernel(rng, 5);
    const AtomicMeasure u = testing::random_measure(rng, 7, 3.0, true);
    const AtomicMeasure v = testing::random_measure(rng, 7, 3.0, true);
    const AtomicMeasure r = t_b_exact(k, u, v);

    // support bound
    CHECK(r.max_location() <= u.max_location() + v.max_location());

    // symmetrized mean conservation
    CHECK_THAT(moment(t_b_exact(k, u, u), 1), WithinRel(moment(u, 0) * moment(u, 1), 1e-12));

    // bilinearity; scaling by 2 is exact in binary
    CHECK(t_b_exact(k, u.scaled(2.0), v) == r.scaled(2.0));
    const AtomicMeasure r3 = t_b_exact(k, u.scaled(0.3), v);
    const AtomicMeasure r3ref = r.scaled(0.3);
    REQUIRE(r3.size() == r3ref.size());
    for (std::size_t j = 0; j < r3.size(); ++j) {
      CHECK(r3.atoms()[j].location == r3ref.atoms()[j].location);
      CHECK_THAT(r3.atoms()[j].weight, WithinRel(r3ref.atoms()[j].weight, 1e-13));
    }

    // Dirac inputs reduce to k_b
    std::uniform_real_distribution<double> x(0.0, 3.0);
    const double x1 = x(rng), x2 = x(rng);
    CHECK(t_b(k, AtomicMeasure::dirac(x1), AtomicMeasure::dirac(x2), 1000).measure == k_b(k, x1, x2));
  }
}

TEST_CASE("identity kernel returns its input", "[transfer]") {
  Rng rng(4);
  const auto id = make_kernel(DiracKernelSpec{0.0});
  for (int i = 0; i < 200; ++i) {
    const AtomicMeasure raw = testing::random_measure(rng, 10, 4.0, true);
    const AtomicMeasure u = raw.scaled(1.0 / raw.mass());
    const AtomicMeasure r = t_b_exact(id, u, u);
    REQUIRE(r.size() == u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
      CHECK(r.atoms()[j].location == u.atoms()[j].location);
      CHECK_THAT(r.atoms()[j].weight, WithinRel(u.atoms()[j].weight, 1e-13));
    }
  }
}

TEST_CASE("capacity and compression of the product", "[transfer]") {
  const auto k = make_kernel(DensityKernelSpec{DensityFamily::uniform, 1, 1, {}, 32});
  const AtomicMeasure u = AtomicMeasure::uniform_cells(0.0, 1.0, 32);
  TransferOptions small;
  small.hard_cap = 1000;
  CHECK_THROWS_AS(t_b(k, u, u, 64, small), CapacityError);
  CHECK_THROWS_AS(t_b_exact(k, u, u, 1000), CapacityError);

  const AtomicMeasure exact = t_b_exact(k, u, u);
  const auto [c, rep] = t_b(k, u, u, 64);
  CHECK(c.size() <= 64);
  CHECK_THAT(c.mass(), WithinRel(exact.mass(), 1e-12));
  CHECK_THAT(moment(c, 1), WithinRel(moment(exact, 1), 1e-12));
  CHECK(w1_distance(c, exact) <= rep.w1_error_bound * (1 + 1e-9));

  TransferOptions factored;
  factored.factor_atoms = 100;
  const auto [f, frep] = t_b(k, u, u, 64, factored);
  CHECK(f.size() <= 64);
  CHECK_THAT(f.mass(), WithinRel(exact.mass(), 1e-12));
  CHECK_THAT(moment(f, 1), WithinRel(moment(exact, 1), 1e-12));
  CHECK(w1_distance(f, exact) <= frep.w1_error_bound * (1 + 1e-9));
}

TEST_CASE("partitioned enumeration is deterministic", "[transfer]") {
  Rng rng(12);
  const auto k = testing::random_kernel(rng, 6);
  const AtomicMeasure u = testing::random_measure(rng, 60, 3.0);
  TransferOptions opts;
  opts.partitions = 4;
  const auto a = t_b(k, u, u, 1'000'000, opts).measure;
  const auto b = t_b(k, u, u, 1'000'000, opts).measure;
  CHECK(a == b);
  const auto serial = t_b(k, u, u, 1'000'000).measure;
  REQUIRE(a.size() == serial.size());
  CHECK(tv_distance(a, serial) < 1e-14);
}

TEST_CASE("Monte Carlo estimator", "[transfer][mc]") {
  Rng rng(2);
  const auto dk = make_kernel(DiracKernelSpec{0.37});
  CHECK(t_b_mc(dk, AtomicMeasure::dirac(1.0), AtomicMeasure::dirac(1.0), 50, rng) ==
        AtomicMeasure::dirac(1.0));

  const AtomicMeasure u({{1.0, 2.0}, {3.0, 1.0}});
  const AtomicMeasure v({{0.5, 0.5}, {2.0, 1.5}});
  const AtomicMeasure est = t_b_mc(coin(), u, v, 10'000, rng);
  CHECK_THAT(est.mass(), WithinRel(6.0, 1e-14));

  const AtomicMeasure exact = t_b_exact(coin(), AtomicMeasure::dirac(1.0), AtomicMeasure::dirac(1.0));
  const AtomicMeasure big = t_b_mc(coin(), AtomicMeasure::dirac(1.0), AtomicMeasure::dirac(1.0), 100'000, rng);
  CHECK(w1_distance(big, exact) <= 0.02);

  CHECK_THROWS_AS(t_b_mc(coin(), AtomicMeasure{}, v, 10, rng), EmptyMeasure);
}
