#include <catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"
#include "xfer/errors.hpp"
#include "xfer/oracles.hpp"
#include "xfer/transfer.hpp"

using namespace xfer;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("enumeration oracle examples", "[oracles]") {
  const auto coin = make_kernel(AtomsKernelSpec{{{0.0, 0.5}, {1.0, 0.5}}});
  CHECK(oracles::enumerate_t_b(coin, AtomicMeasure::dirac(1.0), AtomicMeasure::dirac(1.0)) ==
        AtomicMeasure({{0, 0.25}, {1, 0.5}, {2, 0.25}}));

  Rng rng(3);
  const auto id = make_kernel(DiracKernelSpec{0.0});
  for (int i = 0; i < 100; ++i) {
    const AtomicMeasure u = testing::random_measure(rng, 10);
    const AtomicMeasure vraw = testing::random_measure(rng, 10);
    const AtomicMeasure v = vraw.scaled(1.0 / vraw.mass());
    const AtomicMeasure r = oracles::enumerate_t_b(id, u, v);
    REQUIRE(r.size() == u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
      CHECK(r.atoms()[j].location == u.atoms()[j].location);
      CHECK_THAT(r.atoms()[j].weight, WithinRel(u.atoms()[j].weight, 1e-13));
    }
  }

  const auto k = make_kernel(DensityKernelSpec{DensityFamily::uniform, 1, 1, {}, 100});
  const AtomicMeasure big = AtomicMeasure::uniform_cells(0, 1, 11);
  CHECK_THROWS_AS(oracles::enumerate_t_b(k, big, big), CapacityError);
}

TEST_CASE("enumeration oracle agrees exactly with t_b", "[oracles][property]") {
  Rng rng(1001);
  for (int i = 0; i < 1000; ++i) {
    const auto k = testing::random_kernel(rng, 6);
    const AtomicMeasure u = testing::random_measure(rng, 8, 4.0, true);
    const AtomicMeasure v = testing::random_measure(rng, 8, 4.0, true);
    CHECK(tv_distance(t_b_exact(k, u, v), oracles::enumerate_t_b(k, u, v)) == 0.0);
  }
}

TEST_CASE("moment ODE", "[oracles][ode]") {
  const auto k = make_kernel(DiracKernelSpec{0.3});
  const auto states = oracles::moment_ode_solve(k, 1.0, 2.0, 5.0, -1.0, 5.0, 1e-3);
  REQUIRE(states.size() == 5001);
  for (const auto& s : states) {
    CHECK(s.m0 == 1.0);
    CHECK(s.m1 == 2.0);
  }
  CHECK_THAT(states.back().t, WithinAbs(5.0, 1e-12));
  CHECK_THAT(states.back().variance(), WithinRel(std::exp(-2.1), 1e-9));
  CHECK_THAT(states.back().variance(), WithinAbs(0.122456, 5e-7));

  const auto coin = make_kernel(AtomsKernelSpec{{{0.0, 0.5}, {1.0, 0.5}}});
  const auto grow = oracles::moment_ode_solve(coin, 1.0, 2.0, 4.5, -1.0, 3.0, 1e-2);
  for (std::size_t i = 1; i < grow.size(); ++i) CHECK(grow[i].variance() >= grow[i - 1].variance());

  const auto up = oracles::moment_ode_solve(k, 2.0, 1.0, 1.0, 0.5, 1.0, 1e-3);
  CHECK_THAT(up.back().m0, WithinRel(2.0 * std::exp(1.5), 1e-10));

  CHECK_THROWS_AS(oracles::moment_ode_solve(k, 0.0, 0.0, 0.0, -1.0, 1.0, 0.1), InvalidArgument);
}
