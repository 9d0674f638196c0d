#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "test_support.hpp"
#include "xfer/errors.hpp"
#include "xfer/kernel.hpp"

using namespace xfer;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("dirac and two-point kernels", "[kernels]") {
  const auto d = make_kernel(DiracKernelSpec{0.3});
  REQUIRE(d.atoms.size() == 1);
  CHECK(d.atoms.atoms()[0] == Atom{0.3, 1.0});
  CHECK(d.lambda1 == 0.3);
  CHECK_THAT(d.lambda2, WithinAbs(0.09, 1e-17));

  const auto two = make_kernel(AtomsKernelSpec{{{0.0, 0.5}, {1.0, 0.5}}});
  CHECK(two.lambda1 == 0.5);
  CHECK(two.lambda2 == 0.5);
  CHECK(two.mass_at_0 == 0.5);
  CHECK(two.mass_at_1 == 0.5);
}

TEST_CASE("uniform density kernel moments", "[kernels]") {
  const auto k = make_kernel(DensityKernelSpec{DensityFamily::uniform, 1, 1, {}, 512});
  CHECK(k.atoms.size() == 512);
  CHECK_THAT(k.lambda1, WithinAbs(0.5, 1e-6));
  CHECK_THAT(k.lambda2, WithinAbs(1.0 / 3.0, 1e-4));
  // Midpoint rule error for z^2 on N cells is exactly 1/(12 N^2).
  CHECK_THAT(1.0 / 3.0 - k.lambda2, WithinRel(1.0 / (12.0 * 512.0 * 512.0), 1e-6));
  CHECK(k.mass_at_0 == 0.0);
  CHECK(k.mass_at_1 == 0.0);
}

TEST_CASE("kernel invariants", "[kernels][property]") {
  std::vector<KernelSpec> specs = {
      DiracKernelSpec{0.0},
      DiracKernelSpec{1.0},
      DiracKernelSpec{0.42},
      AtomsKernelSpec{{{0.0, 0.25}, {0.5, 0.5}, {1.0, 0.25}}},
      DensityKernelSpec{DensityFamily::uniform, 1, 1, {}, 64},
      DensityKernelSpec{DensityFamily::beta, 2.0, 5.0, {}, 128},
      DensityKernelSpec{DensityFamily::beta, 0.5, 0.5, {}, 128},
      DensityKernelSpec{DensityFamily::table, 1, 1, {{0.0, 0.0}, {0.5, 2.0}, {1.0, 0.0}}, 100},
  };
  Rng rng(3);
  for (int i = 0; i < 50; ++i) specs.push_back(testing::random_kernel(rng, 6).spec);
  for (const auto& s : specs) {
    const auto k = make_kernel(s);
    CHECK_THAT(k.atoms.mass(), WithinAbs(1.0, 1e-12));
    CHECK(k.atoms.max_location() <= 1.0);
    CHECK(k.lambda2 <= k.lambda1);
    CHECK(k.lambda1 * k.lambda1 <= k.lambda2 + 1e-15);
  }
}

TEST_CASE("quadrature refinement", "[kernels]") {
  // Analytic moments: uniform lambda2 = 1/3; beta(a,b) lambda1 = a/(a+b).
  double prev_uniform = 1.0;
  double prev_beta = 1.0;
  for (std::size_t n : {16u, 32u, 64u, 128u, 256u}) {
    const auto u = make_kernel(DensityKernelSpec{DensityFamily::uniform, 1, 1, {}, n});
    const auto b = make_kernel(DensityKernelSpec{DensityFamily::beta, 2.0, 5.0, {}, n});
    const double eu = std::abs(u.lambda2 - 1.0 / 3.0);
    const double eb = std::abs(b.lambda1 - 2.0 / 7.0);
    CHECK(eu <= 0.5 * prev_uniform);
    CHECK(eb <= 0.5 * prev_beta);
    CHECK(std::abs(u.lambda1 - 0.5) < 1e-14);
    prev_uniform = eu;
    prev_beta = eb;
  }
}

TEST_CASE("beta cell weights match numerical integration of the density", "[kernels]") {
  const double a = 2.5, b = 1.5;
  const auto k = make_kernel(DensityKernelSpec{DensityFamily::beta, a, b, {}, 8});
  const double norm = boost::math::beta(a, b);
  for (std::size_t c = 0; c < 8; ++c) {
    const double lo = c / 8.0, hi = (c + 1) / 8.0;
    const double w = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double z) { return std::pow(z, a - 1) * std::pow(1 - z, b - 1) / norm; }, lo, hi);
    CHECK_THAT(k.atoms.atoms()[c].weight, WithinAbs(w, 1e-12));
  }
}

TEST_CASE("invalid kernel specs", "[kernels]") {
  CHECK_THROWS_AS(make_kernel(DiracKernelSpec{1.2}), InvalidSpec);
  CHECK_THROWS_AS(make_kernel(DiracKernelSpec{-0.1}), InvalidSpec);
  CHECK_THROWS_AS(make_kernel(AtomsKernelSpec{{{0.5, 0.7}}}), InvalidSpec);
  CHECK_THROWS_AS(make_kernel(AtomsKernelSpec{{{1.5, 1.0}}}), InvalidSpec);
  CHECK_THROWS_AS(
      make_kernel(DensityKernelSpec{DensityFamily::table, 1, 1, {{0, 1}, {1, -1}}, 16}),
      InvalidSpec);
  CHECK_THROWS_AS(
      make_kernel(DensityKernelSpec{DensityFamily::table, 1, 1, {{0, 0}, {1, 0}}, 16}),
      InvalidSpec);
  CHECK_THROWS_AS(make_kernel(DensityKernelSpec{DensityFamily::beta, -1, 1, {}, 16}), InvalidSpec);
}

TEST_CASE("kernel sampling", "[kernels]") {
  Rng rng(17);
  const auto d = make_kernel(DiracKernelSpec{0.3});
  for (int i = 0; i < 100; ++i) CHECK(kernel_sample(d, rng) == 0.3);

  const auto two = make_kernel(AtomsKernelSpec{{{0.0, 0.5}, {1.0, 0.5}}});
  double sum = 0.0;
  for (int i = 0; i < 1'000'000; ++i) sum += kernel_sample(two, rng);
  CHECK_THAT(sum / 1e6, WithinAbs(0.5, 0.002));

  const auto beta = make_kernel(DensityKernelSpec{DensityFamily::beta, 0.5, 0.5, {}, 64});
  for (int i = 0; i < 10'000; ++i) {
    const double z = kernel_sample(beta, rng);
    CHECK((z >= 0.0 && z <= 1.0));
  }
}

TEST_CASE("kernel spec JSON", "[kernels][io]") {
  const auto j = nlohmann::json::parse(R"({"type":"atoms","atoms":[[0,0.25],[0.5,0.5],[1,0.25]]})");
  const auto k = make_kernel(kernel_spec_from_json(j));
  CHECK(k.atoms.size() == 3);
  CHECK(k.lambda1 == 0.5);

  const auto u = make_kernel(
      kernel_spec_from_json(nlohmann::json::parse(R"({"type":"density","name":"uniform","nodes":512})")));
  CHECK(u.atoms.size() == 512);

  for (const char* text : {R"({"type":"dirac","p":0.3})", R"({"type":"density","name":"beta","a":2,"b":3,"nodes":40})"}) {
    const auto spec = kernel_spec_from_json(nlohmann::json::parse(text));
    CHECK(kernel_spec_to_json(spec) == kernel_spec_to_json(kernel_spec_from_json(kernel_spec_to_json(spec))));
  }
  CHECK_THROWS_AS(kernel_spec_from_json(nlohmann::json::parse(R"({"type":"gamma"})")), InvalidSpec);
  CHECK_THROWS_AS(kernel_spec_from_json(nlohmann::json::parse(R"({"p":0.3})")), InvalidSpec);
}
