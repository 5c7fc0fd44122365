#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "subkernel/quadrature.hpp"

using namespace subkernel;

TEST_CASE("polynomial integrates exactly", "[quadrature]") {
  const auto r = quad::integrate([](double x) { return x * x; }, 0.0, 1.0, {});
  CHECK(r.value == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(r.error <= 1e-12);
}

TEST_CASE("decaying exponential over a wide interval", "[quadrature]") {
  const auto r = quad::integrate([](double x) { return std::exp(-x); }, 0.0, 60.0, {});
  CHECK(r.value == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kink handled via split point", "[quadrature]") {
  auto f = [](double x) { return std::abs(x - 0.3); };
  const auto with_split = quad::integrate(f, 0.0, 1.0, {0.3});
  // int_0^1 |x - 0.3| dx = 0.3^2/2 + 0.7^2/2
  const double exact = 0.5 * (0.09 + 0.49);
  CHECK(with_split.value == Catch::Approx(exact).epsilon(1e-13));
  const auto without = quad::integrate(f, 0.0, 1.0, {});
  CHECK(without.value == Catch::Approx(exact).epsilon(1e-10));
}

TEST_CASE("relative tolerance controls large values", "[quadrature]") {
  quad::Settings s;
  s.abs_tol = 1e-300;  // force the relative criterion
  s.rel_tol = 1e-10;
  const auto r =
      quad::integrate([](double x) { return 1e12 * std::cos(x); }, 0.0, 1.0, {}, s);
  CHECK(r.value == Catch::Approx(1e12 * std::sin(1.0)).epsilon(1e-12));
}

TEST_CASE("budget exhaustion reports a numerical failure", "[quadrature]") {
  quad::Settings s;
  s.abs_tol = 1e-300;
  s.rel_tol = 1e-300;
  s.max_subdivisions = 8;
  auto nasty = [](double x) { return std::sqrt(std::abs(x - 0.21)); };
  CHECK_THROWS_AS(quad::integrate(nasty, 0.0, 1.0, {}, s), NumericalError);
}

TEST_CASE("empty interval integrates to zero", "[quadrature]") {
  const auto r = quad::integrate([](double) { return 1.0; }, 1.0, 1.0, {});
  CHECK(r.value == 0.0);
}
