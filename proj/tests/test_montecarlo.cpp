#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "subkernel/montecarlo.hpp"

using namespace subkernel;

namespace {

LevySpec stable_half() { return LevySpec(ScaleSpec::power(2.0), ScaleSpec::power(1.0)); }

LevySpec two_regime() {
  return LevySpec(ScaleSpec::power(2.0), ScaleSpec::piecewise_power(1.0, 4.0));
}

// Fast-decaying tail (rho_inf = 5) so the second moment is finite.
LevySpec light_tail() {
  return LevySpec(ScaleSpec::power(1.0), ScaleSpec::piecewise_power(0.5, 5.0));
}

// Simpson in log t for int_a^b mu(t) dt with mu rebuilt from pow().
double mass_between(const LevySpec& levy, double a, double b, int n = 20000) {
  auto f = [&](double u) {
    const double t = std::exp(u);
    return 1.0 / levy.psi().eval(levy.phi().inverse(t));
  };
  const double lo = std::log(a), hi = std::log(b);
  const double h = (hi - lo) / n;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) sum += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("jump rate and compensator closed forms", "[montecarlo]") {
  // mu = t^{-3/2}: Lambda(eps) = 2/sqrt(eps), m(eps) = 2 sqrt(eps).
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const SubordinatorSampler s(stable_half(), eps, 1);
    CHECK(s.jump_rate() == Catch::Approx(2.0 / std::sqrt(eps)).epsilon(1e-9));
    CHECK(s.compensator_mean() == Catch::Approx(2.0 * std::sqrt(eps)).epsilon(1e-9));
    CHECK(s.small_jump_second_moment() ==
          Catch::Approx(2.0 / 3.0 * std::pow(eps, 1.5)).epsilon(1e-9));
  }
  // Lambda decreasing in eps, m decreasing to 0.
  const SubordinatorSampler a(stable_half(), 1e-2, 1), b(stable_half(), 1e-4, 1);
  CHECK(a.jump_rate() < b.jump_rate());
  CHECK(a.compensator_mean() > b.compensator_mean());
}

TEST_CASE("construction guards", "[montecarlo]") {
  CHECK_THROWS_AS(SubordinatorSampler(LevySpec(ScaleSpec::power(1.0), ScaleSpec::power(1.0)),
                                      1e-4, 1),
                  DivergenceError);
  CHECK_THROWS_AS(SubordinatorSampler(stable_half(), -1.0, 1), std::invalid_argument);

  // Cost guard: Lambda(1e-16) = 2e8, so one unit of time exceeds the budget.
  const SubordinatorSampler tiny(stable_half(), 1e-16, 1);
  CHECK_THROWS_AS(tiny.sample_paths(1.0, 10), std::invalid_argument);
  CHECK_NOTHROW(tiny.sample_paths(1e-9, 10));
}

TEST_CASE("deterministic given the seed", "[montecarlo]") {
  const SubordinatorSampler s1(stable_half(), 1e-3, 20260809), s2(stable_half(), 1e-3, 20260809);
  const auto a = s1.sample_paths(1.0, 500);
  const auto b = s2.sample_paths(1.0, 500);
  CHECK(a == b);  // bit-identical

  const SubordinatorSampler other(stable_half(), 1e-3, 7);
  CHECK(other.sample_paths(1.0, 500) != a);
}

TEST_CASE("samples are nonnegative and zero at T = 0", "[montecarlo]") {
  const SubordinatorSampler s(stable_half(), 1e-3, 3);
  for (double v : s.sample_paths(0.0, 50)) CHECK(v == 0.0);
  const double drift = s.compensator_mean() * 0.5;
  for (double v : s.sample_paths(0.5, 200)) CHECK(v >= drift);
}

TEST_CASE("log-Laplace doubles with the horizon", "[montecarlo]") {
  const SubordinatorSampler s(stable_half(), 1e-3, 11);
  const int n = 40000;
  const double lambda = 1.0;
  auto log_laplace = [&](double T) {
    const auto samples = s.sample_paths(T, n);
    double mean = 0.0;
    for (double x : samples) mean += std::exp(-lambda * x);
    return -std::log(mean / n);
  };
  const double l1 = log_laplace(1.0);
  const double l2 = log_laplace(2.0);
  CHECK(l2 == Catch::Approx(2.0 * l1).epsilon(0.05));
}

TEST_CASE("inverse CDF round trip", "[montecarlo]") {
  for (const LevySpec& levy : {stable_half(), two_regime()}) {
    const SubordinatorSampler s(levy, 1e-3, 1);
    for (double q : {0.001, 0.1, 0.5, 0.9, 0.999}) {
      const double x = s.quantile(q);
      CHECK(x >= 1e-3 * (1 - 1e-12));
      CHECK(mass_between(levy, 1e-3, x) ==
            Catch::Approx(q * s.jump_rate()).epsilon(1e-5));
    }
    CHECK(s.quantile(0.0) == Catch::Approx(1e-3).epsilon(1e-12));
    CHECK_THROWS_AS(s.quantile(1.0), std::domain_error);
  }
}

TEST_CASE("laplace validation passes", "[montecarlo]") {
  const SubordinatorSampler s(stable_half(), 1e-4, 20260809);
  const auto rep = s.validate_laplace(1.0, {0.0, 0.5, 1.0, 2.0}, 10000);
  CHECK(rep.all_pass);
  CHECK(rep.rows[0].empirical == 1.0);
  CHECK(rep.rows[0].expected == 1.0);
  CHECK(rep.rows[0].z_score == 0.0);
  for (const auto& row : rep.rows) {
    CHECK(row.z_score <= 4.0);
    if (row.lambda > 0.0) CHECK(row.bias_bound > 0.0);
  }
  CHECK_THROWS_AS(s.validate_laplace(1.0, {1.0}, 1), std::invalid_argument);
}

TEST_CASE("empirical transform matches the untruncated exponent", "[montecarlo]") {
  // With eps = 1e-4 the truncation bias lambda^2/2 int_0^eps t^2 mu is ~3e-7,
  // far below the Monte Carlo standard error, so the sample mean of
  // exp(-S_T) sits within 3 standard errors of exp(-phibar(1)).
  const SubordinatorSampler s(stable_half(), 1e-4, 20260809);
  const auto samples = s.sample_paths(1.0, 100000);
  double mean = 0.0;
  for (double x : samples) mean += std::exp(-x);
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double x : samples) {
    const double d = std::exp(-x) - mean;
    var += d * d;
  }
  const double se = std::sqrt(var / samples.size() / (samples.size() - 1.0));
  const double expected = std::exp(-2.0 * std::sqrt(std::acos(-1.0)));
  CHECK(std::abs(mean - expected) <= 3.0 * se);
}

TEST_CASE("laplace validation on the two-regime spec", "[montecarlo]") {
  const SubordinatorSampler s(two_regime(), 1e-4, 5);
  const auto rep = s.validate_laplace(1.0, {1.0}, 10000);
  CHECK(rep.all_pass);
}

TEST_CASE("halving the cutoff stays within the bias bound", "[montecarlo]") {
  const double eps = 1e-3;
  const SubordinatorSampler coarse(stable_half(), eps, 1), fine(stable_half(), eps / 2, 1);
  const BernsteinFunction phibar(stable_half());
  for (double lambda : {0.5, 1.0, 2.0}) {
    const double coarse_exponent =
        phibar.eval_tail(lambda, eps) + lambda * coarse.compensator_mean();
    const double fine_exponent =
        phibar.eval_tail(lambda, eps / 2) + lambda * fine.compensator_mean();
    const double bias = 0.5 * lambda * lambda * coarse.small_jump_second_moment();
    CHECK(std::abs(coarse_exponent - fine_exponent) <= bias);
    // Both stay within the bound of the un-truncated exponent as well.
    CHECK(std::abs(phibar.eval(lambda) - coarse_exponent) <= bias);
  }
}

TEST_CASE("second moment of the truncated law", "[montecarlo]") {
  const SubordinatorSampler s(light_tail(), 1e-4, 99);
  const double T = 1.0;
  const double expected_var = T * s.truncated_second_moment();
  REQUIRE(std::isfinite(expected_var));

  const int n = 20000;
  const auto samples = s.sample_paths(T, n);
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  const double se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  CHECK(std::abs(m2 - expected_var) <= 5.0 * se);

  // Heavy tails (rho_inf <= 2) have no finite second moment.
  CHECK(std::isinf(SubordinatorSampler(stable_half(), 1e-4, 1).truncated_second_moment()));
}
