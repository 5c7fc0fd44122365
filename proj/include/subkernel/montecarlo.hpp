#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "subkernel/bernstein.hpp"
#include "subkernel/quadrature.hpp"

namespace subkernel {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Per-path stream: mt19937_64 seeded with
/// splitmix64(seed XOR 0x9E3779B97F4A7C15 * (path_index + 1)).
/// Uniform doubles come from the top 53 bits, so samples are bit-identical
/// across platforms and independent of how many paths run concurrently.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path_index)
      : engine_(splitmix64(seed ^ (0x9E3779B97F4A7C15ull * (path_index + 1)))) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Poisson draw from uniforms only (std::poisson_distribution is not
/// reproducible across standard libraries). Exponential inter-arrival
/// counting for small means, Hormann's PTRS transformed rejection above.
inline std::uint64_t poisson_draw(PathRng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < 50.0) {
    double acc = 0.0;
    std::uint64_t k = 0;
    while (true) {
      acc += -std::log1p(-rng.uniform());
      if (acc >= mean) return k;
      ++k;
    }
  }
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  while (true) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_mean - mean - std::lgamma(k + 1.0))
      return static_cast<std::uint64_t>(k);
  }
}

}  // namespace detail

struct LaplaceValidationRow {
  double lambda = 0.0;
  double empirical = 0.0;
  double expected = 0.0;
  double std_error = 0.0;
  double z_score = 0.0;
  double bias_bound = 0.0;  // |phibar - phibar_eps - lambda m(eps)| <= lambda^2/2 int_0^eps t^2 mu
  bool pass = true;
};

struct LaplaceValidationReport {
  double horizon = 0.0;
  double epsilon = 0.0;
  int n_paths = 0;
  std::uint64_t seed = 0;
  double jump_rate = 0.0;
  double compensator_mean = 0.0;
  std::vector<LaplaceValidationRow> rows;
  bool all_pass = true;
  double max_abs_z = 0.0;
};

/// Compound-Poisson approximation of the driftless subordinator with Levy
/// density mu(t) = 1/(t psi(phi^-1(t))): jumps below the cutoff epsilon are
/// replaced by their mean as deterministic drift, jumps above arrive at
/// rate Lambda(eps) = int_eps^inf mu and are drawn by inverse CDF over
/// log-spaced knots (512 per decade, kinks snapped onto knots) with exact
/// power-law interpolation, plus an exact analytic power tail.
class SubordinatorSampler {
 public:
  SubordinatorSampler(LevySpec levy, double epsilon, std::uint64_t seed,
                      quad::Settings settings = {})
      : levy_(std::move(levy)), epsilon_(epsilon), seed_(seed), settings_(settings) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw std::invalid_argument("SubordinatorSampler: epsilon must be positive");
    const IntegrabilityCertificate cert = check_levy_integrability(levy_, settings_);
    if (cert.verdict == Finiteness::infinite)
      throw DivergenceError("SubordinatorSampler: subordinator does not exist; " + cert.detail,
                            cert);
    tabulate();
    compensator_mean_ = moment_below(1.0);
    small_jump_second_moment_ = moment_below(2.0);
  }

  const LevySpec& levy() const { return levy_; }
  double epsilon() const { return epsilon_; }
  std::uint64_t seed() const { return seed_; }
  double jump_rate() const { return jump_rate_; }
  double compensator_mean() const { return compensator_mean_; }
  double small_jump_second_moment() const { return small_jump_second_moment_; }

  /// int_eps^inf t^2 mu(t) dt; infinite unless the decay exponent at
  /// infinity exceeds 2.
  double truncated_second_moment() const {
    if (levy_.rho_inf() <= 2.0 + 1e-12) return std::numeric_limits<double>::infinity();
    auto f = [&](double u) { return std::exp(2.0 * u - levy_.log_h(u)); };
    const double lo = std::log(epsilon_);
    double hi = lo;
    for (double k : levy_.time_kinks()) hi = std::max(hi, std::log(k));
    hi += 45.0 / (levy_.rho_inf() - 2.0);
    return detail::integrate_log_axis(levy_, f, lo, std::min(hi, 700.0), settings_).value;
  }

  /// Inverse CDF of the normalized jump law on (eps, inf).
  double quantile(double p) const {
    if (!(p >= 0.0) || !(p < 1.0))
      throw std::domain_error("SubordinatorSampler::quantile: p must be in [0,1)");
    const double target = p * jump_rate_;
    std::size_t lo = 0, hi = segments_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (segments_[mid].cum <= target)
        lo = mid;
      else
        hi = mid - 1;
    }
    const Segment& s = segments_[lo];
    const double residual = target - s.cum;
    const double w = s.q * residual * std::exp(s.log_h_a);
    if (std::isfinite(s.width)) {
      const double w_max = -std::expm1(-s.q * s.width);
      if (w >= w_max) return std::exp(s.log_a + s.width);
      return std::exp(s.log_a - std::log1p(-w) / s.q);
    }
    return std::exp(s.log_a - std::log1p(-std::min(w, 1.0 - 1e-16)) / s.q);
  }

  /// One terminal value S_T for the given path index:
  /// drift m(eps) T plus Poisson(Lambda(eps) T)-many inverse-CDF jumps.
  double sample_terminal(double T, std::uint64_t path_index) const {
    check_horizon(T);
    if (T == 0.0) return 0.0;
    detail::PathRng rng(seed_, path_index);
    const std::uint64_t n = detail::poisson_draw(rng, jump_rate_ * T);
    double s = compensator_mean_ * T;
    for (std::uint64_t i = 0; i < n; ++i) s += quantile(rng.uniform());
    return s;
  }

  std::vector<double> sample_paths(double T, int n_paths) const {
    check_horizon(T);
    if (n_paths < 0) throw std::invalid_argument("sample_paths: negative path count");
    std::vector<double> out(static_cast<std::size_t>(n_paths));
    for (int k = 0; k < n_paths; ++k)
      out[static_cast<std::size_t>(k)] = sample_terminal(T, static_cast<std::uint64_t>(k));
    return out;
  }

  /// Compares the empirical Laplace transform of S_T against
  /// exp(-T (phibar_eps(lambda) + lambda m(eps))), which is exact for the
  /// truncated-plus-compensated law; disagreement is purely statistical.
  LaplaceValidationReport validate_laplace(double T, const std::vector<double>& lambdas,
                                           int n_paths) const {
    if (n_paths < 2) throw std::invalid_argument("validate_laplace: need at least 2 paths");
    const std::vector<double> samples = sample_paths(T, n_paths);
    const BernsteinFunction phibar(levy_, settings_);

    LaplaceValidationReport rep;
    rep.horizon = T;
    rep.epsilon = epsilon_;
    rep.n_paths = n_paths;
    rep.seed = seed_;
    rep.jump_rate = jump_rate_;
    rep.compensator_mean = compensator_mean_;
    for (double lambda : lambdas) {
      LaplaceValidationRow row;
      row.lambda = lambda;
      if (lambda == 0.0) {
        row.empirical = 1.0;
        row.expected = 1.0;
      } else {
        if (!(lambda > 0.0))
          throw std::domain_error("validate_laplace: lambda must be nonnegative");
        double mean = 0.0;
        for (double s : samples) mean += std::exp(-lambda * s);
        mean /= static_cast<double>(n_paths);
        double var = 0.0;
        for (double s : samples) {
          const double d = std::exp(-lambda * s) - mean;
          var += d * d;
        }
        var /= static_cast<double>(n_paths - 1);
        row.empirical = mean;
        row.expected =
            std::exp(-T * (phibar.eval_tail(lambda, epsilon_) + lambda * compensator_mean_));
        row.std_error = std::sqrt(var / static_cast<double>(n_paths));
        row.z_score = row.std_error > 0.0
                          ? std::abs(mean - row.expected) / row.std_error
                          : (mean == row.expected ? 0.0
                                                  : std::numeric_limits<double>::infinity());
        row.bias_bound = 0.5 * lambda * lambda * small_jump_second_moment_;
      }
      row.pass = row.z_score <= 4.0;
      rep.all_pass = rep.all_pass && row.pass;
      rep.max_abs_z = std::max(rep.max_abs_z, row.z_score);
      rep.rows.push_back(row);
    }
    return rep;
  }

 private:
  // One inverse-CDF segment [a, a e^width) on which mu is exactly
  // c t^{-1-q}; `cum` is the jump mass strictly below a and log_h_a is
  // log psi(phi^-1(a)) (so e^{-log_h_a} = a mu(a)). The last segment has
  // infinite width: the exact analytic power tail.
  struct Segment {
    double log_a;
    double width;
    double q;
    double log_h_a;
    double mass;
    double cum;
  };

  void tabulate() {
    const double log_eps = std::log(epsilon_);
    double last_kink = -std::numeric_limits<double>::infinity();
    std::vector<double> kink_logs;
    for (double k : levy_.time_kinks()) {
      const double lk = std::log(k);
      last_kink = std::max(last_kink, lk);
      if (lk > log_eps) kink_logs.push_back(lk);
    }
    const double log_hi =
        std::max({log_eps + std::log(10.0), last_kink + std::log(2.0), 0.0});

    constexpr double kKnotStep = std::numbers::ln10 / 512.0;
    std::vector<double> knots;
    for (double u = log_eps; u < log_hi; u += kKnotStep) knots.push_back(u);
    knots.push_back(log_hi);
    for (double lk : kink_logs)
      if (lk < log_hi) knots.push_back(lk);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [](double a, double b) { return b - a < 1e-13; }),
                knots.end());

    double cum = 0.0;
    segments_.reserve(knots.size());
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      Segment s;
      s.log_a = knots[i];
      s.width = knots[i + 1] - knots[i];
      s.log_h_a = levy_.log_h(s.log_a);
      s.q = (levy_.log_h(knots[i + 1]) - s.log_h_a) / s.width;
      s.mass = std::exp(-s.log_h_a) * (-std::expm1(-s.q * s.width)) / s.q;
      s.cum = cum;
      cum += s.mass;
      segments_.push_back(s);
    }
    Segment tail;
    tail.log_a = knots.back();
    tail.width = std::numeric_limits<double>::infinity();
    tail.log_h_a = levy_.log_h(tail.log_a);
    tail.q = levy_.h_piece(tail.log_a + 1.0).rho;
    tail.mass = std::exp(-tail.log_h_a) / tail.q;
    tail.cum = cum;
    segments_.push_back(tail);
    jump_rate_ = cum + tail.mass;
  }

  /// int_0^eps t^power mu(t) dt via quadrature in log t.
  double moment_below(double power) const {
    auto f = [&, power](double u) { return std::exp(power * u - levy_.log_h(u)); };
    const double hi = std::log(epsilon_);
    const double rate = std::max(power - levy_.rho_zero(), 1e-3);
    const double lo = std::max(hi - 45.0 / rate, -700.0);
    return detail::integrate_log_axis(levy_, f, lo, hi, settings_).value;
  }

  void check_horizon(double T) const {
    if (std::isnan(T) || T < 0.0)
      throw std::domain_error("SubordinatorSampler: horizon must be nonnegative");
    if (jump_rate_ * T > 1e7)
      throw std::invalid_argument(
          "SubordinatorSampler: cost guard violated, Lambda(eps) * T > 1e7; "
          "raise epsilon or shorten the horizon");
  }

  LevySpec levy_;
  double epsilon_;
  std::uint64_t seed_;
  quad::Settings settings_;
  std::vector<Segment> segments_;
  double jump_rate_ = 0.0;
  double compensator_mean_ = 0.0;
  double small_jump_second_moment_ = 0.0;
};

/// Spec-level entry point: terminal samples of the subordinator at time T.
inline std::vector<double> sample_path(const SubordinatorSampler& sampler, double T,
                                       int n_paths) {
  return sampler.sample_paths(T, n_paths);
}

inline LaplaceValidationReport validate_laplace(const SubordinatorSampler& sampler, double T,
                                                const std::vector<double>& lambdas,
                                                int n_paths) {
  return sampler.validate_laplace(T, lambdas, n_paths);
}

}  // namespace subkernel
