#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace subkernel {

/// Log-spaced grid over [lo, hi], inclusive of both endpoints.
inline std::vector<double> log_grid(double lo, double hi, int points_per_decade) {
  if (!(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("log_grid: need 0 < lo < hi");
  if (points_per_decade < 1)
    throw std::invalid_argument("log_grid: points_per_decade must be >= 1");
  const double l0 = std::log10(lo), l1 = std::log10(hi);
  const int n = std::max(1, static_cast<int>(std::lround((l1 - l0) * points_per_decade)));
  std::vector<double> g(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i)
    g[static_cast<std::size_t>(i)] = std::pow(10.0, l0 + (l1 - l0) * i / n);
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// A strictly increasing scale function on [0, inf) with psi(0) = 0 and
/// psi(1) = normalization. Represented symbolically (kind + exponents) so
/// the exact local power exponents near 0 and infinity stay available for
/// finiteness decisions; every representable function is piecewise pure
/// power in between finitely many kinks.
class ScaleSpec {
 public:
  enum class Kind { power, piecewise_power, min_of_two };

  /// r -> normalization * r^exponent
  static ScaleSpec power(double exponent, double normalization = 1.0) {
    ScaleSpec s;
    s.kind_ = Kind::power;
    s.exponents_ = {exponent};
    s.set_normalization(normalization);
    s.validate();
    return s;
  }

  /// r -> normalization * (r^exp_small for r <= 1, r^exp_large for r > 1)
  static ScaleSpec piecewise_power(double exponent_small, double exponent_large,
                                   double normalization = 1.0) {
    ScaleSpec s;
    s.kind_ = Kind::piecewise_power;
    s.exponents_ = {exponent_small, exponent_large};
    s.set_normalization(normalization);
    s.validate();
    return s;
  }

  /// r -> normalization * min(a(r), b(r))
  static ScaleSpec min_of(ScaleSpec a, ScaleSpec b, double normalization = 1.0) {
    ScaleSpec s;
    s.kind_ = Kind::min_of_two;
    s.components_.push_back(std::move(a));
    s.components_.push_back(std::move(b));
    s.set_normalization(normalization);
    return s;
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& exponents() const { return exponents_; }
  double normalization() const { return norm_; }
  const std::vector<ScaleSpec>& components() const { return components_; }

  double eval(double r) const {
    if (std::isnan(r) || r < 0.0)
      throw std::domain_error("ScaleSpec::eval: radius must be nonnegative");
    if (r == 0.0) return 0.0;
    return std::exp(eval_log(std::log(r)));
  }
  double operator()(double r) const { return eval(r); }

  /// log psi(e^u); exact piecewise-linear in u.
  double eval_log(double u) const {
    switch (kind_) {
      case Kind::power:
        return log_norm_ + exponents_[0] * u;
      case Kind::piecewise_power:
        return log_norm_ + (u <= 0.0 ? exponents_[0] : exponents_[1]) * u;
      case Kind::min_of_two:
        return log_norm_ +
               std::min(components_[0].eval_log(u), components_[1].eval_log(u));
    }
    return 0.0;  // unreachable
  }

  /// Exact inverse. min-of-two inverts as the max of component inverses.
  double inverse(double y) const {
    if (std::isnan(y) || y < 0.0)
      throw std::domain_error("ScaleSpec::inverse: value must be nonnegative");
    if (y == 0.0) return 0.0;
    return std::exp(inverse_log(std::log(y)));
  }

  double inverse_log(double log_y) const {
    const double v = log_y - log_norm_;
    switch (kind_) {
      case Kind::power:
        return v / exponents_[0];
      case Kind::piecewise_power:
        return v <= 0.0 ? v / exponents_[0] : v / exponents_[1];
      case Kind::min_of_two:
        return std::max(components_[0].inverse_log(v), components_[1].inverse_log(v));
    }
    return 0.0;  // unreachable
  }

  /// Local power exponent as r -> 0. For a min the larger component
  /// exponent wins near zero (it gives the smaller value below the kink).
  double exponent_zero() const {
    switch (kind_) {
      case Kind::power: return exponents_[0];
      case Kind::piecewise_power: return exponents_[0];
      case Kind::min_of_two:
        return std::max(components_[0].exponent_zero(), components_[1].exponent_zero());
    }
    return 0.0;
  }

  /// Local power exponent as r -> infinity.
  double exponent_inf() const {
    switch (kind_) {
      case Kind::power: return exponents_[0];
      case Kind::piecewise_power: return exponents_[1];
      case Kind::min_of_two:
        return std::min(components_[0].exponent_inf(), components_[1].exponent_inf());
    }
    return 0.0;
  }

  /// Declared two-sided power bounds: LU(lower_exponent, upper_exponent)
  /// holds with constant 1 for every representable spec.
  double lower_exponent() const {
    switch (kind_) {
      case Kind::power: return exponents_[0];
      case Kind::piecewise_power: return std::min(exponents_[0], exponents_[1]);
      case Kind::min_of_two:
        return std::min(components_[0].lower_exponent(), components_[1].lower_exponent());
    }
    return 0.0;
  }
  double upper_exponent() const {
    switch (kind_) {
      case Kind::power: return exponents_[0];
      case Kind::piecewise_power: return std::max(exponents_[0], exponents_[1]);
      case Kind::min_of_two:
        return std::max(components_[0].upper_exponent(), components_[1].upper_exponent());
    }
    return 0.0;
  }

  /// The pure-power piece c * r^e containing e^u, as (log c, e).
  struct Piece {
    double log_coef;
    double exponent;
  };
  Piece piece_at(double u) const {
    switch (kind_) {
      case Kind::power:
        return {log_norm_, exponents_[0]};
      case Kind::piecewise_power:
        return {log_norm_, u <= 0.0 ? exponents_[0] : exponents_[1]};
      case Kind::min_of_two: {
        const Piece p = components_[0].eval_log(u) <= components_[1].eval_log(u)
                            ? components_[0].piece_at(u)
                            : components_[1].piece_at(u);
        return {p.log_coef + log_norm_, p.exponent};
      }
    }
    return {0.0, 0.0};
  }

  /// Radii where the local power law can change, sorted ascending. A
  /// superset of the true kink set is possible (a component kink inside a
  /// region where the other component is active); that is harmless for the
  /// consumers (quadrature split points, tail-exactness ranges).
  std::vector<double> kinks() const {
    std::vector<double> ks;
    collect_kinks(ks);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end(),
                         [](double a, double b) { return std::abs(std::log(b / a)) < 1e-12; }),
             ks.end());
    return ks;
  }

 private:
  ScaleSpec() = default;

  void set_normalization(double n) {
    if (!(n > 0.0) || !std::isfinite(n))
      throw std::invalid_argument("ScaleSpec: normalization must be positive");
    norm_ = n;
    log_norm_ = std::log(n);
  }

  void validate() const {
    for (double e : exponents_) {
      if (!(e > 0.0) || !std::isfinite(e))
        throw std::invalid_argument("ScaleSpec: exponents must be positive");
    }
  }

  void collect_kinks(std::vector<double>& out) const {
    switch (kind_) {
      case Kind::power:
        return;
      case Kind::piecewise_power:
        if (exponents_[0] != exponents_[1]) out.push_back(1.0);
        return;
      case Kind::min_of_two: {
        std::vector<double> cand;
        components_[0].collect_kinks(cand);
        components_[1].collect_kinks(cand);
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        // Component crossings: on every interval between candidate kinks both
        // components are pure powers, so the crossing solves exactly in logs.
        std::vector<double> test_u;
        if (cand.empty()) {
          test_u.push_back(0.0);
        } else {
          test_u.push_back(std::log(cand.front()) - 1.0);
          for (std::size_t i = 0; i + 1 < cand.size(); ++i)
            test_u.push_back(0.5 * (std::log(cand[i]) + std::log(cand[i + 1])));
          test_u.push_back(std::log(cand.back()) + 1.0);
        }
        for (std::size_t i = 0; i < test_u.size(); ++i) {
          const Piece pa = components_[0].piece_at(test_u[i]);
          const Piece pb = components_[1].piece_at(test_u[i]);
          if (pa.exponent == pb.exponent) continue;
          const double u_cross =
              (pb.log_coef - pa.log_coef) / (pa.exponent - pb.exponent);
          const double u_lo = cand.empty() || i == 0
                                  ? -std::numeric_limits<double>::infinity()
                                  : std::log(cand[i - 1]);
          const double u_hi = cand.empty() || i == cand.size()
                                  ? std::numeric_limits<double>::infinity()
                                  : std::log(cand[i]);
          if (u_cross > u_lo && u_cross < u_hi) out.push_back(std::exp(u_cross));
        }
        for (double k : cand) out.push_back(k);
        return;
      }
    }
  }

  Kind kind_ = Kind::power;
  std::vector<double> exponents_;
  std::vector<ScaleSpec> components_;
  double norm_ = 1.0;
  double log_norm_ = 0.0;
};

/// Pointwise minimum of two scale functions; the declared LU exponents are
/// the min of the lower and the max of the upper component exponents.
inline ScaleSpec min_scale(const ScaleSpec& a, const ScaleSpec& b) {
  return ScaleSpec::min_of(a, b);
}

/// Radial volume profile V(r) = constant * r^d, optionally with distinct
/// exponents below and above r = 1 (e.g. fractal tilings that look
/// Euclidean at large scale).
class VolumeProfile {
 public:
  static VolumeProfile ahlfors(double exponent, double constant = 1.0) {
    return VolumeProfile(exponent, exponent, constant);
  }
  static VolumeProfile piecewise(double exponent_small, double exponent_large,
                                 double constant = 1.0) {
    return VolumeProfile(exponent_small, exponent_large, constant);
  }

  double eval(double r) const {
    if (std::isnan(r) || r < 0.0)
      throw std::domain_error("VolumeProfile::eval: radius must be nonnegative");
    if (r == 0.0) return 0.0;
    return std::exp(eval_log(std::log(r)));
  }
  double operator()(double r) const { return eval(r); }
  double eval_log(double u) const {
    return log_const_ + (u <= 0.0 ? d_small_ : d_large_) * u;
  }

  double exponent_zero() const { return d_small_; }
  double exponent_inf() const { return d_large_; }
  double ahlfors_exponent() const { return d_small_; }
  double doubling_exponent() const { return std::max(d_small_, d_large_); }
  double constant() const { return constant_; }
  bool is_piecewise() const { return d_small_ != d_large_; }
  std::vector<double> kinks() const {
    return is_piecewise() ? std::vector<double>{1.0} : std::vector<double>{};
  }

 private:
  VolumeProfile(double ds, double dl, double c)
      : d_small_(ds), d_large_(dl), constant_(c), log_const_(std::log(c)) {
    if (!(ds > 0.0) || !(dl > 0.0) || !(c > 0.0))
      throw std::invalid_argument("VolumeProfile: exponents and constant must be positive");
  }

  double d_small_, d_large_, constant_, log_const_;
};

inline double volume(const VolumeProfile& profile, double r) { return profile.eval(r); }

/// Checks phi_c <= phi_j on (0,1] and phi_c >= phi_j on (1,inf) over a grid.
inline bool check_scale_order(const ScaleSpec& phi_c, const ScaleSpec& phi_j,
                              const std::vector<double>& grid) {
  constexpr double slack = 1e-12;
  for (double r : grid) {
    if (!(r > 0.0)) continue;
    const double lc = phi_c.eval_log(std::log(r));
    const double lj = phi_j.eval_log(std::log(r));
    if (r <= 1.0 && lc > lj + slack) return false;
    if (r > 1.0 && lc < lj - slack) return false;
  }
  return true;
}

struct LUCheck {
  bool holds;
  double best_constant;  // smallest C validating both sides on the grid
};

/// Two-sided power-ratio check: C^-1 (R/r)^a1 <= psi(R)/psi(r) <= C (R/r)^a2
/// over every grid pair r <= R. On a finite grid some C always exists, so
/// `holds` means the smallest one stays below `max_constant`.
inline LUCheck verify_lu(const ScaleSpec& spec, double alpha1, double alpha2,
                         const std::vector<double>& grid, double max_constant = 1e6) {
  if (!(alpha1 > 0.0) || !(alpha2 >= alpha1))
    throw std::invalid_argument("verify_lu: need 0 < alpha1 <= alpha2");
  std::vector<double> lr, lv;
  lr.reserve(grid.size());
  lv.reserve(grid.size());
  for (double r : grid) {
    if (!(r > 0.0)) continue;
    lr.push_back(std::log(r));
    lv.push_back(spec.eval_log(std::log(r)));
  }
  double log_c = 0.0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    for (std::size_t j = i; j < lr.size(); ++j) {
      const double d = lr[j] - lr[i];
      if (d < 0.0) continue;
      const double dv = lv[j] - lv[i];
      log_c = std::max({log_c, dv - alpha2 * d, alpha1 * d - dv});
    }
  }
  const double c = std::exp(log_c);
  return {c <= max_constant, c};
}

struct VDCheck {
  double constant;
  double exponent;  // empirical doubling exponent d2
};

/// Empirical volume-doubling fit: smallest d2 such that the grid satisfies
/// V(R)/V(r) <= C (R/r)^d2, together with the accompanying C.
inline VDCheck verify_vd(const VolumeProfile& profile, const std::vector<double>& grid) {
  std::vector<double> lr, lv;
  for (double r : grid) {
    if (!(r > 0.0)) continue;
    lr.push_back(std::log(r));
    lv.push_back(profile.eval_log(std::log(r)));
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    for (std::size_t j = i + 1; j < lr.size(); ++j) {
      const double d = lr[j] - lr[i];
      if (d > 1e-14) d2 = std::max(d2, (lv[j] - lv[i]) / d);
    }
  }
  double log_c = 0.0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    for (std::size_t j = i; j < lr.size(); ++j) {
      const double d = lr[j] - lr[i];
      if (d >= 0.0) log_c = std::max(log_c, (lv[j] - lv[i]) - d2 * d);
    }
  }
  return {std::exp(log_c), d2};
}

/// Default grid for regularity verification: 64 points per decade over
/// [1e-6, 1e6], spanning both regimes of every piecewise scale.
inline std::vector<double> default_verification_grid() {
  return log_grid(1e-6, 1e6, 64);
}

}  // namespace subkernel
