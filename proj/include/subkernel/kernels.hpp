#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "subkernel/scales.hpp"

namespace subkernel {

/// Stable-like model kernel:
///   p_jump(t, r) = min(1/V(phi_j^-1(t)), t / (V(r) phi_j(r))),  t > 0.
/// Both branches coincide at t = phi_j(r) where they equal 1/V(r).
inline double p_jump(double t, double r, const ScaleSpec& phi_j, const VolumeProfile& vol) {
  if (!(t > 0.0)) throw std::domain_error("p_jump: time must be positive");
  if (std::isnan(r) || r < 0.0) throw std::domain_error("p_jump: radius must be nonnegative");
  const double lt = std::log(t);
  const double on_diag = std::exp(-vol.eval_log(phi_j.inverse_log(lt)));
  if (r == 0.0) return on_diag;
  const double lr = std::log(r);
  const double off_diag = std::exp(lt - vol.eval_log(lr) - phi_j.eval_log(lr));
  return std::min(on_diag, off_diag);
}

/// Closed form of sup_{s>0} (r/s - t/phi_c(s)) for phi_c(s) = n s^beta,
/// beta > 1:  (beta-1) beta^{-beta/(beta-1)} (n^-1 r^beta / t)^{1/(beta-1)}.
inline double chernoff_exponent_closed(double r, double t, double beta,
                                       double normalization = 1.0) {
  if (!(t > 0.0)) throw std::domain_error("chernoff_exponent: time must be positive");
  if (!(beta > 1.0))
    throw std::domain_error("chernoff_exponent: requires exponent > 1");
  if (std::isnan(r) || r < 0.0)
    throw std::domain_error("chernoff_exponent: radius must be nonnegative");
  if (r == 0.0) return 0.0;
  const double log_val = std::log(beta - 1.0) - beta / (beta - 1.0) * std::log(beta) +
                         (beta * std::log(r) - std::log(t) - std::log(normalization)) /
                             (beta - 1.0);
  return std::exp(log_val);
}

namespace detail {

// Sign/log-magnitude representation of r/s - t/phi_c(s); ordering on it
// matches ordering of the true value without overflow.
struct SignedLog {
  int sign;
  double log_mag;
};

inline SignedLog chernoff_objective(double log_r, double log_t, const ScaleSpec& phi_c,
                                    double u) {
  const double a = log_r - u;
  const double b = log_t - phi_c.eval_log(u);
  if (a == b) return {0, -std::numeric_limits<double>::infinity()};
  const double hi = std::max(a, b), lo = std::min(a, b);
  return {a > b ? 1 : -1, hi + std::log1p(-std::exp(lo - hi))};
}

inline bool signed_log_greater(const SignedLog& x, const SignedLog& y) {
  if (x.sign != y.sign) return x.sign > y.sign;
  if (x.sign > 0) return x.log_mag > y.log_mag;
  if (x.sign < 0) return x.log_mag < y.log_mag;
  return false;
}

}  // namespace detail

/// Golden-section maximization of s -> r/s - t/phi_c(s) on a log-s bracket
/// derived from the stationarity condition of the asymptotic power pieces,
/// widened by a factor 1e6 on both sides. Requires the exponent of phi_c
/// near zero to exceed 1 (otherwise the supremum is infinite).
inline double chernoff_exponent_numeric(double r, double t, const ScaleSpec& phi_c,
                                        int iterations = 200) {
  if (!(t > 0.0)) throw std::domain_error("chernoff_exponent: time must be positive");
  if (std::isnan(r) || r < 0.0)
    throw std::domain_error("chernoff_exponent: radius must be nonnegative");
  if (!(phi_c.exponent_zero() > 1.0))
    throw std::domain_error("chernoff_exponent: phi_c exponent near 0 must exceed 1");
  if (r == 0.0) return 0.0;

  const double log_r = std::log(r), log_t = std::log(t);
  std::vector<double> guesses;
  for (double probe : {-1e3, 1e3}) {
    const ScaleSpec::Piece p = phi_c.piece_at(probe);
    if (p.exponent > 1.0)
      guesses.push_back((std::log(p.exponent) + log_t - p.log_coef - log_r) /
                        (p.exponent - 1.0));
  }
  guesses.push_back(phi_c.inverse_log(log_t));
  double lo = guesses[0], hi = guesses[0];
  for (double g : guesses) {
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  const double kWiden = std::log(1e6);
  lo -= kWiden;
  hi += kWiden;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double u) { return detail::chernoff_objective(log_r, log_t, phi_c, u); };
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  detail::SignedLog f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations && hi - lo > 1e-14; ++i) {
    if (detail::signed_log_greater(f1, f2)) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  const detail::SignedLog best = detail::signed_log_greater(f1, f2) ? f1 : f2;
  if (best.sign <= 0) return 0.0;
  return std::exp(best.log_mag);  // +inf when the exponent overflows; fine downstream
}

/// sup_{s>0} (r/s - t/phi_c(s)), clamped below at 0. Exact closed form for
/// pure powers, golden-section search otherwise.
inline double chernoff_exponent(double r, double t, const ScaleSpec& phi_c) {
  if (phi_c.kind() == ScaleSpec::Kind::power)
    return chernoff_exponent_closed(r, t, phi_c.exponents()[0], phi_c.normalization());
  return chernoff_exponent_numeric(r, t, phi_c);
}

/// Sub-Gaussian model kernel:
///   p_diff(t, r) = exp(-sup_{s>0}(r/s - t/phi_c(s))) / V(phi_c^-1(t)).
inline double p_diff(double t, double r, const ScaleSpec& phi_c, const VolumeProfile& vol) {
  if (!(t > 0.0)) throw std::domain_error("p_diff: time must be positive");
  const double pre = std::exp(-vol.eval_log(phi_c.inverse_log(std::log(t))));
  if (r == 0.0) return pre;
  return pre * std::exp(-chernoff_exponent(r, t, phi_c));
}

enum class EnvelopeMode { pure_jump, diffusion_plus_jump };

struct EnvelopeConstants {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
  double c4 = 1.0;
};

/// Model two-sided heat-kernel envelope.
///
/// pure_jump mode:             c1 p_jump <= p <= c2 p_jump.
/// diffusion_plus_jump mode, with phi = min(phi_c, phi_j):
///   lower(t,r) = c1 ( 1/V(phi^-1(t))       if phi(c2 r) <= t,
///                     t/(V(r) phi_j(r))    otherwise )
///   upper(t,r) = c3 min( 1/V(phi^-1(t)), p_diff(c4 t, r) + p_jump(t, r) ).
///
/// The displayed lower and upper forms at equal constants are not globally
/// ordered: just above the indicator switch (r < 1) the upper form dips to
/// about exp(-(b-1) b^{-b/(b-1)}) of the lower one, which is why the two
/// sides carry independent constants. upper_small_r is the piecewise upper
/// bound used for small radii (split at phi_c(c1 r), diffusion term dilated
/// by c4).
class HeatKernelEnvelope {
 public:
  static HeatKernelEnvelope pure_jump(ScaleSpec phi_j, VolumeProfile vol,
                                      EnvelopeConstants c = {}) {
    return HeatKernelEnvelope(EnvelopeMode::pure_jump, std::nullopt, std::move(phi_j),
                              std::move(vol), c);
  }

  static HeatKernelEnvelope diffusion_plus_jump(ScaleSpec phi_c, ScaleSpec phi_j,
                                                VolumeProfile vol,
                                                EnvelopeConstants c = {}) {
    if (!(phi_c.exponent_zero() > 1.0))
      throw std::invalid_argument(
          "HeatKernelEnvelope: diffusion scale must have exponent > 1 near 0");
    return HeatKernelEnvelope(EnvelopeMode::diffusion_plus_jump, std::move(phi_c),
                              std::move(phi_j), std::move(vol), c);
  }

  EnvelopeMode mode() const { return mode_; }
  bool has_diffusion() const { return phi_c_.has_value(); }
  const ScaleSpec& phi_c() const {
    if (!phi_c_) throw std::logic_error("HeatKernelEnvelope: no diffusion scale");
    return *phi_c_;
  }
  const ScaleSpec& phi_j() const { return phi_j_; }
  const ScaleSpec& phi() const { return phi_; }
  const VolumeProfile& vol() const { return vol_; }
  const EnvelopeConstants& constants() const { return c_; }

  double lower(double t, double r) const {
    check_args(t, r);
    if (mode_ == EnvelopeMode::pure_jump) return c_.c1 * p_jump(t, r, phi_j_, vol_);
    const double lr = std::log(r);
    if (phi_.eval(c_.c2 * r) <= t)
      return c_.c1 * std::exp(-vol_.eval_log(phi_.inverse_log(std::log(t))));
    return c_.c1 * std::exp(std::log(t) - vol_.eval_log(lr) - phi_j_.eval_log(lr));
  }

  double upper(double t, double r) const {
    check_args(t, r);
    if (mode_ == EnvelopeMode::pure_jump) return c_.c2 * p_jump(t, r, phi_j_, vol_);
    const double on_diag = std::exp(-vol_.eval_log(phi_.inverse_log(std::log(t))));
    const double mixed = p_diff(c_.c4 * t, r, *phi_c_, vol_) + p_jump(t, r, phi_j_, vol_);
    return c_.c3 * std::min(on_diag, mixed);
  }

  double upper_small_r(double t, double r) const {
    check_args(t, r);
    if (mode_ != EnvelopeMode::diffusion_plus_jump)
      throw std::domain_error("upper_small_r: requires diffusion_plus_jump mode");
    if (t <= phi_c_->eval(c_.c1 * r)) {
      const double lr = std::log(r);
      const double jump_part = std::exp(std::log(t) - vol_.eval_log(lr) - phi_j_.eval_log(lr));
      return c_.c3 * (jump_part + p_diff(c_.c4 * t, r, *phi_c_, vol_));
    }
    return c_.c3 * std::exp(-vol_.eval_log(phi_.inverse_log(std::log(t))));
  }

 private:
  HeatKernelEnvelope(EnvelopeMode mode, std::optional<ScaleSpec> phi_c, ScaleSpec phi_j,
                     VolumeProfile vol, EnvelopeConstants c)
      : mode_(mode),
        phi_c_(std::move(phi_c)),
        phi_j_(std::move(phi_j)),
        phi_(phi_c_ ? min_scale(*phi_c_, phi_j_) : phi_j_),
        vol_(std::move(vol)),
        c_(c) {
    if (!(c_.c1 > 0.0) || !(c_.c2 > 0.0) || !(c_.c3 > 0.0) || !(c_.c4 > 0.0))
      throw std::invalid_argument("HeatKernelEnvelope: constants must be positive");
  }

  static void check_args(double t, double r) {
    if (!(t > 0.0)) throw std::domain_error("HeatKernelEnvelope: time must be positive");
    if (!(r > 0.0)) throw std::domain_error("HeatKernelEnvelope: radius must be positive");
  }

  EnvelopeMode mode_;
  std::optional<ScaleSpec> phi_c_;
  ScaleSpec phi_j_;
  ScaleSpec phi_;
  VolumeProfile vol_;
  EnvelopeConstants c_;
};

}  // namespace subkernel
