#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace subkernel {

/// Thrown when an adaptive integration cannot reach the requested tolerance
/// within its panel budget.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

namespace quad {

struct Settings {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;   // estimated absolute error of `value`
  int panels = 0;
};

namespace detail {

// 15-point Kronrod rule with embedded 7-point Gauss rule on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <typename F>
std::pair<double, double> gauss_kronrod_15(F&& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double fc = f(mid);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair_sum = f(mid - dx) + f(mid + dx);
    kronrod += kKronrodWeights[i] * pair_sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair_sum;
  }
  return {kronrod * half, std::abs(kronrod - gauss) * half};
}

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [lo, hi].
///
/// `interior_splits` seeds panel boundaries (kinks, indicator switches);
/// points outside (lo, hi) are ignored. Seed panels are further capped at a
/// fixed width so very wide smooth regions are not summarized by one rule
/// application. Converges when the total error estimate drops below
/// max(abs_tol, rel_tol * |value|); otherwise throws NumericalError.
template <typename F>
Result integrate(F&& f, double lo, double hi, std::vector<double> interior_splits,
                 const Settings& s = {}) {
  Result out;
  if (!(hi > lo)) return out;

  constexpr double kMaxSeedWidth = 4.0;
  std::vector<double> edges;
  edges.push_back(lo);
  std::sort(interior_splits.begin(), interior_splits.end());
  for (double x : interior_splits) {
    if (x > lo && x < hi && x > edges.back()) edges.push_back(x);
  }
  edges.push_back(hi);

  std::vector<detail::Panel> heap;
  auto push_panel = [&](double a, double b) {
    auto [v, e] = detail::gauss_kronrod_15(f, a, b);
    heap.push_back({a, b, v, e});
    std::push_heap(heap.begin(), heap.end());
  };
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / kMaxSeedWidth)));
    for (int k = 0; k < n; ++k)
      push_panel(a + (b - a) * k / n, a + (b - a) * (k + 1) / n);
  }

  auto totals = [&] {
    double v = 0, e = 0;
    for (const auto& p : heap) { v += p.value; e += p.error; }
    return std::pair{v, e};
  };

  auto [value, error] = totals();
  while (error > std::max(s.abs_tol, s.rel_tol * std::abs(value)) &&
         static_cast<int>(heap.size()) < s.max_subdivisions) {
    std::pop_heap(heap.begin(), heap.end());
    detail::Panel worst = heap.back();
    heap.pop_back();
    const double m = 0.5 * (worst.a + worst.b);
    if (!(m > worst.a && m < worst.b)) {  // cannot split further
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    push_panel(worst.a, m);
    push_panel(m, worst.b);
    std::tie(value, error) = totals();
  }

  // Deterministic final summation in panel order.
  std::sort(heap.begin(), heap.end(),
            [](const detail::Panel& x, const detail::Panel& y) { return x.a < y.a; });
  double v = 0, comp = 0, e = 0;
  for (const auto& p : heap) {
    const double y = p.value - comp;
    const double t = v + y;
    comp = (t - v) - y;
    v = t;
    e += p.error;
  }
  out.value = v;
  out.error = e;
  out.panels = static_cast<int>(heap.size());
  if (e > std::max(s.abs_tol, s.rel_tol * std::abs(v)) &&
      static_cast<int>(heap.size()) >= s.max_subdivisions) {
    throw NumericalError("adaptive quadrature: panel budget exhausted at error " +
                         std::to_string(e));
  }
  return out;
}

}  // namespace quad
}  // namespace subkernel
