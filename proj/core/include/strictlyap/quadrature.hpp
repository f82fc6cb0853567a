#pragma once

#include <cmath>
#include <cstddef>

namespace strictlyap {

/// Composite Simpson rule on [a, b] with `n` subintervals (rounded up to
/// even). Returns 0 for an empty interval and a signed value when b < a.
template <class F>
double simpson(F&& f, double a, double b, std::size_t n) {
  if (a == b) return 0.0;
  if (n < 2) n = 2;
  if (n % 2) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double v = f(a + h * static_cast<double>(i));
    if (i % 2) odd += v;
    else even += v;
  }
  return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

/// Subinterval count for a window of length `len`: at least `min_n`, and
/// no coarser than `max_step`.
inline std::size_t simpson_subintervals(double len, std::size_t min_n, double max_step) {
  std::size_t n = min_n;
  if (max_step > 0.0) {
    const double need = std::ceil(std::abs(len) / max_step);
    if (need > static_cast<double>(n)) n = static_cast<std::size_t>(need);
  }
  return n + (n % 2);
}

/// Golden-section minimisation of a unimodal function on [lo, hi].
/// Returns the abscissa of the smallest value seen.
template <class F>
double golden_minimize(F&& f, double lo, double hi, int iterations = 60) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

}  // namespace strictlyap
