#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lpnr {

struct ScalarMax {
  double argmax = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search for the maximum of a unimodal f on [a, b].
/// Stops when the bracket is narrower than rel_tol * max(1, |x|).
template <class F>
ScalarMax golden_section_max(F&& f, double a, double b, double rel_tol = 1e-12, int max_iter = 400) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int evals = 2;
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(b - a) <= rel_tol * std::max(1.0, std::abs(0.5 * (a + b)))) break;
    if (fc >= fd) {
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
    ++evals;
  }
  ScalarMax out;
  out.argmax = fc >= fd ? c : d;
  out.value = std::max(fc, fd);
  out.evaluations = evals;
  return out;
}

/// Maximum of f over [lo, hi] (0 < lo < hi): scan a geometric grid, then
/// polish the best grid cell and its neighbours by golden section.
template <class F>
ScalarMax maximize_on_log_grid(F&& f, double lo, double hi, int grid_points = 128, double rel_tol = 1e-12) {
  if (!(lo > 0.0 && hi > lo) || grid_points < 3) throw std::invalid_argument("maximize_on_log_grid: bad bracket");
  const double ratio = std::pow(hi / lo, 1.0 / (grid_points - 1));
  int best = 0;
  double best_val = f(lo);
  double t = lo;
  for (int i = 1; i < grid_points; ++i) {
    t = (i == grid_points - 1) ? hi : t * ratio;
    const double v = f(t);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double left = best == 0 ? lo : lo * std::pow(ratio, best - 1);
  const double right = best == grid_points - 1 ? hi : std::min(hi, lo * std::pow(ratio, best + 1));
  ScalarMax polished = golden_section_max(f, left, right, rel_tol);
  polished.evaluations += grid_points;
  if (polished.value < best_val) {
    polished.value = best_val;
    polished.argmax = lo * std::pow(ratio, best);
  }
  return polished;
}

}  // namespace lpnr
