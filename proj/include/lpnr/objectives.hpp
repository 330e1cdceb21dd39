#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "lpnr/operators.hpp"

namespace lpnr {

/// Which sphere functional an estimate or certificate refers to.
enum class Quantity { v, abs_v, norm_quotient };

inline std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::v:
      return "v";
    case Quantity::abs_v:
      return "abs_v";
    default:
      return "norm_quotient";
  }
}

/// |int x^# Tx| / ||x||^p for raw values x (0 at x = 0).
inline double v_quotient(const LpOperator& t, std::span<const cplx> x) {
  const double p = t.exponent().p();
  const auto w = t.space()->weights();
  const double n = norm_pow(x, w, p);
  if (n == 0.0) return 0.0;
  const auto tx = t.apply_values(x);
  return std::abs(integrate_product(sharp_values(x, p), tx, w)) / n;
}

/// int |x|^(p-1) |Tx| / ||x||^p.
inline double abs_quotient(const LpOperator& t, std::span<const cplx> x) {
  const double p = t.exponent().p();
  const auto w = t.space()->weights();
  const double n = norm_pow(x, w, p);
  if (n == 0.0) return 0.0;
  const auto tx = t.apply_values(x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += abs_pow(std::abs(x[i]), p - 1.0) * std::abs(tx[i]) * w[i];
  return s / n;
}

/// ||Tx|| / ||x||.
inline double norm_quotient(const LpOperator& t, std::span<const cplx> x) {
  const double p = t.exponent().p();
  const auto w = t.space()->weights();
  const double n = norm_pow(x, w, p);
  if (n == 0.0) return 0.0;
  return std::pow(norm_pow(t.apply_values(x), w, p) / n, 1.0 / p);
}

inline double evaluate(Quantity q, const LpOperator& t, std::span<const cplx> x) {
  switch (q) {
    case Quantity::v:
      return v_quotient(t, x);
    case Quantity::abs_v:
      return abs_quotient(t, x);
    default:
      return norm_quotient(t, x);
  }
}

}  // namespace lpnr
