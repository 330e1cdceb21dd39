#pragma once

#include <cmath>
#include <complex>

namespace lpnr {

using cplx = std::complex<double>;

/// |a|^e for a >= 0, with 0^e = 0 for every exponent (also e <= 0).
inline double abs_pow(double a, double e) {
  if (a == 0.0) return 0.0;
  if (e == 1.0) return a;
  return std::exp(e * std::log(a));
}

/// Unit scalar z/|z|; sign(0) = 0.
inline cplx unit_sign(cplx z) {
  const double r = std::abs(z);
  if (r == 0.0) return {0.0, 0.0};
  return z / r;
}

inline double real_sign(double a) { return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0); }

}  // namespace lpnr
