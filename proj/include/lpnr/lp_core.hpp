#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lpnr/errors.hpp"
#include "lpnr/measure.hpp"
#include "lpnr/scalar.hpp"
#include "lpnr/scalar_search.hpp"

namespace lpnr {

enum class Field { real, complex };

inline std::string_view to_string(Field f) { return f == Field::real ? "real" : "complex"; }

/// Exponent 1 < p < infinity together with its conjugate q = p / (p - 1).
class Exponent {
 public:
  explicit Exponent(double p) : p_(p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("exponent must satisfy 1 < p < infinity");
    q_ = p / (p - 1.0);
  }

  double p() const { return p_; }
  double q() const { return q_; }
  Exponent dual() const { return Exponent(q_, p_); }

  bool conjugate_to(const Exponent& other) const { return std::abs(p_ - other.q_) <= 1e-12 * p_; }
  bool same_as(const Exponent& other) const { return std::abs(p_ - other.p_) <= 1e-12 * p_; }

 private:
  Exponent(double p, double q) : p_(p), q_(q) {}
  double p_;
  double q_;
};

/// A simple function on a finite measure space, viewed as an element of L_p.
class LpVector {
 public:
  LpVector(SpacePtr space, Exponent exponent, Field field, std::vector<cplx> values)
      : space_(std::move(space)), exponent_(exponent), field_(field), values_(std::move(values)) {
    if (!space_) throw InvalidArgument("LpVector needs a space");
    if (values_.size() != space_->size()) throw InvalidArgument("LpVector: value count differs from atom count");
    for (const cplx& v : values_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InvalidArgument("LpVector: non-finite value");
      if (field_ == Field::real && v.imag() != 0.0) {
        throw InvalidArgument("LpVector: imaginary part in a real-field vector");
      }
    }
  }

  static LpVector zeros(SpacePtr space, Exponent exponent, Field field) {
    const std::size_t n = space->size();
    return LpVector(std::move(space), exponent, field, std::vector<cplx>(n));
  }

  static LpVector real(SpacePtr space, Exponent exponent, std::span<const double> values) {
    return LpVector(std::move(space), exponent, Field::real, std::vector<cplx>(values.begin(), values.end()));
  }

  const SpacePtr& space() const { return space_; }
  const Exponent& exponent() const { return exponent_; }
  Field field() const { return field_; }
  std::span<const cplx> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  /// Same space, exponent and field with new values.
  LpVector with_values(std::vector<cplx> values) const { return LpVector(space_, exponent_, field_, std::move(values)); }

  LpVector with_exponent(Exponent e) const { return LpVector(space_, e, field_, values_); }

 private:
  SpacePtr space_;
  Exponent exponent_;
  Field field_;
  std::vector<cplx> values_;
};

inline void require_same_space(const LpVector& a, const LpVector& b, const char* what) {
  if (a.size() != b.size() || !same_space(*a.space(), *b.space())) {
    throw InvalidArgument(std::string(what) + ": vectors live on different spaces");
  }
}

/// sum_i |x_i|^p mu_i on raw values.
inline double norm_pow(std::span<const cplx> x, std::span<const double> w, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += abs_pow(std::abs(x[i]), p) * w[i];
  return s;
}

/// ||x||_p^p.
inline double p_norm_pow(const LpVector& x) { return norm_pow(x.values(), x.space()->weights(), x.exponent().p()); }

inline double p_norm(const LpVector& x) {
  const double s = p_norm_pow(x);
  return s == 0.0 ? 0.0 : std::pow(s, 1.0 / x.exponent().p());
}

/// Duality map on raw values: |x|^(p-1) conj(sign x).
inline std::vector<cplx> sharp_values(std::span<const cplx> x, double p) {
  std::vector<cplx> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::abs(x[i]);
    if (r != 0.0) out[i] = abs_pow(r, p - 1.0) * std::conj(x[i] / r);
  }
  return out;
}

/// The norming functional x^# as an element of L_q.
inline LpVector sharp(const LpVector& x) {
  return LpVector(x.space(), x.exponent().dual(), x.field(), sharp_values(x.values(), x.exponent().p()));
}

/// sum_i f_i x_i mu_i on raw values.
inline cplx integrate_product(std::span<const cplx> f, std::span<const cplx> x, std::span<const double> w) {
  cplx s{};
  for (std::size_t i = 0; i < x.size(); ++i) s += f[i] * x[i] * w[i];
  return s;
}

/// Duality pairing of f in L_q with x in L_p (no conjugation).
inline cplx pairing(const LpVector& f, const LpVector& x) {
  require_same_space(f, x, "pairing");
  if (!f.exponent().conjugate_to(x.exponent())) throw InvalidArgument("pairing: exponents are not conjugate");
  return integrate_product(f.values(), x.values(), x.space()->weights());
}

inline LpVector normalized(const LpVector& x) {
  const double n = p_norm(x);
  if (n == 0.0) throw InvalidArgument("cannot normalize the zero vector");
  std::vector<cplx> v(x.values().begin(), x.values().end());
  for (auto& c : v) c /= n;
  return x.with_values(std::move(v));
}

inline LpVector operator+(const LpVector& a, const LpVector& b) {
  require_same_space(a, b, "add");
  std::vector<cplx> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
  const Field f = (a.field() == Field::complex || b.field() == Field::complex) ? Field::complex : Field::real;
  return LpVector(a.space(), a.exponent(), f, std::move(v));
}

inline LpVector operator*(cplx c, const LpVector& x) {
  std::vector<cplx> v(x.values().begin(), x.values().end());
  for (auto& e : v) e *= c;
  const Field f = (x.field() == Field::real && c.imag() == 0.0) ? Field::real : Field::complex;
  return LpVector(x.space(), x.exponent(), f, std::move(v));
}

inline LpVector operator*(double c, const LpVector& x) { return cplx(c, 0.0) * x; }

inline LpVector operator-(const LpVector& a, const LpVector& b) { return a + (-1.0) * b; }

/// x restricted to A (x_A = x 1_A).
inline LpVector restrict_to(const LpVector& x, const MeasurableSet& a) {
  if (a.universe() != x.size()) throw InvalidArgument("restrict_to: set from another space");
  std::vector<cplx> v(x.size());
  for (std::size_t i : a.indices()) v[i] = x[i];
  return x.with_values(std::move(v));
}

/// Pointwise modulus, as a real-field vector.
inline LpVector abs(const LpVector& x) {
  std::vector<cplx> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(x[i]);
  return LpVector(x.space(), x.exponent(), Field::real, std::move(v));
}

namespace detail {
template <class Op>
LpVector lattice_op(const LpVector& x, const LpVector& y, Op op) {
  if (x.field() != Field::real || y.field() != Field::real) {
    throw UnsupportedOperation("lattice operations need the real field");
  }
  require_same_space(x, y, "lattice");
  if (!x.exponent().same_as(y.exponent())) throw InvalidArgument("lattice: exponent mismatch");
  std::vector<cplx> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(x[i].real(), y[i].real());
  return x.with_values(std::move(v));
}
}  // namespace detail

inline LpVector lattice_join(const LpVector& x, const LpVector& y) {
  return detail::lattice_op(x, y, [](double a, double b) { return std::max(a, b); });
}

inline LpVector lattice_meet(const LpVector& x, const LpVector& y) {
  return detail::lattice_op(x, y, [](double a, double b) { return std::min(a, b); });
}

// ---------------------------------------------------------------------------
// Reference constants.

/// Geometric bracket and grid used by every 1-D maximization below.
inline constexpr double kBracketLo = 1e-6;
inline constexpr double kBracketHi = 1e6;
inline constexpr int kBracketGrid = 128;

/// tau^(p-1) / (1 + tau^p).
inline double kappa_objective(double p, double tau) { return std::pow(tau, p - 1.0) / (1.0 + std::pow(tau, p)); }

/// 1 / (p^(1/p) q^(1/q)).
inline double kappa(const Exponent& e) {
  return 1.0 / (std::pow(e.p(), 1.0 / e.p()) * std::pow(e.q(), 1.0 / e.q()));
}

/// kappa_p obtained by maximizing tau^(p-1)/(1+tau^p) numerically.
inline ScalarMax kappa_by_maximization(const Exponent& e) {
  return maximize_on_log_grid([p = e.p()](double t) { return kappa_objective(p, t); }, kBracketLo, kBracketHi,
                              kBracketGrid);
}

/// The maximizer (p-1)^(1/p) of tau^(p-1)/(1+tau^p).
inline double tau_star(const Exponent& e) { return std::pow(e.p() - 1.0, 1.0 / e.p()); }

/// |t^(p-1) - t| / (1 + t^p).
inline double rotation_objective(double p, double t) {
  return std::abs(std::pow(t, p - 1.0) - t) / (1.0 + std::pow(t, p));
}

/// M_p as the maximum over t >= 1.
inline ScalarMax m_p_search(const Exponent& e) {
  return maximize_on_log_grid([p = e.p()](double t) { return rotation_objective(p, t); }, 1.0, kBracketHi,
                              kBracketGrid);
}

/// M_p as the maximum over t in [0, 1].
inline ScalarMax m_p_search_unit_interval(const Exponent& e) {
  return maximize_on_log_grid([p = e.p()](double t) { return rotation_objective(p, t); }, kBracketLo, 1.0,
                              kBracketGrid);
}

inline double m_p(const Exponent& e) { return m_p_search(e).value; }

/// (kappa_p tau^(p-1) - tau) / (1 + tau^p).
inline double narrow_real_objective(double p, double kappa_p, double tau) {
  return (kappa_p * std::pow(tau, p - 1.0) - tau) / (1.0 + std::pow(tau, p));
}

/// max(0, sup_tau narrow_real_objective) with the maximizing tau (the grid
/// lower end when the supremum is only approached as tau -> 0).
inline ScalarMax narrow_bound_real_search(const Exponent& e) {
  const double k = kappa(e);
  auto best = maximize_on_log_grid([p = e.p(), k](double t) { return narrow_real_objective(p, k, t); }, kBracketLo,
                                   kBracketHi, kBracketGrid);
  if (best.value < 0.0) best.value = 0.0;
  return best;
}

inline double narrow_bound_real(const Exponent& e) { return narrow_bound_real_search(e).value; }

/// Lower bound for the numerical index of real L_p coming from |n| = kappa_p.
inline double m_p_kappa_over_6(const Exponent& e) { return m_p(e) * kappa(e) / 6.0; }

}  // namespace lpnr
