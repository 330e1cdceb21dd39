#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lpnr/errors.hpp"
#include "lpnr/lp_core.hpp"
#include "lpnr/measure.hpp"
#include "lpnr/objectives.hpp"
#include "lpnr/operators.hpp"
#include "lpnr/random.hpp"

namespace lpnr {

struct CertifiedIdentity {
  enum class Kind { equality, at_most, at_least };
  std::string description;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  Kind kind = Kind::equality;

  bool holds() const {
    switch (kind) {
      case Kind::equality:
        return std::abs(lhs - rhs) <= tolerance;
      case Kind::at_most:
        return lhs <= rhs + tolerance;
      default:
        return lhs >= rhs - tolerance;
    }
  }
};

inline CertifiedIdentity equality(std::string what, double lhs, double rhs, double tol) {
  return {std::move(what), lhs, rhs, tol, CertifiedIdentity::Kind::equality};
}
inline CertifiedIdentity at_most(std::string what, double lhs, double rhs, double tol) {
  return {std::move(what), lhs, rhs, tol, CertifiedIdentity::Kind::at_most};
}
inline CertifiedIdentity at_least(std::string what, double lhs, double rhs, double tol) {
  return {std::move(what), lhs, rhs, tol, CertifiedIdentity::Kind::at_least};
}

struct WitnessParams {
  std::optional<double> tau;
  std::optional<double> lambda;
  std::optional<double> epsilon;
};

/// Unit vector(s) with the value they reach for `quantity` and the lower bound
/// that value must dominate. Both numbers are in the units of the input operator.
struct WitnessCertificate {
  std::vector<LpVector> vectors;
  Quantity quantity = Quantity::v;
  double achieved = 0.0;
  double bound = 0.0;
  WitnessParams params;
  /// The norm lower bound ||T x0|| the construction was normalized by.
  double norm_scale = 1.0;
  bool exhaustive = true;
  /// Operator the vectors live on (the input operator or its refinement).
  OperatorPtr op;
  std::vector<CertifiedIdentity> identities;
  std::vector<std::string> notes;

  bool identities_hold() const {
    return std::all_of(identities.begin(), identities.end(), [](const auto& c) { return c.holds(); });
  }
  bool valid(double tol = 1e-9) const { return achieved >= bound - tol && identities_hold(); }
};

/// Shared pointer that does not own `t`; lets certificates refer to caller-owned operators.
inline OperatorPtr borrow(const LpOperator& t) { return OperatorPtr(std::shared_ptr<const LpOperator>{}, &t); }

inline double tau_weight(double p, double tau) { return kappa_objective(p, tau); }

namespace detail {

inline void require_real(const LpOperator& t, const char* what) {
  if (t.field() != Field::real) throw UnsupportedOperation(std::string(what) + " needs the real field");
}

/// Unit near-norming vector: the caller's x0 (normalized) or the norm iteration's witness.
inline LpVector starting_vector(const LpOperator& t, const std::optional<LpVector>& x0, std::uint64_t seed) {
  if (x0) {
    if (x0->size() != t.size() || !same_space(*x0->space(), *t.space())) {
      throw InvalidArgument("witness: x0 lives on another space");
    }
    return normalized(*x0);
  }
  NormOptions opt;
  opt.seed = seed;
  return op_norm_lower(t, opt).witness;
}

inline void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("witness: tau must be positive");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Positive operators.

/// y = x0 v tau T'x0 with T' = T / ||T x0||; certifies v(T) >= tau-weight * ||T x0||.
inline WitnessCertificate positive_witness(const LpOperator& t, std::optional<LpVector> x0 = std::nullopt,
                                           std::optional<double> tau = std::nullopt, std::uint64_t seed = 0) {
  detail::require_real(t, "positive_witness");
  if (!is_positive(t)) throw PreconditionError("positive_witness: operator is not positive");
  const double p = t.exponent().p();
  const double ta = tau.value_or(tau_star(t.exponent()));
  detail::check_tau(ta);

  WitnessCertificate cert;
  cert.quantity = Quantity::v;
  cert.params.tau = ta;
  cert.op = borrow(t);
  LpVector x = detail::starting_vector(t, x0, seed);
  if (x.field() != Field::real || std::any_of(x.values().begin(), x.values().end(), [](cplx c) { return c.real() < 0; })) {
    // T|x| >= |Tx| for positive T, so |x0| is at least as good.
    x = abs(x);
    cert.notes.emplace_back("x0 replaced by |x0|");
  }
  const auto tx = t.apply_values(x.values());
  const double c = std::pow(norm_pow(tx, t.space()->weights(), p), 1.0 / p);
  cert.norm_scale = c;
  if (c == 0.0) {
    cert.vectors.push_back(x);
    cert.achieved = v_quotient(t, x.values());
    cert.bound = 0.0;
    cert.notes.emplace_back("T x0 = 0; bound is trivial");
    return cert;
  }
  std::vector<cplx> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::max(x[i].real(), ta * tx[i].real() / c);
  LpVector yv(x.space(), x.exponent(), Field::real, std::move(y));
  const double ny = p_norm_pow(yv);
  cert.achieved = v_quotient(t, yv.values());
  cert.bound = c * tau_weight(p, ta);
  cert.identities.push_back(at_most("||y||^p <= 1 + tau^p", ny, 1.0 + std::pow(ta, p), 1e-12 * (1.0 + std::pow(ta, p))));
  cert.vectors.push_back(normalized(yv));
  return cert;
}

// ---------------------------------------------------------------------------
// Sign decompositions.

using Components = std::vector<std::vector<std::size_t>>;

/// One component per atom in the support of z.
inline Components atomwise_components(const LpVector& z) {
  Components c;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i].real() > 0.0) c.push_back({i});
  }
  return c;
}

struct SignTerm {
  double weight = 0.0;
  std::vector<int> signs;
  LpVector y;
};

struct SignDecomposition {
  LpVector z;
  std::vector<SignTerm> terms;
};

inline constexpr std::size_t kExhaustiveSignCap = 15;

namespace detail {

/// Ratio a_k = x / z on each component, after checking |x| <= z and constancy.
inline std::vector<double> component_ratios(const LpVector& z, const LpVector& x, const Components& comps) {
  require_same_space(z, x, "sign decomposition");
  if (z.field() != Field::real || x.field() != Field::real) {
    throw UnsupportedOperation("sign decomposition needs the real field");
  }
  const std::size_t n = z.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = z[i].real();
    if (zi < 0.0) throw PreconditionError("sign decomposition: z must be nonnegative");
    if (std::abs(x[i].real()) > zi * (1.0 + 1e-12)) throw PreconditionError("sign decomposition: |x| <= z violated");
  }
  std::vector<char> seen(n, 0);
  std::vector<double> a;
  a.reserve(comps.size());
  for (const auto& comp : comps) {
    if (comp.empty()) throw InvalidArgument("sign decomposition: empty component");
    double ak = 0.0;
    bool first = true;
    for (std::size_t i : comp) {
      if (i >= n) throw IndexError("sign decomposition: component index out of range");
      if (seen[i]) throw InvalidArgument("sign decomposition: components overlap");
      seen[i] = 1;
      const double zi = z[i].real();
      if (zi == 0.0) throw InvalidArgument("sign decomposition: component leaves the support of z");
      const double r = std::clamp(x[i].real() / zi, -1.0, 1.0);
      if (first) {
        ak = r;
        first = false;
      } else if (std::abs(r - ak) > 1e-12) {
        throw PreconditionError("sign decomposition: x / z is not constant on a component");
      }
    }
    a.push_back(ak);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (z[i].real() > 0.0 && !seen[i]) throw InvalidArgument("sign decomposition: components must cover supp z");
  }
  return a;
}

inline std::vector<cplx> signed_copy(const LpVector& z, const Components& comps, const std::vector<int>& s) {
  std::vector<cplx> y(z.size());
  for (std::size_t k = 0; k < comps.size(); ++k) {
    for (std::size_t i : comps[k]) y[i] = static_cast<double>(s[k]) * z[i].real();
  }
  return y;
}

}  // namespace detail

/// x = sum_s w(s) y(s) over sign vectors s, with w(s) = prod_k (1 + s_k a_k) / 2
/// and y(s) = sum_k s_k z 1_{component k}. Zero-weight terms are dropped.
inline SignDecomposition sign_decomposition_full(const LpVector& z, const LpVector& x, Components comps = {}) {
  if (comps.empty()) comps = atomwise_components(z);
  const auto a = detail::component_ratios(z, x, comps);
  const std::size_t m = a.size();
  if (m > kExhaustiveSignCap) throw ResourceError("sign_decomposition_full: too many components");
  SignDecomposition out{z, {}};
  const std::size_t count = std::size_t{1} << m;
  std::vector<int> s(m);
  for (std::size_t mask = 0; mask < count; ++mask) {
    double w = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      s[k] = (mask >> k) & 1U ? -1 : 1;
      w *= (1.0 + s[k] * a[k]) / 2.0;
    }
    if (w == 0.0) continue;
    out.terms.push_back({w, s, z.with_values(detail::signed_copy(z, comps, s))});
  }
  return out;
}

struct SignSelection {
  LpVector y;
  double achieved = 0.0;
  /// score(x), the value the selection has to reach.
  double target = 0.0;
  bool exhaustive = true;
  bool success = true;
  std::size_t evaluations = 0;
};

class SelectionFailure : public ResourceError {
 public:
  explicit SelectionFailure(SignSelection best)
      : ResourceError("best_sign_selection: sampling budget exhausted"), best_(std::move(best)) {}
  const SignSelection& best() const { return best_; }

 private:
  SignSelection best_;
};

using ScoreFn = std::function<double(std::span<const cplx>)>;

/// A y with |y| = z and score(y) >= score(x) - epsilon. Exhaustive up to
/// kExhaustiveSignCap components; beyond that, samples signs from the product
/// distribution of the full decomposition and polishes with greedy flips.
/// `success` is false when the budget ran out short of the target.
inline SignSelection best_sign_selection(const LpVector& z, const LpVector& x, const ScoreFn& score,
                                         double epsilon = 0.0, Components comps = {}, std::uint64_t seed = 0) {
  if (comps.empty()) comps = atomwise_components(z);
  const auto a = detail::component_ratios(z, x, comps);
  const std::size_t m = a.size();
  const double target = score(x.values());
  const double slack = epsilon + 1e-12 * std::max(1.0, std::abs(target));

  std::vector<int> s(m, 1), best_s(m, 1);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t evals = 1;
  auto eval = [&](const std::vector<int>& signs) {
    ++evals;
    return score(detail::signed_copy(z, comps, signs));
  };

  SignSelection out{z, 0.0, target, m <= kExhaustiveSignCap, false, 0};
  if (m <= kExhaustiveSignCap) {
    const std::size_t count = std::size_t{1} << m;
    for (std::size_t mask = 0; mask < count; ++mask) {
      for (std::size_t k = 0; k < m; ++k) s[k] = (mask >> k) & 1U ? -1 : 1;
      const double v = eval(s);
      if (v > best) {
        best = v;
        best_s = s;
      }
    }
  } else {
    Rng rng(derive_seed(seed, 0x5157));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t budget =
        std::min<std::size_t>(10 * (std::size_t{1} << std::min<std::size_t>(m, 20)), 1000000);
    for (std::size_t b = 0; b < budget && best < target; ++b) {
      for (std::size_t k = 0; k < m; ++k) s[k] = u(rng) < (1.0 + a[k]) / 2.0 ? 1 : -1;
      const double v = eval(s);
      if (v > best) {
        best = v;
        best_s = s;
      }
    }
    for (bool improved = true; improved && best < target;) {
      improved = false;
      for (std::size_t k = 0; k < m; ++k) {
        s = best_s;
        s[k] = -s[k];
        const double v = eval(s);
        if (v > best) {
          best = v;
          best_s = s;
          improved = true;
        }
      }
    }
  }
  out.y = z.with_values(detail::signed_copy(z, comps, best_s));
  out.achieved = best;
  out.evaluations = evals;
  out.success = best >= target - slack;
  return out;
}

// ---------------------------------------------------------------------------
// Absolute numerical radius.

/// Real-field construction: A = {|x0| >= tau |T'x0|}, z = |x0|_A + tau |T'x0|_B,
/// y = best sign choice for f(u) = int |T'x0|^(p-1) u. Certifies
/// |v|(T) >= tau-weight * ||T x0|| (times 1 - epsilon when sampling was needed).
inline WitnessCertificate abs_radius_witness_real(const LpOperator& t, std::optional<double> tau = std::nullopt,
                                                  double epsilon = 0.0, std::optional<LpVector> x0 = std::nullopt,
                                                  std::uint64_t seed = 0) {
  detail::require_real(t, "abs_radius_witness_real");
  const double p = t.exponent().p();
  const double ta = tau.value_or(tau_star(t.exponent()));
  detail::check_tau(ta);
  const auto w = t.space()->weights();
  WitnessCertificate cert;
  cert.quantity = Quantity::abs_v;
  cert.params.tau = ta;
  cert.params.epsilon = epsilon;
  cert.op = borrow(t);

  const LpVector x = detail::starting_vector(t, x0, seed);
  const auto tx = t.apply_values(x.values());
  const double c = std::pow(norm_pow(tx, w, p), 1.0 / p);
  cert.norm_scale = c;
  if (c == 0.0) {
    cert.vectors.push_back(x);
    cert.achieved = abs_quotient(t, x.values());
    cert.notes.emplace_back("T x0 = 0; bound is trivial");
    return cert;
  }
  const std::size_t n = x.size();
  std::vector<double> tn(n);
  for (std::size_t i = 0; i < n; ++i) tn[i] = std::abs(tx[i]) / c;
  std::vector<cplx> zv(n);
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = std::abs(x[i]);
    zv[i] = xi >= ta * tn[i] ? xi : ta * tn[i];
    min_gap = std::min(min_gap, zv[i].real() - ta * tn[i]);
  }
  const LpVector z = x.with_values(std::move(zv));

  std::vector<double> fw(n);
  for (std::size_t i = 0; i < n; ++i) fw[i] = abs_pow(tn[i], p - 1.0) * w[i];
  ScoreFn score = [&](std::span<const cplx> u) {
    const auto tu = t.apply_values(u);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += fw[i] * std::abs(tu[i]);
    return s / c;
  };
  SignSelection sel = best_sign_selection(z, x, score, epsilon, {}, seed);
  if (!sel.success) throw SelectionFailure(std::move(sel));

  cert.exhaustive = sel.exhaustive;
  const double eps_used = sel.exhaustive ? 0.0 : epsilon;
  const double zp = p_norm_pow(z);
  cert.achieved = abs_quotient(t, sel.y.values());
  cert.bound = c * tau_weight(p, ta) * (1.0 - eps_used);
  cert.identities.push_back(at_least("z >= tau |T'x0|", min_gap, 0.0, 0.0));
  cert.identities.push_back(at_most("||z||^p <= 1 + tau^p", zp, 1.0 + std::pow(ta, p), 1e-12 * (1.0 + std::pow(ta, p))));
  cert.identities.push_back(at_least("f(|T'y|) >= f(|T'x0|) - eps", sel.achieved, 1.0 - eps_used, 1e-12));
  cert.vectors.push_back(normalized(sel.y));
  return cert;
}

/// Complex-field construction with the two phase functions theta_1, theta_2 on
/// B that average to x0 and have modulus tau |T'x0|. Certifies the same bound
/// as the real case through the better of y_1 = x_A + theta_1 and y_2 = x_A + theta_2.
inline WitnessCertificate abs_radius_witness_complex(const LpOperator& t, std::optional<double> tau = std::nullopt,
                                                     std::optional<LpVector> x0 = std::nullopt,
                                                     std::uint64_t seed = 0) {
  if (t.field() != Field::complex) throw UnsupportedOperation("abs_radius_witness_complex needs the complex field");
  const double p = t.exponent().p();
  const double ta = tau.value_or(tau_star(t.exponent()));
  detail::check_tau(ta);
  const auto w = t.space()->weights();
  WitnessCertificate cert;
  cert.quantity = Quantity::abs_v;
  cert.params.tau = ta;
  cert.op = borrow(t);

  LpVector x = detail::starting_vector(t, x0, seed);
  if (x.field() == Field::real) x = LpVector(x.space(), x.exponent(), Field::complex, {x.values().begin(), x.values().end()});
  const auto tx = t.apply_values(x.values());
  const double c = std::pow(norm_pow(tx, w, p), 1.0 / p);
  cert.norm_scale = c;
  if (c == 0.0) {
    cert.vectors.push_back(x);
    cert.achieved = abs_quotient(t, x.values());
    cert.notes.emplace_back("T x0 = 0; bound is trivial");
    return cert;
  }
  const std::size_t n = x.size();
  std::vector<cplx> y1(n), y2(n);
  double recon = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double big = ta * std::abs(tx[i]) / c;
    const double r = std::abs(x[i]);
    if (r >= big) {
      y1[i] = y2[i] = x[i];
    } else if (r == 0.0) {
      y1[i] = big;
      y2[i] = -big;
    } else {
      const cplx ph = x[i] / r;
      const double h = std::sqrt(big * big - r * r);
      y1[i] = ph * cplx(r, h);
      y2[i] = ph * cplx(r, -h);
      recon = std::max(recon, std::abs(0.5 * y1[i] + 0.5 * y2[i] - x[i]));
    }
    min_gap = std::min({min_gap, std::abs(y1[i]) - big, std::abs(y2[i]) - big});
  }
  const double q1 = abs_quotient(t, y1);
  const double q2 = abs_quotient(t, y2);

  std::vector<double> fw(n);
  for (std::size_t i = 0; i < n; ++i) fw[i] = abs_pow(std::abs(tx[i]) / c, p - 1.0) * w[i];
  auto f_of_abs = [&](const std::vector<cplx>& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += fw[i] * std::abs(u[i]);
    return s;
  };
  const auto ty1 = t.apply_values(y1);
  const auto ty2 = t.apply_values(y2);
  const double avg = 0.5 * (f_of_abs(ty1) + f_of_abs(ty2)) / c;

  LpVector v1(x.space(), x.exponent(), Field::complex, std::move(y1));
  LpVector v2(x.space(), x.exponent(), Field::complex, std::move(y2));
  const double lim = 1.0 + std::pow(ta, p);
  cert.identities.push_back(equality("x = (theta_1 + theta_2) / 2 on B", recon, 0.0, 1e-12));
  cert.identities.push_back(at_least("|y_j| >= tau |T'x0|", min_gap, 0.0, 1e-12));
  cert.identities.push_back(at_most("||y_1||^p <= 1 + tau^p", p_norm_pow(v1), lim, 1e-12 * lim));
  cert.identities.push_back(at_most("||y_2||^p <= 1 + tau^p", p_norm_pow(v2), lim, 1e-12 * lim));
  cert.identities.push_back(at_least("f(|T'y_1| + |T'y_2|) / 2 >= f(|T'x0|)", avg, 1.0, 1e-12));
  cert.achieved = std::max(q1, q2);
  cert.bound = c * tau_weight(p, ta);
  if (q1 >= q2) {
    cert.vectors = {normalized(v1), normalized(v2)};
  } else {
    cert.vectors = {normalized(v2), normalized(v1)};
  }
  return cert;
}

/// Dispatches on the operator's field.
inline WitnessCertificate abs_radius_witness(const LpOperator& t, std::optional<double> tau = std::nullopt,
                                             double epsilon = 0.0, std::optional<LpVector> x0 = std::nullopt,
                                             std::uint64_t seed = 0) {
  if (t.field() == Field::real) return abs_radius_witness_real(t, tau, epsilon, std::move(x0), seed);
  return abs_radius_witness_complex(t, tau, std::move(x0), seed);
}

// ---------------------------------------------------------------------------
// Rank-one operators.

/// Tz = (int f z) y. Builds z = lambda^(-1/p) x_A + conj(theta) (1-lambda)^(-1/p) tau y_B
/// on a refinement where A carries a lambda share of x^# y, |x|^p and |y|^p.
inline WitnessCertificate rank_one_witness(const LpVector& f, const LpVector& y,
                                           std::optional<double> lambda = std::nullopt,
                                           std::optional<double> tau = std::nullopt) {
  require_same_space(f, y, "rank_one_witness");
  if (!f.exponent().conjugate_to(y.exponent())) throw InvalidArgument("rank_one_witness: f must lie in L_q");
  const Exponent e = y.exponent();
  const double p = e.p();
  const double lam = lambda.value_or(1.0 / e.q());
  const double ta = tau.value_or(tau_star(e));
  if (!(lam > 0.0 && lam < 1.0)) throw InvalidArgument("rank_one_witness: lambda must lie in (0,1)");
  detail::check_tau(ta);
  const double nf = p_norm(f);
  const double ny = p_norm(y);
  if (nf == 0.0 || ny == 0.0) throw InvalidArgument("rank_one_witness: zero operator");

  WitnessCertificate cert;
  cert.quantity = Quantity::v;
  cert.params.tau = ta;
  cert.params.lambda = lam;
  cert.norm_scale = nf * ny;
  if (std::abs(nf - 1.0) > 1e-12 || std::abs(ny - 1.0) > 1e-12) {
    cert.notes.emplace_back("f and y normalized; achieved and bound scaled by ||f||_q ||y||_p");
  }
  const Field field = (f.field() == Field::complex || y.field() == Field::complex) ? Field::complex : Field::real;
  const auto fh = (1.0 / nf) * f;
  const auto yh = (1.0 / ny) * y;
  // x is the unit vector normed by f: x^# = f / ||f||.
  const auto xv = sharp_values(fh.values(), e.q());
  const std::size_t n = y.size();
  const auto w = y.space()->weights();

  const cplx pair = integrate_product(fh.values(), yh.values(), w);
  const double delta = std::abs(pair);
  const cplx theta = delta == 0.0 ? cplx(1.0) : pair / delta;

  std::vector<cplx> prod(n), xp(n), ypw(n);
  for (std::size_t i = 0; i < n; ++i) {
    prod[i] = fh[i] * yh[i];
    xp[i] = abs_pow(std::abs(xv[i]), p);
    ypw[i] = abs_pow(std::abs(yh[i]), p);
  }
  const auto part = lambda_partition(*y.space(), {prod, xp, ypw}, lam);
  const auto& fine = part.space;
  const auto xr = replicate<cplx>(xv, part.refinement);
  const auto yr = replicate<cplx>(yh.values(), part.refinement);
  const auto fr = replicate<cplx>(fh.values(), part.refinement);
  const auto fw = fine->weights();

  const double ca = std::pow(lam, -1.0 / p);
  const cplx cb = std::conj(theta) * std::pow(1.0 - lam, -1.0 / p) * ta;
  std::vector<cplx> z(fine->size());
  for (std::size_t i : part.a.indices()) z[i] = ca * xr[i];
  for (std::size_t i : part.b.indices()) z[i] = cb * yr[i];

  auto op = make_operator(fine, e, field, RankOneForm{fr, yr});
  cert.op = scaled(op, nf * ny);
  const LpVector zv(fine, e, field, z);

  double xa = 0.0, ya = 0.0;
  cplx pa{};
  for (std::size_t i : part.a.indices()) {
    xa += abs_pow(std::abs(xr[i]), p) * fw[i];
    ya += abs_pow(std::abs(yr[i]), p) * fw[i];
    pa += fr[i] * yr[i] * fw[i];
  }
  const double zp = p_norm_pow(zv);
  const cplx i1 = integrate_product(fr, z, fw);
  const cplx i2 = integrate_product(sharp_values(z, p), yr, fw);
  const double closed = std::abs(i1) * std::abs(i2) / zp;

  cert.identities.push_back(equality("||x_A||^p = lambda", xa, lam, 1e-12));
  cert.identities.push_back(equality("||y_A||^p = lambda", ya, lam, 1e-12));
  cert.identities.push_back(equality("int_A x^# y = lambda theta delta", std::abs(pa - lam * theta * delta), 0.0, 1e-12));
  cert.identities.push_back(equality("||z||^p = 1 + tau^p", zp, 1.0 + std::pow(ta, p), 1e-12 * (1.0 + std::pow(ta, p))));
  cert.identities.push_back(at_least("|int x^# z| >= lambda^(1/q)", std::abs(i1), std::pow(lam, 1.0 / e.q()), 1e-12));
  cert.identities.push_back(at_least("|int z^# y| >= (1-lambda)^(1/p) tau^(p-1)", std::abs(i2),
                                     std::pow(1.0 - lam, 1.0 / p) * std::pow(ta, p - 1.0), 1e-12));
  cert.achieved = v_quotient(*cert.op, z);
  cert.identities.push_back(
      equality("achieved = |int x^# z| |int z^# y| / ||z||^p", cert.achieved, nf * ny * closed, 1e-12 * nf * ny));
  cert.bound = nf * ny * std::pow(lam, 1.0 / e.q()) * std::pow(1.0 - lam, 1.0 / p) * tau_weight(p, ta);
  cert.vectors.push_back(normalized(zv));
  return cert;
}

inline WitnessCertificate rank_one_witness(const LpOperator& t, std::optional<double> lambda = std::nullopt,
                                           std::optional<double> tau = std::nullopt) {
  const auto* ro = std::get_if<RankOneForm>(&t.form());
  if (!ro) throw PreconditionError("rank_one_witness: operator is not in rank-one form");
  const Field fld = t.field();
  LpVector f(t.space(), t.exponent().dual(), fld, ro->f);
  LpVector y(t.space(), t.exponent(), fld, ro->y);
  return rank_one_witness(f, y, lambda, tau);
}

/// Tz = <z, x1> x2 on real l_2: x = (x1 + theta x2) / ||x1 + theta x2|| reaches
/// (1 + |<x1, x2>|) / 2.
inline WitnessCertificate hilbert_rank_one_witness(const LpVector& x1_in, const LpVector& x2_in) {
  require_same_space(x1_in, x2_in, "hilbert_rank_one_witness");
  if (std::abs(x1_in.exponent().p() - 2.0) > 1e-15 || std::abs(x2_in.exponent().p() - 2.0) > 1e-15) {
    throw UnsupportedOperation("hilbert_rank_one_witness needs p = 2");
  }
  if (x1_in.field() != Field::real || x2_in.field() != Field::real) {
    throw UnsupportedOperation("hilbert_rank_one_witness needs the real field");
  }
  WitnessCertificate cert;
  cert.quantity = Quantity::v;
  if (std::abs(p_norm(x1_in) - 1.0) > 1e-12 || std::abs(p_norm(x2_in) - 1.0) > 1e-12) {
    cert.notes.emplace_back("x1 and x2 normalized");
  }
  const LpVector x1 = normalized(x1_in);
  const LpVector x2 = normalized(x2_in);
  const auto w = x1.space()->weights();
  const double c = integrate_product(x1.values(), x2.values(), w).real();
  cert.op = make_operator(x1.space(), x1.exponent(), Field::real,
                          RankOneForm{{x1.values().begin(), x1.values().end()}, {x2.values().begin(), x2.values().end()}});
  cert.bound = 0.5;
  const double closed = (1.0 + std::abs(c)) / 2.0;
  std::optional<LpVector> best;
  double best_val = -1.0;
  double best_theta = 1.0;
  for (double theta : {1.0, -1.0}) {
    const auto s = x1 + theta * x2;
    if (p_norm(s) <= 1e-8) continue;
    const auto x = normalized(s);
    const double val = v_quotient(*cert.op, x.values());
    if (val > best_val + 1e-15) {
      best_val = val;
      best = x;
      best_theta = theta;
    }
  }
  if (std::abs(std::abs(c) - 1.0) <= 1e-12) {
    // x2 = +-x1: x1 itself is exactly self-norming for T.
    best = x1;
    best_val = v_quotient(*cert.op, x1.values());
    cert.notes.emplace_back("x2 = +-x1; degenerate witness x1");
  } else {
    cert.notes.emplace_back(best_theta > 0 ? "theta = +1" : "theta = -1");
  }
  cert.achieved = best_val;
  cert.identities.push_back(equality("achieved = (1 + |<x1,x2>|) / 2", best_val, closed, 1e-12));
  cert.vectors.push_back(*best);
  return cert;
}

}  // namespace lpnr
