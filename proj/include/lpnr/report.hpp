#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lpnr/lp_core.hpp"
#include "lpnr/narrow.hpp"
#include "lpnr/objectives.hpp"
#include "lpnr/operators.hpp"
#include "lpnr/radius.hpp"
#include "lpnr/witness.hpp"

namespace lpnr {

struct ReportOptions {
  std::uint64_t seed = 0;
  int restarts = 8;
  NormOptions norm;
  /// Slack allowed below a certificate bound, relative to max(1, bound).
  double tolerance = 1e-9;
  /// Run the narrow construction with lambda = j / 2^n on dyadic spaces.
  std::optional<int> narrow_n;
  double narrow_epsilon = 1e-6;
  int narrow_depth_cap = kDefaultNarrowDepthCap;
};

struct BoundCheck {
  std::string name;
  std::string statement;
  double achieved = 0.0;
  double bound = 0.0;
  bool passed = true;
};

struct RatioReport {
  double p = 2.0;
  Field field = Field::real;
  std::size_t dim = 0;
  std::string kind;
  bool positive = false;
  bool rank_one = false;

  double norm = 0.0;
  double v = 0.0;
  double abs_v = 0.0;
  double v_ratio = 0.0;
  double abs_ratio = 0.0;

  double kappa = 0.0;
  double kappa_sq = 0.0;
  double m_p = 0.0;
  double narrow_bound = 0.0;

  std::vector<BoundCheck> checks;
  std::vector<std::pair<std::string, WitnessCertificate>> certificates;
  /// A witness construction fell short of the bound its proof guarantees.
  bool certified_violation = false;
  /// A sign-selection budget or narrow oracle ran out.
  bool budget_failure = false;
  std::vector<std::string> notes;
};

namespace detail {

inline void add_certificate(RatioReport& r, std::string name, std::string statement, WitnessCertificate cert,
                            double tol) {
  BoundCheck c{name, std::move(statement), cert.achieved, cert.bound, true};
  c.passed = cert.achieved >= cert.bound - tol * std::max(1.0, std::abs(cert.bound)) && cert.identities_hold();
  if (!c.passed) r.certified_violation = true;
  r.checks.push_back(std::move(c));
  r.certificates.emplace_back(std::move(name), std::move(cert));
}

}  // namespace detail

/// hilbert_rank_one_witness for a rank-one operator on real l_2, in the units of T.
inline WitnessCertificate hilbert_witness(const LpOperator& t) {
  const auto* ro = std::get_if<RankOneForm>(&t.form());
  if (!ro) throw PreconditionError("hilbert_witness: operator is not in rank-one form");
  LpVector f(t.space(), t.exponent().dual(), t.field(), ro->f);
  LpVector y(t.space(), t.exponent(), t.field(), ro->y);
  const double scale = p_norm(f) * p_norm(y);
  if (!(scale > 0.0)) throw PreconditionError("hilbert_witness: zero operator");
  auto cert = hilbert_rank_one_witness(f, y);
  cert.achieved *= scale;
  cert.bound *= scale;
  cert.norm_scale = scale;
  cert.op = borrow(t);
  return cert;
}

/// Closest j / 2^n to lambda with 1 <= j < 2^n.
inline long long nearest_dyadic(double lambda, int n) {
  const long long count = 1LL << n;
  return std::clamp<long long>(std::llround(lambda * static_cast<double>(count)), 1, count - 1);
}

/// Norm, v and |v| estimates, the reference constants, and every witness
/// certificate that applies to T. Violations are recorded, never thrown.
inline RatioReport ratio_report(const OperatorPtr& tp, const ReportOptions& opt = {}) {
  const LpOperator& t = *tp;
  const Exponent e = t.exponent();
  RatioReport r;
  r.p = e.p();
  r.field = t.field();
  r.dim = t.size();
  r.kind = std::string(t.kind());
  r.positive = t.field() == Field::real && is_positive(t);
  r.rank_one = t.is_rank_one();
  r.kappa = kappa(e);
  r.kappa_sq = r.kappa * r.kappa;
  r.m_p = m_p(e);
  r.narrow_bound = narrow_bound_real(e);

  NormOptions nopt = opt.norm;
  nopt.seed = opt.seed;
  const auto norm = op_norm_lower(t, nopt);
  r.norm = norm.estimate;
  const double tol = opt.tolerance;

  if (r.norm == 0.0) {
    r.notes.emplace_back("zero operator: every bound holds trivially");
  } else {
    try {
      detail::add_certificate(r, "abs_v", "|v|(T) >= kappa_p ||T||",
                              abs_radius_witness(t, std::nullopt, 0.0, norm.witness, opt.seed), tol);
    } catch (const SelectionFailure& ex) {
      r.budget_failure = true;
      r.notes.emplace_back(ex.what());
    }
    if (r.positive) {
      detail::add_certificate(r, "positive", "v(T) >= kappa_p ||T|| for positive T",
                              positive_witness(t, norm.witness, std::nullopt, opt.seed), tol);
    }
    if (r.rank_one) {
      detail::add_certificate(r, "rank_one", "v(T) >= kappa_p^2 ||T|| for rank-one T", rank_one_witness(t), tol);
      if (t.field() == Field::real && std::abs(e.p() - 2.0) < 1e-15) {
        detail::add_certificate(r, "hilbert_rank_one", "v(T) >= ||T|| / 2 for rank-one T on real l_2",
                                hilbert_witness(t), tol);
      }
    }
    if (opt.narrow_n && is_dyadic_unit_space(*t.space())) {
      const int n = *opt.narrow_n;
      const long long j = nearest_dyadic(1.0 / e.q(), n);
      const double tau = t.field() == Field::complex ? tau_star(e) : narrow_bound_real_search(e).argmax;
      NarrowWitnessOptions wopt;
      wopt.epsilon = opt.narrow_epsilon;
      wopt.norm = nopt;
      try {
        RademacherOracle oracle(opt.narrow_depth_cap);
        detail::add_certificate(r, "narrow", "v(T) >= narrow bound ||T|| for narrow T",
                                narrow_radius_witness(tp, j, n, tau > 0.0 ? tau : tau_star(e), oracle, wopt), tol);
      } catch (const OracleFailure& ex) {
        r.budget_failure = true;
        r.notes.emplace_back(ex.what());
      }
    }
  }

  RadiusOptions ropt;
  ropt.seed = opt.seed;
  ropt.restarts = opt.restarts;
  ropt.use_witness_seeds = false;
  ropt.extra_starts.push_back(norm.witness);
  for (const auto& [name, cert] : r.certificates) {
    for (const auto& x : cert.vectors) {
      if (x.size() == t.size() && same_space(*x.space(), *t.space())) ropt.extra_starts.push_back(x);
    }
  }
  const auto est = radius_estimates(t, ropt);
  r.v = est.v.value;
  r.abs_v = est.abs_v.value;
  if (r.norm > 0.0) {
    r.v_ratio = r.v / r.norm;
    r.abs_ratio = r.abs_v / r.norm;
  }
  return r;
}

}  // namespace lpnr
