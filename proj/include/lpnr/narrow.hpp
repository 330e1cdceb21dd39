#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lpnr/errors.hpp"
#include "lpnr/lp_core.hpp"
#include "lpnr/measure.hpp"
#include "lpnr/objectives.hpp"
#include "lpnr/operators.hpp"
#include "lpnr/witness.hpp"

namespace lpnr {

inline constexpr int kDefaultNarrowDepthCap = 16;

/// 2^L atoms of mass 2^-L each: the spaces narrow constructions run on.
inline bool is_dyadic_unit_space(const MeasureSpace& space) {
  const auto lvl = dyadic_level(space);
  return lvl && space.weight(0) == std::ldexp(1.0, -*lvl);
}

/// An operator on a dyadic base space together with its J T P extension to a
/// finer dyadic level. Narrow routines keep their sets and vectors at the
/// current level and lift them whenever the level grows.
class NarrowWorkspace {
 public:
  explicit NarrowWorkspace(OperatorPtr base) : base_(std::move(base)) {
    if (!is_dyadic_unit_space(*base_->space())) {
      throw InvalidArgument("narrow workspace: operator must live on a dyadic space of total mass 1");
    }
    base_level_ = level_ = *dyadic_level(*base_->space());
    space_ = base_->space();
    op_ = base_;
  }

  int base_level() const { return base_level_; }
  int level() const { return level_; }
  const SpacePtr& space() const { return space_; }
  const OperatorPtr& op() const { return op_; }
  const OperatorPtr& base() const { return base_; }
  const Exponent& exponent() const { return base_->exponent(); }
  static int level_of(std::size_t n) {
    if (!std::has_single_bit(n)) throw InvalidArgument("narrow workspace: size is not a power of two");
    return std::countr_zero(n);
  }
  Field field() const { return base_->field(); }

  void refine_to(int level) {
    if (level <= level_) return;
    if (level > kMaxDyadicLevel) throw ResourceError("narrow workspace: level above the cap");
    space_ = dyadic_space(level);
    op_ = extend_to_refinement(base_, space_, dyadic_refinement(base_level_, level));
    level_ = level;
  }

  /// Lifts a set or vector from whatever dyadic level its size implies to the current level.
  MeasurableSet lift(const MeasurableSet& s) const {
    const int from = level_of(s.universe());
    if (from == level_) return s;
    return lift_set(s, dyadic_refinement(from, level_));
  }

  std::vector<cplx> lift(std::span<const cplx> v) const {
    const int from = level_of(v.size());
    if (from == level_) return {v.begin(), v.end()};
    return replicate<cplx>(v, dyadic_refinement(from, level_));
  }

  std::vector<cplx> apply(std::span<const cplx> x) const { return op_->apply_values(x); }

  double norm(std::span<const cplx> v) const {
    const double s = norm_pow(v, space_->weights(), exponent().p());
    return s == 0.0 ? 0.0 : std::pow(s, 1.0 / exponent().p());
  }

 private:
  OperatorPtr base_;
  OperatorPtr op_;
  SpacePtr space_;
  int base_level_ = 0;
  int level_ = 0;
};

/// Rademacher function of the given depth on A: +1 on even depth-level dyadic
/// blocks, -1 on odd ones, 0 off A.
inline LpVector rademacher(const SpacePtr& space, const MeasurableSet& a, int depth, Exponent e,
                           Field field = Field::real) {
  const auto lvl = dyadic_level(*space);
  if (!lvl) throw InvalidArgument("rademacher: space is not dyadic");
  if (a.universe() != space->size()) throw InvalidArgument("rademacher: set belongs to another space");
  if (depth > *lvl) throw InvalidArgument("rademacher: depth exceeds the space level");
  if (depth <= dyadic_resolution(a, *lvl)) throw InvalidArgument("rademacher: depth must exceed the resolution of A");
  std::vector<cplx> v(space->size());
  const int shift = *lvl - depth;
  for (std::size_t i : a.indices()) v[i] = ((i >> shift) & 1U) ? -1.0 : 1.0;
  return LpVector(space, e, field, std::move(v));
}

struct OracleResult {
  bool success = false;
  /// Sign function on A at the workspace level reached by the query.
  std::optional<LpVector> x;
  int depth = 0;
  double norm = std::numeric_limits<double>::infinity();
  double best_norm = std::numeric_limits<double>::infinity();
};

/// Produces x with x^2 = 1_A, int x = 0 and ||T x|| < epsilon.
class NarrowOracle {
 public:
  virtual ~NarrowOracle() = default;
  /// `a` is given at the workspace's current level; the query may refine the workspace.
  virtual OracleResult query(NarrowWorkspace& ws, const MeasurableSet& a, double epsilon) const = 0;
};

/// Tries Rademacher functions of increasing depth, refining the workspace when
/// needed, up to `depth_cap`.
class RademacherOracle : public NarrowOracle {
 public:
  explicit RademacherOracle(int depth_cap = kDefaultNarrowDepthCap, bool allow_refine = true)
      : depth_cap_(depth_cap), allow_refine_(allow_refine) {}

  int depth_cap() const { return depth_cap_; }

  OracleResult query(NarrowWorkspace& ws, const MeasurableSet& a_in, double epsilon) const override {
    OracleResult out;
    MeasurableSet a = ws.lift(a_in);
    const int res = dyadic_resolution(a, ws.level());
    for (int d = res + 1; d <= depth_cap_; ++d) {
      if (d > ws.level()) {
        if (!allow_refine_) break;
        ws.refine_to(d);
        a = ws.lift(a);
      }
      auto r = rademacher(ws.space(), a, d, ws.exponent(), Field::real);
      // An infinite budget (zero coefficient) needs no norm evaluation.
      const double nt = std::isinf(epsilon) ? 0.0 : ws.norm(ws.apply(r.values()));
      out.best_norm = std::min(out.best_norm, nt);
      if (nt < epsilon || a.empty()) {
        out.success = true;
        out.x = std::move(r);
        out.depth = d;
        out.norm = nt;
        return out;
      }
    }
    return out;
  }

 private:
  int depth_cap_;
  bool allow_refine_;
};

/// Wraps a user-supplied strategy.
class FunctionOracle : public NarrowOracle {
 public:
  using Fn = std::function<OracleResult(NarrowWorkspace&, const MeasurableSet&, double)>;
  explicit FunctionOracle(Fn fn) : fn_(std::move(fn)) {}
  OracleResult query(NarrowWorkspace& ws, const MeasurableSet& a, double epsilon) const override {
    return fn_(ws, a, epsilon);
  }

 private:
  Fn fn_;
};

class OracleFailure : public Error {
 public:
  OracleFailure(std::size_t cls, std::size_t part, double best_norm, double budget)
      : Error("narrow oracle failed on cell (" + std::to_string(cls) + ", " + std::to_string(part) +
              "): best ||Tx|| = " + std::to_string(best_norm) + ", needed < " + std::to_string(budget)),
        cls_(cls), part_(part), best_norm_(best_norm), budget_(budget) {}
  std::size_t value_class() const { return cls_; }
  std::size_t part() const { return part_; }
  double best_norm() const { return best_norm_; }
  double budget() const { return budget_; }

 private:
  std::size_t cls_, part_;
  double best_norm_, budget_;
};

/// Parts of a refined partition at the workspace level reached, with the
/// identities they were certified against.
struct RefinedPartition {
  std::vector<MeasurableSet> parts;
  SpacePtr space;
  int level = 0;
  std::vector<CertifiedIdentity> identities;
  /// Sum over cells of |a_k| ||T u_{k,j}|| (narrow_split only).
  double budget_sum = 0.0;

  bool identities_hold() const {
    return std::all_of(identities.begin(), identities.end(), [](const auto& c) { return c.holds(); });
  }
  PartitionPlan plan() const { return PartitionPlan(space, parts); }
};

namespace detail {

/// Groups the atoms of `domain` by exact value of v.
inline std::vector<std::pair<cplx, std::vector<std::size_t>>> value_classes(std::span<const cplx> v,
                                                                            const MeasurableSet& domain) {
  auto less = [](const cplx& a, const cplx& b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  };
  std::map<cplx, std::vector<std::size_t>, decltype(less)> m(less);
  for (std::size_t i : domain.indices()) m[v[i]].push_back(i);
  std::vector<std::pair<cplx, std::vector<std::size_t>>> out;
  for (auto& [val, idx] : m) out.emplace_back(val, std::move(idx));
  return out;
}

inline std::vector<cplx> restricted(std::span<const cplx> v, const MeasurableSet& s) {
  std::vector<cplx> out(v.size());
  for (std::size_t i : s.indices()) out[i] = v[i];
  return out;
}

inline double pnorm_pow(const NarrowWorkspace& ws, std::span<const cplx> v) {
  return norm_pow(v, ws.space()->weights(), ws.exponent().p());
}

inline double rel_tol(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }

}  // namespace detail

/// Splits `domain` (all of the space by default) into A, B with
/// ||x_A||^p = ||x_B||^p = ||x||^p / 2, mu(D_j n A) = mu(D_j n B) = mu(D_j) / 2 and
/// ||T x_A - T x / 2||, ||T x_B - T x / 2|| < epsilon. x, D and domain are at the
/// workspace's current level; the result is at the level reached.
inline RefinedPartition narrow_split(NarrowWorkspace& ws, std::span<const cplx> x_in, std::vector<MeasurableSet> d,
                                     double epsilon, const NarrowOracle& oracle,
                                     std::optional<MeasurableSet> domain_in = std::nullopt) {
  if (!(epsilon > 0.0)) throw InvalidArgument("narrow_split: epsilon must be positive");
  if (x_in.size() != ws.space()->size()) throw InvalidArgument("narrow_split: x has the wrong size");
  MeasurableSet domain = domain_in.value_or(MeasurableSet::all(ws.space()->size()));
  if (d.empty()) d.push_back(domain);
  for (const auto& dj : d) {
    if (dj.universe() != ws.space()->size()) throw InvalidArgument("narrow_split: part of D on another space");
  }
  std::vector<cplx> x = detail::restricted(x_in, domain);

  const auto classes = detail::value_classes(x, domain);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> part_of(ws.space()->size(), kNone);
  for (std::size_t j = 0; j < d.size(); ++j) {
    for (std::size_t i : d[j].indices()) {
      if (part_of[i] != kNone) throw InvalidArgument("narrow_split: parts of D overlap");
      part_of[i] = j;
    }
  }
  std::vector<char> part_used(d.size(), 0);
  for (std::size_t i : domain.indices()) {
    if (part_of[i] == kNone) throw InvalidArgument("narrow_split: D does not cover the domain");
    part_used[part_of[i]] = 1;
  }
  const auto ell = static_cast<std::size_t>(std::count(part_used.begin(), part_used.end(), 1));
  const double m_ell = static_cast<double>(classes.size() * std::max<std::size_t>(ell, 1));

  struct Cell {
    std::size_t k, j;
    cplx a;
    MeasurableSet e;
  };
  std::vector<Cell> cells;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    std::map<std::size_t, std::vector<std::size_t>> by_part;
    for (std::size_t i : classes[k].second) by_part[part_of[i]].push_back(i);
    for (auto& [j, idx] : by_part) cells.push_back({k, j, classes[k].first, MeasurableSet(std::move(idx), ws.space()->size())});
  }

  double budget_sum = 0.0;
  std::vector<std::size_t> plus, minus;
  std::size_t lifted_size = x.size();
  auto lift_all = [&]() {
    if (ws.space()->size() == lifted_size) return;
    x = ws.lift(x);
    domain = ws.lift(domain);
    for (auto& dj : d) dj = ws.lift(dj);
    for (auto& c : cells) c.e = ws.lift(c.e);
    for (auto* v : {&plus, &minus}) {
      const auto lifted = ws.lift(MeasurableSet(*v, lifted_size));
      v->assign(lifted.indices().begin(), lifted.indices().end());
    }
    lifted_size = x.size();
  };

  for (auto& cell : cells) {
    const double ak = std::abs(cell.a);
    const double budget = ak == 0.0 ? std::numeric_limits<double>::infinity() : 2.0 * epsilon / (m_ell * ak);
    const auto res = oracle.query(ws, cell.e, budget);
    if (!res.success) throw OracleFailure(cell.k, cell.j, res.best_norm, budget);
    lift_all();
    const auto& u = *res.x;
    for (std::size_t i : cell.e.indices()) (u[i].real() >= 0.0 ? plus : minus).push_back(i);
    budget_sum += ak == 0.0 ? 0.0 : ak * res.norm;
  }

  const std::size_t n = ws.space()->size();
  RefinedPartition out;
  out.parts = {MeasurableSet(plus, n), MeasurableSet(minus, n)};
  out.space = ws.space();
  out.level = ws.level();
  out.budget_sum = budget_sum;
  const auto& A = out.parts[0];
  const auto& B = out.parts[1];

  const double xp = detail::pnorm_pow(ws, x);
  const double xa = detail::pnorm_pow(ws, detail::restricted(x, A));
  const double xb = detail::pnorm_pow(ws, detail::restricted(x, B));
  out.identities.push_back(equality("(i) ||x_A||^p = ||x||^p / 2", xa, xp / 2.0, detail::rel_tol(xp)));
  out.identities.push_back(equality("(i) ||x_B||^p = ||x||^p / 2", xb, xp / 2.0, detail::rel_tol(xp)));
  const auto& sp = *ws.space();
  // D and the domain have been lifted alongside the cells.
  std::vector<double> in_d(d.size(), 0.0), in_a(d.size(), 0.0), in_b(d.size(), 0.0);
  std::vector<std::size_t> label(n, kNone);
  for (std::size_t j = 0; j < d.size(); ++j) {
    for (std::size_t i : d[j].indices()) label[i] = j;
  }
  for (std::size_t i : domain.indices()) in_d[label[i]] += sp.weight(i);
  for (std::size_t i : A.indices()) in_a[label[i]] += sp.weight(i);
  for (std::size_t i : B.indices()) in_b[label[i]] += sp.weight(i);
  double worst = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    worst = std::max({worst, std::abs(in_a[j] - in_d[j] / 2.0), std::abs(in_b[j] - in_d[j] / 2.0)});
  }
  out.identities.push_back(equality("(ii) mu(D_j n A) = mu(D_j n B) = mu(D_j) / 2", worst, 0.0, 1e-12 * sp.total_mass()));

  const auto ty = ws.apply(x);
  auto deviation = [&](const MeasurableSet& s) {
    auto t = ws.apply(detail::restricted(x, s));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] -= 0.5 * ty[i];
    return ws.norm(t);
  };
  out.identities.push_back(at_most("(iii) ||T x_A - T x / 2|| < eps", deviation(A), epsilon, 0.0));
  out.identities.push_back(at_most("(iii) ||T x_B - T x / 2|| < eps", deviation(B), epsilon, 0.0));
  out.identities.push_back(at_most("sum of cell budgets < 2 eps", budget_sum, 2.0 * epsilon, 0.0));
  return out;
}

/// Partition of the space into 2^n parts with ||x_{A_k}||^p = 2^-n ||x||^p,
/// ||y_{A_k}||^p = 2^-n ||y||^p and ||T x_{A_k} - 2^-n y|| < epsilon, y = T x.
inline RefinedPartition narrow_partition_2n(NarrowWorkspace& ws, std::span<const cplx> x_in, int n, double epsilon,
                                            const NarrowOracle& oracle) {
  if (n < 1) throw InvalidArgument("narrow_partition_2n: n must be >= 1");
  if (n > 24) throw ResourceError("narrow_partition_2n: n too large");
  if (!(epsilon > 0.0)) throw InvalidArgument("narrow_partition_2n: epsilon must be positive");
  std::vector<cplx> x = ws.lift(x_in);
  auto y_classes = [&](const MeasurableSet& within) {
    const auto y = ws.apply(ws.lift(x));
    std::vector<MeasurableSet> out;
    for (auto& [val, idx] : detail::value_classes(y, ws.lift(within))) out.emplace_back(std::move(idx), ws.space()->size());
    return out;
  };

  std::vector<MeasurableSet> parts =
      narrow_split(ws, x, y_classes(MeasurableSet::all(ws.space()->size())), epsilon, oracle).parts;
  for (int s = 1; s < n; ++s) {
    std::vector<MeasurableSet> lower, upper;
    for (const auto& part : parts) {
      const MeasurableSet ak = ws.lift(part);
      auto split = narrow_split(ws, detail::restricted(ws.lift(x), ak), y_classes(ak), epsilon / 2.0, oracle, ak);
      lower.push_back(std::move(split.parts[0]));
      upper.push_back(std::move(split.parts[1]));
    }
    parts = std::move(lower);
    parts.insert(parts.end(), upper.begin(), upper.end());
  }
  for (auto& v : parts) v = ws.lift(v);
  x = ws.lift(x);
  const auto y = ws.apply(x);

  RefinedPartition out;
  out.space = ws.space();
  out.level = ws.level();
  out.parts = std::move(parts);
  const double scale = std::ldexp(1.0, -n);
  const double xp = detail::pnorm_pow(ws, x);
  const double yp = detail::pnorm_pow(ws, y);
  double w1 = 0.0, w2 = 0.0, w3 = 0.0;
  for (const auto& a : out.parts) {
    const auto xa = detail::restricted(x, a);
    w1 = std::max(w1, std::abs(detail::pnorm_pow(ws, xa) - scale * xp));
    w2 = std::max(w2, std::abs(detail::pnorm_pow(ws, detail::restricted(y, a)) - scale * yp));
    auto t = ws.apply(xa);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] -= scale * y[i];
    w3 = std::max(w3, ws.norm(t));
  }
  out.identities.push_back(equality("(1) ||x_{A_k}||^p = 2^-n ||x||^p", w1, 0.0, detail::rel_tol(xp)));
  out.identities.push_back(equality("(2) ||y_{A_k}||^p = 2^-n ||y||^p", w2, 0.0, detail::rel_tol(yp)));
  out.identities.push_back(at_most("(3) ||T x_{A_k} - 2^-n y|| < eps", w3, epsilon, 0.0));
  return out;
}

struct LambdaSplit {
  RefinedPartition partition;  // parts = {A, B}
  double lambda = 0.0;
  /// x and y = T x at the partition's level.
  std::vector<cplx> x;
  std::vector<cplx> y;
};

/// A, B with ||x_A||^p = lambda ||x||^p, ||y_B||^p = (1 - lambda) ||y||^p and
/// ||T x_A - lambda y|| < epsilon, for lambda = j / 2^n.
inline LambdaSplit narrow_lambda_partition(NarrowWorkspace& ws, std::span<const cplx> x_in, long long j, int n,
                                           double epsilon, const NarrowOracle& oracle) {
  if (n < 1 || n > 24) throw InvalidArgument("narrow_lambda_partition: n out of range");
  const long long count = 1LL << n;
  if (j < 1 || j >= count) throw InvalidArgument("narrow_lambda_partition: need 1 <= j < 2^n");
  auto parts = narrow_partition_2n(ws, x_in, n, epsilon / static_cast<double>(j), oracle);
  LambdaSplit out;
  out.lambda = static_cast<double>(j) / static_cast<double>(count);
  out.x = ws.lift(x_in);
  out.y = ws.apply(out.x);
  const std::size_t sz = ws.space()->size();
  MeasurableSet a = MeasurableSet::none(sz), b = MeasurableSet::none(sz);
  for (long long k = 0; k < count; ++k) {
    auto& target = k < j ? a : b;
    target = set_union(target, parts.parts[static_cast<std::size_t>(k)]);
  }
  const double lam = out.lambda;
  const double xp = detail::pnorm_pow(ws, out.x);
  const double yp = detail::pnorm_pow(ws, out.y);
  auto& P = out.partition;
  P.space = ws.space();
  P.level = ws.level();
  P.identities = parts.identities;
  P.identities.push_back(
      equality("(A) ||x_A||^p = lambda ||x||^p", detail::pnorm_pow(ws, detail::restricted(out.x, a)), lam * xp,
               detail::rel_tol(xp)));
  P.identities.push_back(equality("(B) ||y_B||^p = (1 - lambda) ||y||^p",
                                  detail::pnorm_pow(ws, detail::restricted(out.y, b)), (1.0 - lam) * yp,
                                  detail::rel_tol(yp)));
  auto t = ws.apply(detail::restricted(out.x, a));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] -= lam * out.y[i];
  P.identities.push_back(at_most("(C) ||T x_A - lambda y|| < eps", ws.norm(t), epsilon, 0.0));
  P.parts = {std::move(a), std::move(b)};
  return out;
}

struct NarrowWitnessOptions {
  double epsilon = 1e-6;
  /// Round y = T x to this dyadic level and correct T by a rank-one term so
  /// that the corrected operator maps x to the rounded y exactly.
  std::optional<int> y_level;
  NormOptions norm;
  /// Phase grid that cross-checks the closed-form alignment (complex field).
  int phase_grid = 64;
};

/// Certificate for v(T) built from a lambda-partition A, B of a norm witness x
/// and z_theta = lambda^(-1/p) x_A + theta (1-lambda)^(-1/p) tau y_B, y = T x.
/// The bound is evaluated from measured quantities on the partition: the
/// defect ||T x_A - lambda y|| and, for the real field, |int_A x^# T y_B|.
inline WitnessCertificate narrow_radius_witness(const OperatorPtr& t, long long j, int n, double tau,
                                                const NarrowOracle& oracle, const NarrowWitnessOptions& opt = {}) {
  if (!(tau > 0.0)) throw InvalidArgument("narrow_radius_witness: tau must be positive");
  const Exponent e = t->exponent();
  const double p = e.p();
  const double q = e.q();
  WitnessCertificate cert;
  cert.quantity = Quantity::v;
  cert.params.tau = tau;
  cert.params.epsilon = opt.epsilon;

  const auto norm = op_norm_lower(*t, opt.norm);
  const double c = norm.estimate;
  if (c == 0.0) throw PreconditionError("narrow_radius_witness: zero operator");
  cert.norm_scale = c;
  OperatorPtr tn = scaled(t, 1.0 / c);
  std::vector<cplx> x(norm.witness.values().begin(), norm.witness.values().end());

  if (opt.y_level) {
    const int base = *dyadic_level(*t->space());
    if (*opt.y_level < 0 || *opt.y_level > base) throw InvalidArgument("narrow_radius_witness: bad y_level");
    const auto y = tn->apply_values(x);
    const auto r = dyadic_refinement(*opt.y_level, base);
    std::vector<cplx> avg(r.coarse_size);
    for (std::size_t i = 0; i < y.size(); ++i) avg[r.parent[i]] += y[i];
    const double per = std::ldexp(1.0, base - *opt.y_level);
    std::vector<cplx> diff(y.size());
    double dn = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      diff[i] = y[i] - avg[r.parent[i]] / per;
      dn = std::max(dn, std::abs(diff[i]));
    }
    if (dn > 0.0) {
      auto corr = make_operator(t->space(), e, Field::complex == t->field() ? Field::complex : Field::real,
                                RankOneForm{sharp_values(x, p), diff});
      tn = combine({{1.0, tn}, {-1.0, corr}});
      cert.notes.emplace_back("y rounded to level " + std::to_string(*opt.y_level) + " with a rank-one correction");
    }
  }

  NarrowWorkspace ws(tn);
  const auto split = narrow_lambda_partition(ws, x, j, n, opt.epsilon, oracle);
  const double lam = split.lambda;
  cert.params.lambda = lam;
  const auto& A = split.partition.parts[0];
  const auto& B = split.partition.parts[1];
  const auto w = ws.space()->weights();
  const auto xa = detail::restricted(split.x, A);
  const auto yb = detail::restricted(split.y, B);
  const auto xs = sharp_values(xa, p);
  const auto ys = sharp_values(yb, p);
  const auto txa = ws.apply(xa);
  const auto tyb = ws.apply(yb);

  const double ca = std::pow(lam, -1.0 / p);
  const double cb = std::pow(1.0 - lam, -1.0 / p) * tau;
  const cplx s_term = std::pow(lam, -1.0) * integrate_product(xs, txa, w) +
                      std::pow(1.0 - lam, -1.0) * std::pow(tau, p) * integrate_product(ys, tyb, w);
  const cplx p_term = std::pow(lam, -1.0 / q) * std::pow(1.0 - lam, -1.0 / p) * tau * integrate_product(xs, tyb, w);
  const double q_coef = std::pow(lam, -1.0 / p) * std::pow(1.0 - lam, -1.0 / q) * std::pow(tau, p - 1.0);
  const cplx q_term = q_coef * integrate_product(ys, txa, w);
  const double zp = std::pow(lam, -1.0) * norm_pow(xa, w, p) + std::pow(1.0 - lam, -1.0) * std::pow(tau, p) * norm_pow(yb, w, p);

  auto value_at = [&](cplx th) { return std::abs(s_term + th * p_term + std::conj(th) * q_term); };
  std::vector<cplx> thetas;
  cplx aligned = 1.0;
  if (ws.field() == Field::real) {
    thetas = {1.0, -1.0};
  } else {
    // theta^2 = phase(Q) / phase(P) aligns theta P with conj(theta) Q.
    const cplx up = unit_sign(p_term), uq = unit_sign(q_term);
    const cplx root = std::sqrt(up == cplx{} || uq == cplx{} ? cplx(1.0) : uq / up);
    aligned = root;
    thetas = {root, -root};
    for (int k = 0; k < opt.phase_grid; ++k) thetas.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / opt.phase_grid));
  }
  cplx best_theta = thetas.front();
  for (const cplx& th : thetas) {
    if (value_at(th) > value_at(best_theta)) best_theta = th;
  }

  std::vector<cplx> z(ws.space()->size());
  for (std::size_t i : A.indices()) z[i] = ca * split.x[i];
  for (std::size_t i : B.indices()) z[i] = best_theta * cb * split.y[i];
  const double direct = v_quotient(*ws.op(), z);
  const double via_terms = value_at(best_theta) / zp;

  auto defect = txa;
  for (std::size_t i = 0; i < defect.size(); ++i) defect[i] -= lam * split.y[i];
  const double e_c = ws.norm(defect);
  const double yp = norm_pow(split.y, w, p);
  const double kl = std::pow(lam, 1.0 / q) * std::pow(1.0 - lam, 1.0 / p);
  double numer = kl * std::pow(tau, p - 1.0) * yp - q_coef * e_c;
  if (ws.field() == Field::real) numer -= std::abs(p_term);

  cert.identities = split.partition.identities;
  cert.identities.push_back(equality("direct value = |S + theta P + conj(theta) Q| / ||z||^p", direct, via_terms,
                                     1e-10 * std::max(1.0, direct)));
  cert.identities.push_back(at_most("||z||^p <= 1 + tau^p", zp, (1.0 + std::pow(tau, p)) * std::max(1.0, yp),
                                    1e-12 * (1.0 + std::pow(tau, p))));
  if (ws.field() == Field::complex) {
    cert.identities.push_back(at_least("aligned pair reaches |P| + |Q|",
                                       std::abs(aligned * p_term + std::conj(aligned) * q_term),
                                       std::abs(p_term) + std::abs(q_term), 1e-10 * (1.0 + std::abs(p_term) + std::abs(q_term))));
  }
  cert.achieved = c * direct;
  cert.bound = c * numer / zp;
  cert.op = scaled(ws.op(), c);
  cert.vectors.push_back(normalized(LpVector(ws.space(), e, ws.field(), std::move(z))));
  cert.notes.emplace_back("partition level " + std::to_string(ws.level()));
  return cert;
}

}  // namespace lpnr
