#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lpnr/errors.hpp"
#include "lpnr/lp_core.hpp"
#include "lpnr/measure.hpp"
#include "lpnr/random.hpp"

namespace lpnr {

class LpOperator;
using OperatorPtr = std::shared_ptr<const LpOperator>;

/// Dense n x n array, (Tx)_i = sum_j a_ij x_j.
struct MatrixForm {
  std::vector<cplx> a;
};

/// Dense n x n kernel, (Tx)_i = sum_j k_ij x_j mu_j.
struct KernelForm {
  std::vector<cplx> k;
};

/// Tz = (sum_j f_j z_j mu_j) y.
struct RankOneForm {
  std::vector<cplx> f;
  std::vector<cplx> y;
};

struct DiagonalForm {
  std::vector<cplx> d;
};

/// J T P: conditional expectation onto the coarse atoms, T, then replication.
struct RefinedForm {
  OperatorPtr base;
  Refinement refinement;
};

/// sum_t c_t T_t.
struct SumForm {
  std::vector<std::pair<cplx, OperatorPtr>> terms;
};

using OperatorForm = std::variant<MatrixForm, KernelForm, RankOneForm, DiagonalForm, RefinedForm, SumForm>;

/// A linear operator on the simple functions of a finite measure space.
class LpOperator {
 public:
  LpOperator(SpacePtr space, Exponent exponent, Field field, OperatorForm form)
      : space_(std::move(space)), exponent_(exponent), field_(field), form_(std::move(form)) {
    if (!space_) throw InvalidArgument("operator needs a space");
    validate();
  }

  const SpacePtr& space() const { return space_; }
  const Exponent& exponent() const { return exponent_; }
  Field field() const { return field_; }
  const OperatorForm& form() const { return form_; }
  std::size_t size() const { return space_->size(); }

  std::string_view kind() const {
    static constexpr std::string_view names[] = {"matrix", "kernel", "rank_one", "diagonal", "refined", "sum"};
    return names[form_.index()];
  }

  bool is_rank_one() const { return std::holds_alternative<RankOneForm>(form_); }

  /// y = T x on raw values.
  void apply_into(std::span<const cplx> x, std::span<cplx> y) const {
    const std::size_t n = size();
    const auto w = space_->weights();
    std::visit(
        [&](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, MatrixForm>) {
            for (std::size_t i = 0; i < n; ++i) {
              cplx s{};
              for (std::size_t j = 0; j < n; ++j) s += f.a[i * n + j] * x[j];
              y[i] = s;
            }
          } else if constexpr (std::is_same_v<F, KernelForm>) {
            std::vector<cplx> xw(n);
            for (std::size_t j = 0; j < n; ++j) xw[j] = x[j] * w[j];
            for (std::size_t i = 0; i < n; ++i) {
              cplx s{};
              for (std::size_t j = 0; j < n; ++j) s += f.k[i * n + j] * xw[j];
              y[i] = s;
            }
          } else if constexpr (std::is_same_v<F, RankOneForm>) {
            const cplx c = integrate_product(f.f, x, w);
            for (std::size_t i = 0; i < n; ++i) y[i] = c * f.y[i];
          } else if constexpr (std::is_same_v<F, DiagonalForm>) {
            for (std::size_t i = 0; i < n; ++i) y[i] = f.d[i] * x[i];
          } else if constexpr (std::is_same_v<F, RefinedForm>) {
            const auto coarse = conditional_expectation(f, x);
            std::vector<cplx> ty(coarse.size());
            f.base->apply_into(coarse, ty);
            for (std::size_t i = 0; i < n; ++i) y[i] = ty[f.refinement.parent[i]];
          } else {
            std::fill(y.begin(), y.end(), cplx{});
            std::vector<cplx> tmp(n);
            for (const auto& [c, op] : f.terms) {
              op->apply_into(x, tmp);
              for (std::size_t i = 0; i < n; ++i) y[i] += c * tmp[i];
            }
          }
        },
        form_);
  }

  std::vector<cplx> apply_values(std::span<const cplx> x) const {
    std::vector<cplx> y(size());
    apply_into(x, y);
    return y;
  }

  /// out = T* g where sum (T* g) x mu = sum g (T x) mu for all x.
  void adjoint_into(std::span<const cplx> g, std::span<cplx> out) const {
    const std::size_t n = size();
    const auto w = space_->weights();
    std::visit(
        [&](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, MatrixForm>) {
            std::fill(out.begin(), out.end(), cplx{});
            for (std::size_t i = 0; i < n; ++i) {
              const cplx gi = g[i] * w[i];
              for (std::size_t j = 0; j < n; ++j) out[j] += f.a[i * n + j] * gi;
            }
            for (std::size_t j = 0; j < n; ++j) out[j] /= w[j];
          } else if constexpr (std::is_same_v<F, KernelForm>) {
            std::fill(out.begin(), out.end(), cplx{});
            for (std::size_t i = 0; i < n; ++i) {
              const cplx gi = g[i] * w[i];
              for (std::size_t j = 0; j < n; ++j) out[j] += f.k[i * n + j] * gi;
            }
          } else if constexpr (std::is_same_v<F, RankOneForm>) {
            const cplx c = integrate_product(g, f.y, w);
            for (std::size_t j = 0; j < n; ++j) out[j] = c * f.f[j];
          } else if constexpr (std::is_same_v<F, DiagonalForm>) {
            for (std::size_t j = 0; j < n; ++j) out[j] = f.d[j] * g[j];
          } else if constexpr (std::is_same_v<F, RefinedForm>) {
            // (J T P)* = P* T* J* = J T* P for the mu-weighted bilinear pairing.
            const auto coarse = conditional_expectation(f, g);
            std::vector<cplx> tg(coarse.size());
            f.base->adjoint_into(coarse, tg);
            for (std::size_t j = 0; j < n; ++j) out[j] = tg[f.refinement.parent[j]];
          } else {
            std::fill(out.begin(), out.end(), cplx{});
            std::vector<cplx> tmp(n);
            for (const auto& [c, op] : f.terms) {
              op->adjoint_into(g, tmp);
              for (std::size_t j = 0; j < n; ++j) out[j] += c * tmp[j];
            }
          }
        },
        form_);
  }

  std::vector<cplx> adjoint_values(std::span<const cplx> g) const {
    std::vector<cplx> out(size());
    adjoint_into(g, out);
    return out;
  }

 private:
  std::vector<cplx> conditional_expectation(const RefinedForm& f, std::span<const cplx> x) const {
    const auto w = space_->weights();
    const auto cw = f.base->space()->weights();
    std::vector<cplx> c(f.refinement.coarse_size);
    for (std::size_t i = 0; i < x.size(); ++i) c[f.refinement.parent[i]] += x[i] * w[i];
    for (std::size_t k = 0; k < c.size(); ++k) c[k] /= cw[k];
    return c;
  }

  void validate() const {
    const std::size_t n = size();
    auto check_values = [&](std::span<const cplx> v, std::size_t expected, const char* what) {
      if (v.size() != expected) throw InvalidArgument(std::string("operator ") + what + ": wrong number of entries");
      for (const cplx& c : v) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
          throw InvalidArgument(std::string("operator ") + what + ": non-finite entry");
        }
        if (field_ == Field::real && c.imag() != 0.0) {
          throw InvalidArgument(std::string("operator ") + what + ": complex entry in a real operator");
        }
      }
    };
    std::visit(
        [&](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, MatrixForm>) {
            check_values(f.a, n * n, "matrix");
          } else if constexpr (std::is_same_v<F, KernelForm>) {
            check_values(f.k, n * n, "kernel");
          } else if constexpr (std::is_same_v<F, RankOneForm>) {
            check_values(f.f, n, "rank_one f");
            check_values(f.y, n, "rank_one y");
          } else if constexpr (std::is_same_v<F, DiagonalForm>) {
            check_values(f.d, n, "diagonal");
          } else if constexpr (std::is_same_v<F, RefinedForm>) {
            if (!f.base) throw InvalidArgument("refined operator without base");
            if (f.refinement.fine_size() != n || f.refinement.coarse_size != f.base->size()) {
              throw InvalidArgument("refined operator: refinement does not match the spaces");
            }
            if (field_ == Field::real && f.base->field() == Field::complex) {
              throw InvalidArgument("refined operator: complex base in a real operator");
            }
          } else {
            for (const auto& [c, op] : f.terms) {
              if (!op || op->size() != n) throw InvalidArgument("sum operator: term on another space");
              if (field_ == Field::real && (c.imag() != 0.0 || op->field() == Field::complex)) {
                throw InvalidArgument("sum operator: complex term in a real operator");
              }
            }
          }
        },
        form_);
  }

  SpacePtr space_;
  Exponent exponent_;
  Field field_;
  OperatorForm form_;
};

inline LpVector apply(const LpOperator& t, const LpVector& x) {
  if (x.size() != t.size() || !same_space(*x.space(), *t.space())) {
    throw InvalidArgument("apply: vector and operator live on different spaces");
  }
  if (!x.exponent().same_as(t.exponent())) throw InvalidArgument("apply: exponent mismatch");
  const Field f = (t.field() == Field::complex || x.field() == Field::complex) ? Field::complex : Field::real;
  return LpVector(x.space(), x.exponent(), f, t.apply_values(x.values()));
}

/// T* g for g in the dual space L_q.
inline LpVector adjoint_apply(const LpOperator& t, const LpVector& g) {
  if (g.size() != t.size() || !same_space(*g.space(), *t.space())) {
    throw InvalidArgument("adjoint_apply: vector and operator live on different spaces");
  }
  if (!g.exponent().conjugate_to(t.exponent())) throw InvalidArgument("adjoint_apply: g must lie in L_q");
  const Field f = (t.field() == Field::complex || g.field() == Field::complex) ? Field::complex : Field::real;
  return LpVector(g.space(), g.exponent(), f, t.adjoint_values(g.values()));
}

// ---------------------------------------------------------------------------
// Construction.

inline OperatorPtr make_operator(SpacePtr space, Exponent e, Field field, OperatorForm form) {
  return std::make_shared<const LpOperator>(std::move(space), e, field, std::move(form));
}

inline OperatorPtr make_matrix(SpacePtr space, Exponent e, Field field, std::vector<cplx> a) {
  return make_operator(std::move(space), e, field, MatrixForm{std::move(a)});
}

inline OperatorPtr make_kernel(SpacePtr space, Exponent e, Field field, std::vector<cplx> k) {
  return make_operator(std::move(space), e, field, KernelForm{std::move(k)});
}

/// Kernel of the operator given by a coefficient matrix: k_ij = a_ij / mu_j.
inline std::vector<cplx> matrix_to_kernel(std::span<const cplx> a, std::span<const double> w) {
  const std::size_t n = w.size();
  if (a.size() != n * n) throw InvalidArgument("matrix_to_kernel: wrong number of entries");
  std::vector<cplx> k(a.begin(), a.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i * n + j] /= w[j];
  }
  return k;
}

/// Tz = pairing(f, z) y with f in L_q and y in L_p.
inline OperatorPtr make_rank_one(const LpVector& f, const LpVector& y) {
  require_same_space(f, y, "make_rank_one");
  if (!f.exponent().conjugate_to(y.exponent())) throw InvalidArgument("make_rank_one: f must lie in the dual space");
  const Field field = (f.field() == Field::complex || y.field() == Field::complex) ? Field::complex : Field::real;
  return make_operator(y.space(), y.exponent(), field,
                       RankOneForm{{f.values().begin(), f.values().end()}, {y.values().begin(), y.values().end()}});
}

inline OperatorPtr make_diagonal(SpacePtr space, Exponent e, Field field, std::vector<cplx> d) {
  return make_operator(std::move(space), e, field, DiagonalForm{std::move(d)});
}

inline OperatorPtr make_identity(SpacePtr space, Exponent e, Field field = Field::real) {
  const std::size_t n = space->size();
  return make_diagonal(std::move(space), e, field, std::vector<cplx>(n, 1.0));
}

inline OperatorPtr make_zero(SpacePtr space, Exponent e, Field field = Field::real) {
  const std::size_t n = space->size();
  return make_diagonal(std::move(space), e, field, std::vector<cplx>(n, 0.0));
}

inline OperatorPtr scaled(const OperatorPtr& t, cplx c) {
  const Field f = (t->field() == Field::real && c.imag() == 0.0) ? Field::real : Field::complex;
  return make_operator(t->space(), t->exponent(), f, SumForm{{{c, t}}});
}

inline OperatorPtr combine(std::vector<std::pair<cplx, OperatorPtr>> terms) {
  if (terms.empty()) throw InvalidArgument("combine: no terms");
  Field f = Field::real;
  for (const auto& [c, op] : terms) {
    if (c.imag() != 0.0 || op->field() == Field::complex) f = Field::complex;
  }
  auto space = terms.front().second->space();
  auto e = terms.front().second->exponent();
  return make_operator(std::move(space), e, f, SumForm{std::move(terms)});
}

/// The extremal operator T0 x = mu(A)^(-1/q) mu(B)^(-1/p) (int_A x) 1_B on the
/// two-atom space {A, B}.
inline OperatorPtr make_t0(double mass_a, double mass_b, Exponent e, Field field = Field::real) {
  if (!(mass_a > 0.0) || !(mass_b > 0.0)) throw InvalidArgument("make_t0: masses must be positive");
  auto space = make_space({mass_a, mass_b});
  std::vector<cplx> f{std::pow(mass_a, -1.0 / e.q()), 0.0};
  std::vector<cplx> y{0.0, std::pow(mass_b, -1.0 / e.p())};
  return make_operator(std::move(space), e, field, RankOneForm{std::move(f), std::move(y)});
}

/// (x, y) -> (-y, x) on unweighted l_p^2.
inline OperatorPtr make_rotation(Exponent e, Field field = Field::real) {
  return make_matrix(counting_space(2), e, field, {0.0, -1.0, 1.0, 0.0});
}

/// (x, y) -> (y, 0) on unweighted l_p^2.
inline OperatorPtr make_shift(Exponent e, Field field = Field::real) {
  return make_matrix(counting_space(2), e, field, {0.0, 1.0, 0.0, 0.0});
}

/// J T P on a refinement of T's space. Rank-one operators stay rank-one with
/// both functions replicated; everything else becomes a lazy refined form.
inline OperatorPtr extend_to_refinement(const OperatorPtr& t, const SpacePtr& fine, const Refinement& r) {
  if (r.coarse_size != t->size() || r.fine_size() != fine->size()) {
    throw InvalidArgument("extend_to_refinement: refinement does not match the spaces");
  }
  std::vector<double> sums(r.coarse_size, 0.0);
  for (std::size_t i = 0; i < r.fine_size(); ++i) sums[r.parent[i]] += fine->weight(i);
  for (std::size_t c = 0; c < sums.size(); ++c) {
    if (std::abs(sums[c] - t->space()->weight(c)) > 1e-12 * t->space()->weight(c)) {
      throw InvalidArgument("extend_to_refinement: lineage masses do not match the operator's space");
    }
  }
  if (const auto* ro = std::get_if<RankOneForm>(&t->form())) {
    return make_operator(fine, t->exponent(), t->field(),
                         RankOneForm{replicate<cplx>(ro->f, r), replicate<cplx>(ro->y, r)});
  }
  if (const auto* rf = std::get_if<RefinedForm>(&t->form())) {
    return make_operator(fine, t->exponent(), t->field(), RefinedForm{rf->base, rf->refinement.then(r)});
  }
  return make_operator(fine, t->exponent(), t->field(), RefinedForm{t, r});
}

inline OperatorPtr extend_to_refinement(const OperatorPtr& t, const SpacePtr& fine) {
  if (!fine->lineage()) throw InvalidArgument("extend_to_refinement: space has no lineage");
  return extend_to_refinement(t, fine, *fine->lineage());
}

/// Dense kernel of any operator (column j is T e_j / mu_j). Meant for small spaces.
inline std::vector<cplx> to_kernel(const LpOperator& t) {
  const std::size_t n = t.size();
  std::vector<cplx> k(n * n);
  std::vector<cplx> e(n), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), cplx{});
    e[j] = 1.0;
    t.apply_into(e, col);
    for (std::size_t i = 0; i < n; ++i) k[i * n + j] = col[i] / t.space()->weight(j);
  }
  return k;
}

/// Syntactic positivity: every coefficient of the concrete form is >= 0.
inline bool is_positive(const LpOperator& t) {
  if (t.field() != Field::real) throw UnsupportedOperation("is_positive needs the real field");
  auto nonneg = [](std::span<const cplx> v) {
    return std::all_of(v.begin(), v.end(), [](const cplx& c) { return c.real() >= 0.0; });
  };
  return std::visit(
      [&](const auto& f) -> bool {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, MatrixForm>) {
          return nonneg(f.a);
        } else if constexpr (std::is_same_v<F, KernelForm>) {
          return nonneg(f.k);
        } else if constexpr (std::is_same_v<F, RankOneForm>) {
          return nonneg(f.f) && nonneg(f.y);
        } else if constexpr (std::is_same_v<F, DiagonalForm>) {
          return nonneg(f.d);
        } else if constexpr (std::is_same_v<F, RefinedForm>) {
          return is_positive(*f.base);
        } else {
          // Sufficient only: nonnegative combination of positive terms.
          return std::all_of(f.terms.begin(), f.terms.end(),
                             [](const auto& term) { return term.first.real() >= 0.0 && is_positive(*term.second); });
        }
      },
      t.form());
}

// ---------------------------------------------------------------------------
// Operator norm lower bounds.

struct NormOptions {
  int restarts = 32;
  int max_iters = 500;
  double tol = 1e-12;
  std::uint64_t seed = 0;
  /// Called with (restart, iteration, ||T x_k||) after every accepted iterate.
  std::function<void(int, int, double)> observer;
};

struct NormEstimate {
  double estimate = 0.0;
  LpVector witness;
  int iterations = 0;
};

/// Power-type iteration x <- sharp_q(T* sharp_p(T x)), normalized, from
/// seeded random starts. ||T x_k|| is nondecreasing along every run, and the
/// returned estimate is ||T witness|| for a unit witness.
inline NormEstimate op_norm_lower(const LpOperator& t, const NormOptions& opt = {}) {
  if (opt.restarts < 1) throw InvalidArgument("op_norm_lower: restarts must be >= 1");
  const auto& space = t.space();
  const Exponent e = t.exponent();
  const double p = e.p();
  const double q = e.q();
  const auto w = space->weights();
  auto norm_of = [&](std::span<const cplx> v) {
    const double s = norm_pow(v, w, p);
    return s == 0.0 ? 0.0 : std::pow(s, 1.0 / p);
  };

  std::optional<LpVector> best_x;
  double best = -1.0;
  int total_iters = 0;
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(r)));
    LpVector start = random_unit_vector(space, e, t.field(), rng);
    std::vector<cplx> x(start.values().begin(), start.values().end());
    std::vector<cplx> tx = t.apply_values(x);
    double obj = norm_of(tx);
    if (opt.observer) opt.observer(r, 0, obj);
    for (int it = 1; it <= opt.max_iters && obj > 0.0; ++it) {
      const auto g = t.adjoint_values(sharp_values(tx, p));
      auto xn = sharp_values(g, q);
      const double nx = norm_of(xn);
      if (nx == 0.0) break;
      for (auto& c : xn) c /= nx;
      auto txn = t.apply_values(xn);
      const double objn = norm_of(txn);
      ++total_iters;
      if (!(objn >= obj)) break;
      const double gain = objn - obj;
      x = std::move(xn);
      tx = std::move(txn);
      obj = objn;
      if (opt.observer) opt.observer(r, it, obj);
      if (gain <= opt.tol * std::max(1.0, obj)) break;
    }
    if (obj > best) {
      best = obj;
      best_x = LpVector(space, e, t.field(), std::move(x));
    }
  }
  return {best, std::move(*best_x), total_iters};
}

}  // namespace lpnr
