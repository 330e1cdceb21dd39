#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "lpnr/errors.hpp"
#include "lpnr/objectives.hpp"
#include "lpnr/operators.hpp"
#include "lpnr/random.hpp"
#include "lpnr/witness.hpp"

namespace lpnr {

enum class RadiusMethod { ascent, grid, witness };

inline std::string_view to_string(RadiusMethod m) {
  switch (m) {
    case RadiusMethod::ascent:
      return "ascent";
    case RadiusMethod::grid:
      return "grid";
    default:
      return "witness-module";
  }
}

struct RadiusEstimate {
  double value = 0.0;
  LpVector witness;
  RadiusMethod method = RadiusMethod::ascent;
  std::size_t evaluations = 0;
};

struct RadiusOptions {
  int restarts = 8;
  int iters = 2000;
  std::uint64_t seed = 0;
  /// Seed the pool with witness-module constructions built from a norm witness.
  bool use_witness_seeds = true;
  /// Canonical basis vectors join the pool up to this dimension.
  std::size_t basis_start_limit = 64;
  std::vector<LpVector> extra_starts;
  /// Called with (start, iteration, objective) after every accepted step.
  std::function<void(int, int, double)> observer;
};

namespace detail {

/// 2 d/d(conj x) of the scale-free objective h(x) / ||x||^p (real part for the real field).
/// |x_k| is floored at 1e-10 max|x| inside the power terms; at zero coordinates of the
/// absolute objective the sign comes from the remaining gradient term.
inline std::vector<cplx> ascent_direction(const LpOperator& t, Quantity obj, std::span<const cplx> x,
                                          std::span<const cplx> tx) {
  const std::size_t n = x.size();
  const double p = t.exponent().p();
  const auto w = t.space()->weights();
  double xmax = 0.0;
  for (const cplx& c : x) xmax = std::max(xmax, std::abs(c));
  const double floor = 1e-10 * xmax;
  std::vector<double> rp2(n);  // floored |x|^(p-2)
  std::vector<cplx> sx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::abs(x[i]);
    rp2[i] = std::exp((p - 2.0) * std::log(std::max(r, floor)));
    sx[i] = unit_sign(x[i]);
  }
  const double nn = norm_pow(x, w, p);
  std::vector<cplx> grad(n);
  double h = 0.0;
  if (obj == Quantity::abs_v) {
    std::vector<cplx> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = abs_pow(std::abs(x[i]), p - 1.0) * std::conj(unit_sign(tx[i]));
      h += abs_pow(std::abs(x[i]), p - 1.0) * std::abs(tx[i]) * w[i];
    }
    const auto tg = t.adjoint_values(g);
    for (std::size_t k = 0; k < n; ++k) {
      const cplx other = w[k] * std::conj(tg[k]);
      cplx s = sx[k];
      if (s == cplx{}) s = unit_sign(other);
      if (s == cplx{} && tx[k] != cplx{}) s = 1.0;
      grad[k] = w[k] * (p - 1.0) * rp2[k] * s * std::abs(tx[k]) + other;
    }
  } else if (obj == Quantity::v) {
    const auto xs = sharp_values(x, p);
    const cplx big_g = integrate_product(xs, tx, w);
    h = std::abs(big_g);
    const cplx ph = h == 0.0 ? cplx(1.0) : big_g / h;
    const auto ts = t.adjoint_values(xs);
    for (std::size_t k = 0; k < n; ++k) {
      const cplx d_bar = w[k] * (p / 2.0) * rp2[k] * tx[k];
      const cplx d_x = w[k] * ((p - 2.0) / 2.0 * rp2[k] * std::conj(sx[k]) * std::conj(sx[k]) * tx[k] + ts[k]);
      grad[k] = std::conj(ph) * d_bar + ph * std::conj(d_x);
    }
  } else {
    // ||Tx||^p: gradient mu_k conj((T* (Tx)^#)_k) p.
    const auto ts = t.adjoint_values(sharp_values(tx, p));
    h = norm_pow(tx, w, p);
    for (std::size_t k = 0; k < n; ++k) grad[k] = p * w[k] * std::conj(ts[k]);
  }
  const double f = h / nn;
  for (std::size_t k = 0; k < n; ++k) {
    grad[k] = (grad[k] - f * w[k] * p * rp2[k] * x[k]) / nn;
    if (t.field() == Field::real) grad[k] = grad[k].real();
  }
  return grad;
}

struct AscentRun {
  std::vector<cplx> x;
  double value = 0.0;
  std::size_t evaluations = 0;
};

inline AscentRun ascend(const LpOperator& t, Quantity obj, std::vector<cplx> x, int iters,
                        const std::function<void(int, double)>& observer) {
  const double p = t.exponent().p();
  const auto w = t.space()->weights();
  AscentRun run;
  auto unit = [&](std::vector<cplx>& v) {
    const double s = std::pow(norm_pow(v, w, p), 1.0 / p);
    for (auto& c : v) c /= s;
  };
  unit(x);
  double f = evaluate(obj, t, x);
  ++run.evaluations;
  std::vector<cplx> trial(x.size());
  for (int it = 1; it <= iters; ++it) {
    const auto tx = t.apply_values(x);
    auto d = ascent_direction(t, obj, x, tx);
    double dn = 0.0, xn = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      dn += std::norm(d[i]);
      xn += std::norm(x[i]);
    }
    if (dn == 0.0 || !std::isfinite(dn)) break;
    const double scale = std::sqrt(xn / dn);
    bool accepted = false;
    double fn = f;
    for (double s = 1.0; s > 1e-16; s *= 0.5) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + s * scale * d[i];
      fn = evaluate(obj, t, trial);
      ++run.evaluations;
      if (fn > f) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double gain = fn - f;
    x = trial;
    unit(x);
    f = fn;
    if (observer) observer(it, f);
    if (gain <= 1e-12 * std::abs(f)) break;
  }
  run.value = evaluate(obj, t, x);
  ++run.evaluations;
  run.x = std::move(x);
  return run;
}

inline std::vector<LpVector> witness_seeds(const LpOperator& t, std::uint64_t seed) {
  std::vector<LpVector> out;
  NormOptions nopt;
  nopt.restarts = 8;
  nopt.seed = seed;
  const auto norm = op_norm_lower(t, nopt);
  out.push_back(norm.witness);
  try {
    for (auto& v : abs_radius_witness(t, std::nullopt, 0.0, norm.witness, seed).vectors) out.push_back(std::move(v));
  } catch (const SelectionFailure& e) {
    out.push_back(normalized(e.best().y));
  }
  if (t.field() == Field::real && is_positive(t)) {
    for (auto& v : positive_witness(t, norm.witness, std::nullopt, seed).vectors) out.push_back(std::move(v));
  }
  return out;
}

inline RadiusEstimate estimate(const LpOperator& t, Quantity obj, const RadiusOptions& opt) {
  if (opt.restarts < 1) throw InvalidArgument("radius estimate: restarts must be >= 1");
  const std::size_t n = t.size();
  std::vector<std::vector<cplx>> pool;
  if (n <= opt.basis_start_limit) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<cplx> e(n);
      e[i] = 1.0;
      pool.push_back(std::move(e));
    }
  }
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(derive_seed(opt.seed, 1000 + static_cast<std::uint64_t>(r)));
    const auto x = random_unit_vector(t.space(), t.exponent(), t.field(), rng);
    pool.emplace_back(x.values().begin(), x.values().end());
  }
  for (const auto& x : opt.extra_starts) {
    if (x.size() != n) throw InvalidArgument("radius estimate: extra start has the wrong size");
    if (p_norm(x) > 0.0) pool.emplace_back(x.values().begin(), x.values().end());
  }
  if (opt.use_witness_seeds) {
    for (const auto& x : witness_seeds(t, opt.seed)) pool.emplace_back(x.values().begin(), x.values().end());
  }
  std::optional<AscentRun> best;
  std::size_t evals = 0;
  for (std::size_t s = 0; s < pool.size(); ++s) {
    std::function<void(int, double)> obs;
    if (opt.observer) obs = [&, s](int it, double v) { opt.observer(static_cast<int>(s), it, v); };
    auto run = ascend(t, obj, pool[s], opt.iters, obs);
    evals += run.evaluations;
    if (!best || run.value > best->value) best = std::move(run);
  }
  const Field f = t.field();
  return {best->value, LpVector(t.space(), t.exponent(), f, std::move(best->x)), RadiusMethod::ascent, evals};
}

}  // namespace detail

/// Multistart ascent lower bound for v(T) = sup |int x^# Tx| over the unit sphere.
inline RadiusEstimate numerical_radius_lower(const LpOperator& t, const RadiusOptions& opt = {}) {
  return detail::estimate(t, Quantity::v, opt);
}

/// Multistart ascent lower bound for |v|(T) = sup int |x|^(p-1) |Tx|. The pool also
/// contains the v-estimate's witness, so the result never falls below it.
inline RadiusEstimate abs_numerical_radius_lower(const LpOperator& t, const RadiusOptions& opt = {}) {
  RadiusOptions o = opt;
  RadiusOptions inner = opt;
  inner.observer = nullptr;
  o.extra_starts.push_back(numerical_radius_lower(t, inner).witness);
  return detail::estimate(t, Quantity::abs_v, o);
}

struct RadiusPair {
  RadiusEstimate v;
  RadiusEstimate abs_v;
};

/// Both estimates with shared starts. For positive real operators the v ascent is
/// restarted from |w| for the |v| witness w, where the two objectives coincide.
inline RadiusPair radius_estimates(const LpOperator& t, const RadiusOptions& opt = {}) {
  RadiusPair out{numerical_radius_lower(t, opt), detail::estimate(t, Quantity::abs_v, opt)};
  {
    RadiusOptions o = opt;
    o.use_witness_seeds = false;
    o.restarts = 1;
    o.basis_start_limit = 0;
    o.extra_starts = {out.v.witness};
    auto again = detail::estimate(t, Quantity::abs_v, o);
    if (again.value > out.abs_v.value) out.abs_v = std::move(again);
  }
  if (t.field() == Field::real && is_positive(t)) {
    RadiusOptions o = opt;
    o.use_witness_seeds = false;
    o.restarts = 1;
    o.basis_start_limit = 0;
    o.extra_starts = {abs(out.abs_v.witness)};
    auto again = detail::estimate(t, Quantity::v, o);
    if (again.value > out.v.value) out.v = std::move(again);
    const double av = abs_quotient(t, out.v.witness.values());
    if (av > out.abs_v.value) out.abs_v = {av, out.v.witness, RadiusMethod::ascent, out.abs_v.evaluations};
  }
  return out;
}

/// Exhaustive evaluation over an angular mesh of the unit sphere: real dimension
/// up to 3, complex dimension up to 2. `resolution` points per angle.
inline RadiusEstimate grid_oracle(const LpOperator& t, Quantity obj, int resolution) {
  if (resolution < 1) throw InvalidArgument("grid_oracle: resolution must be >= 1");
  const std::size_t n = t.size();
  const bool real = t.field() == Field::real;
  if ((real && n > 3) || (!real && n > 2)) throw UnsupportedOperation("grid_oracle: dimension too large");
  const double pi = std::numbers::pi;
  double best = -1.0;
  std::vector<cplx> best_x(n), x(n);
  std::size_t evals = 0;
  auto consider = [&]() {
    const double v = evaluate(obj, t, x);
    ++evals;
    if (v > best) {
      best = v;
      best_x = x;
    }
  };
  if (n == 1) {
    x[0] = 1.0;
    consider();
  } else if (real && n == 2) {
    for (int i = 0; i < resolution; ++i) {
      const double th = pi * i / resolution;
      x = {std::cos(th), std::sin(th)};
      consider();
    }
  } else if (real) {
    for (int i = 0; i <= resolution; ++i) {
      const double th = pi * i / resolution;
      for (int j = 0; j < resolution; ++j) {
        const double ph = 2.0 * pi * j / resolution;
        x = {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
        consider();
      }
    }
  } else {
    // Moduli (cos a, sin a), relative phase e^{i phi}; the global phase is irrelevant.
    for (int i = 0; i <= resolution; ++i) {
      const double a = 0.5 * pi * i / resolution;
      for (int j = 0; j < resolution; ++j) {
        const double ph = 2.0 * pi * j / resolution;
        x = {std::cos(a), std::sin(a) * std::polar(1.0, ph)};
        consider();
      }
    }
  }
  LpVector wv(t.space(), t.exponent(), t.field(), best_x);
  return {best, normalized(wv), RadiusMethod::grid, evals};
}

}  // namespace lpnr
