#include <gtest/gtest.h>

#include <cmath>

#include "frozen_values.hpp"
#include "lpnr/lp_core.hpp"
#include "lpnr/random.hpp"

using namespace lpnr;

namespace {

LpVector vec(SpacePtr s, double p, std::vector<cplx> v, Field f = Field::real) {
  return LpVector(std::move(s), Exponent(p), f, std::move(v));
}

}  // namespace

TEST(Exponent, ConjugateAndRange) {
  for (double p : {1.1, 1.5, 2.0, 3.0, 10.0}) {
    Exponent e(p);
    EXPECT_NEAR(1.0 / e.p() + 1.0 / e.q(), 1.0, 1e-15);
    EXPECT_NEAR(e.dual().q(), p, 1e-15 * p);
    EXPECT_TRUE(e.dual().conjugate_to(e));
  }
  EXPECT_THROW(Exponent(1.0), InvalidArgument);
  EXPECT_THROW(Exponent(0.5), InvalidArgument);
  EXPECT_THROW((void)Exponent(INFINITY), InvalidArgument);
  EXPECT_THROW((void)Exponent(NAN), InvalidArgument);
}

TEST(LpVector, RejectsBadValues) {
  auto s = counting_space(2);
  EXPECT_THROW(vec(s, 2, {1.0}), InvalidArgument);
  EXPECT_THROW(vec(s, 2, {1.0, NAN}), InvalidArgument);
  EXPECT_THROW(vec(s, 2, {1.0, cplx(0, 1)}), InvalidArgument);
  EXPECT_NO_THROW(vec(s, 2, {1.0, cplx(0, 1)}, Field::complex));
}

TEST(PNorm, Examples) {
  auto s = counting_space(2);
  for (double p : {1.3, 2.0, 7.0}) EXPECT_DOUBLE_EQ(p_norm(vec(s, p, {1, 0})), 1.0);
  EXPECT_NEAR(p_norm(vec(s, 3, {1, 1})), std::cbrt(2.0), 1e-15);
  EXPECT_NEAR(p_norm(vec(make_space({0.5, 0.5}), 2, {2, -1})), std::sqrt(2.5), 1e-15);
  EXPECT_EQ(p_norm(vec(s, 3, {0, 0})), 0.0);
}

TEST(Sharp, Examples) {
  auto s = counting_space(2);
  auto a = sharp(vec(s, 3, {1, 0}));
  EXPECT_EQ(a[0], cplx(1.0));
  EXPECT_EQ(a[1], cplx(0.0));
  auto b = sharp(vec(s, 3, {2, -1}));
  EXPECT_NEAR(std::abs(b[0] - cplx(4.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(b[1] - cplx(-1.0)), 0.0, 1e-15);
  EXPECT_NEAR(b.exponent().p(), 1.5, 1e-15);
  auto x = vec(s, 3, {1, 1});
  EXPECT_NEAR(pairing(sharp(x), x).real(), 2.0, 1e-15);
}

TEST(Sharp, ComplexUsesConjugateSign) {
  auto x = vec(counting_space(1), 3, {cplx(0, 2)}, Field::complex);
  EXPECT_NEAR(std::abs(sharp(x)[0] - cplx(0, -4)), 0.0, 1e-14);
}

TEST(Pairing, ExamplesAndErrors) {
  Rng rng(3);
  auto s = random_space(4, rng);
  auto x = random_unit_vector(s, Exponent(3), Field::complex, rng);
  EXPECT_NEAR(std::abs(pairing(sharp(x), x) - 1.0), 0.0, 1e-14);
  auto zero = LpVector::zeros(s, Exponent(1.5), Field::complex);
  EXPECT_EQ(pairing(zero, x), cplx(0.0));
  auto other = random_unit_vector(random_space(4, rng), Exponent(3), Field::complex, rng);
  EXPECT_THROW(pairing(sharp(x), other), InvalidArgument);
  EXPECT_THROW(pairing(x, x), InvalidArgument);
}

TEST(Pairing, DisjointSupportsSplitAdditively) {
  auto s = make_space({0.5, 1.0, 2.0, 0.25});
  auto u = vec(s, 3, {1.5, 0, -2, 0});
  auto v = vec(s, 3, {0, 0.7, 0, -0.1});
  auto joint = sharp(u + v);
  auto split = sharp(u) + sharp(v);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(joint[i] - split[i]), 0.0, 1e-15);
  auto x = vec(s, 3, {0.3, -1, 2, 5});
  EXPECT_NEAR(std::abs(pairing(joint, x) - pairing(sharp(u), x) - pairing(sharp(v), x)), 0.0, 1e-13);
}

TEST(LpCoreProperties, HolderNormingAndDoubleSharp) {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const double p = std::array{1.1, 1.3, 1.5, 2.0, 3.0, 5.0}[trial % 6];
    const Field field = trial % 2 ? Field::complex : Field::real;
    auto s = random_space(1 + trial % 8, rng);
    const Exponent e(p);
    LpVector x(s, e, field, random_values(s->size(), rng, field));
    LpVector f(s, e.dual(), field, random_values(s->size(), rng, field));
    EXPECT_LE(std::abs(pairing(f, x)), p_norm(f) * p_norm(x) * (1 + 1e-12));
    const double np = p_norm_pow(x);
    EXPECT_NEAR(pairing(sharp(x), x).real(), np, 1e-12 * np);
    EXPECT_NEAR(std::abs(pairing(sharp(x), x).imag()), 0.0, 1e-12 * np);
    EXPECT_NEAR(p_norm_pow(sharp(x)), np, 1e-12 * np);
    auto back = sharp(sharp(x));
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LE(std::abs(back[i] - x[i]), 1e-12 * std::abs(x[i]) + 1e-300);
  }
}

TEST(Lattice, JoinMeet) {
  auto s = counting_space(2);
  auto x = vec(s, 2, {1, -1});
  auto zero = vec(s, 2, {0, 0});
  auto j = lattice_join(x, zero);
  EXPECT_EQ(j[0], cplx(1.0));
  EXPECT_EQ(j[1], cplx(0.0));
  auto xx = lattice_join(x, x);
  EXPECT_EQ(xx[1], cplx(-1.0));
  auto m = lattice_meet(x, zero);
  EXPECT_EQ(m[0], cplx(0.0));
  EXPECT_EQ(m[1], cplx(-1.0));
  EXPECT_THROW(lattice_join(vec(s, 2, {1, 0}, Field::complex), zero), UnsupportedOperation);
  EXPECT_THROW(lattice_join(x, vec(s, 3, {0, 0})), InvalidArgument);
}

TEST(Lattice, JoinDominatesBoth) {
  Rng rng(2);
  auto s = random_space(6, rng);
  for (int t = 0; t < 50; ++t) {
    LpVector x(s, Exponent(2.5), Field::real, random_values(6, rng, Field::real));
    LpVector y(s, Exponent(2.5), Field::real, random_values(6, rng, Field::real));
    auto j = lattice_join(x, y);
    auto m = lattice_meet(x, y);
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_GE(j[i].real(), x[i].real());
      EXPECT_GE(j[i].real(), y[i].real());
      EXPECT_LE(m[i].real(), std::min(x[i].real(), y[i].real()));
    }
  }
}

TEST(Constants, KappaExamples) {
  EXPECT_NEAR(kappa(Exponent(2)), 0.5, 1e-15);
  EXPECT_NEAR(kappa(Exponent(3)), std::cbrt(4.0) / 3.0, 1e-15);
  for (double p : {1.1, 1.7, 3.0, 6.0}) {
    Exponent e(p);
    EXPECT_NEAR(kappa(e), kappa(e.dual()), 1e-15);
  }
}

TEST(Constants, AgreeWithFrozenOracle) {
  for (const auto& row : frozen::kConstants) {
    Exponent e(row.p);
    SCOPED_TRACE(row.p);
    EXPECT_NEAR(kappa(e), row.kappa, 1e-14);
    EXPECT_NEAR(tau_star(e), row.tau_star, 1e-14);
    EXPECT_NEAR(m_p(e), row.m_p, 1e-12);
    EXPECT_NEAR(narrow_bound_real(e), row.narrow_bound_real, 1e-12);
    if (row.narrow_bound_real > 0) {
      EXPECT_NEAR(narrow_bound_real_search(e).argmax, row.narrow_argmax, 1e-5);
    }
  }
}

TEST(Constants, ClosedFormsMatchMaximization) {
  for (double p : {1.1, 1.3, 1.5, 2.0, 3.0, 5.0, 10.0}) {
    Exponent e(p);
    SCOPED_TRACE(p);
    EXPECT_NEAR(kappa_by_maximization(e).value, kappa(e), 1e-9);
    EXPECT_NEAR(m_p_search(e).value, m_p_search_unit_interval(e).value, 1e-10);
    EXPECT_NEAR(kappa_objective(p, tau_star(e)), kappa(e), 1e-12);
    EXPECT_NEAR(m_p_kappa_over_6(e), m_p(e) * kappa(e) / 6.0, 1e-12);
  }
  EXPECT_NEAR(m_p(Exponent(2)), 0.0, 1e-12);
  EXPECT_NEAR(tau_star(Exponent(2)), 1.0, 1e-15);
  EXPECT_NEAR(tau_star(Exponent(3)), std::cbrt(2.0), 1e-15);
}

TEST(Constants, NarrowBoundPositiveExceptAtTwo) {
  EXPECT_EQ(narrow_bound_real(Exponent(2)), 0.0);
  for (double p : {1.2, 1.5, 1.9, 2.1, 3.0, 4.0, 8.0}) EXPECT_GT(narrow_bound_real(Exponent(p)), 0.0) << p;
}

TEST(ScalarSearch, GoldenSectionFindsPeak) {
  auto r = golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0);
  EXPECT_NEAR(r.argmax, 0.3, 1e-6);
  auto g = maximize_on_log_grid([](double x) { return std::log(x) / x; }, 1e-3, 1e3);
  EXPECT_NEAR(g.argmax, std::exp(1.0), 1e-6);
  EXPECT_THROW(maximize_on_log_grid([](double x) { return x; }, 0.0, 1.0), std::invalid_argument);
}
