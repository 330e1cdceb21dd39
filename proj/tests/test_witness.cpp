#include <gtest/gtest.h>

#include <cmath>

#include "lpnr/lpnr.hpp"
#include "test_support.hpp"

using namespace lpnr;
using namespace lpnr::testing;

namespace {

LpVector real_vec(SpacePtr s, double p, std::vector<double> v) { return LpVector::real(std::move(s), Exponent(p), v); }

}  // namespace

TEST(PositiveWitness, IdentityGivesOne) {
  Rng rng(1);
  auto s = random_space(4, rng);
  auto x0 = abs(random_unit_vector(s, Exponent(3), Field::real, rng));
  auto c = positive_witness(*make_identity(s, Exponent(3)), x0, 1.0);
  EXPECT_NEAR(c.achieved, 1.0, 1e-12);
  EXPECT_TRUE(c.valid());
}

TEST(PositiveWitness, T0IsTight) {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const Exponent e(p);
    auto t = make_t0(1, 1, e);
    auto c = positive_witness(*t, real_vec(t->space(), p, {1, 0}));
    EXPECT_NEAR(c.achieved, kappa(e), 1e-9);
    EXPECT_NEAR(c.bound, kappa(e), 1e-12);
    EXPECT_TRUE(c.valid());
  }
}

TEST(PositiveWitness, RandomNonnegativeReachesBound) {
  Rng rng(2);
  const Exponent e(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = random_nonnegative_op(4, e, rng);
    auto x0 = random_unit_vector(t->space(), e, Field::real, rng);
    auto c = positive_witness(*t, x0);
    const double tx = p_norm(apply(*t, abs(x0)));
    EXPECT_NEAR(c.bound, kappa(e) * tx, 1e-12 * tx);
    EXPECT_GE(c.achieved, c.bound - 1e-12);
    EXPECT_TRUE(c.identities_hold());
    EXPECT_NEAR(p_norm(c.vectors.front()), 1.0, 1e-12);
  }
}

TEST(PositiveWitness, Errors) {
  const Exponent e(3);
  EXPECT_THROW(positive_witness(*make_rotation(e)), PreconditionError);
  EXPECT_THROW(positive_witness(*make_shift(e, Field::complex)), UnsupportedOperation);
  EXPECT_THROW(positive_witness(*make_shift(e), std::nullopt, -1.0), InvalidArgument);
}

TEST(SignDecomposition, SingleComponent) {
  auto s = make_space({0.5, 1.5});
  auto z = real_vec(s, 3, {2, 4});
  auto x = real_vec(s, 3, {0.5, 1});
  auto d = sign_decomposition_full(z, x, {{0, 1}});
  ASSERT_EQ(d.terms.size(), 2u);
  EXPECT_DOUBLE_EQ(d.terms[0].weight, 0.625);
  EXPECT_DOUBLE_EQ(d.terms[1].weight, 0.375);
  EXPECT_EQ(d.terms[0].y[1], cplx(4.0));
  EXPECT_EQ(d.terms[1].y[1], cplx(-4.0));
}

TEST(SignDecomposition, XEqualsZHasOneTerm) {
  auto s = counting_space(3);
  auto z = real_vec(s, 2, {1, 2, 3});
  auto d = sign_decomposition_full(z, z);
  ASSERT_EQ(d.terms.size(), 1u);
  EXPECT_EQ(d.terms[0].weight, 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(d.terms[0].y[i], z[i]);
}

TEST(SignDecomposition, TwoAtomWeights) {
  auto s = counting_space(2);
  auto d = sign_decomposition_full(real_vec(s, 2, {1, 1}), real_vec(s, 2, {0.5, -0.5}));
  ASSERT_EQ(d.terms.size(), 4u);
  std::map<std::pair<int, int>, double> w;
  for (const auto& t : d.terms) w[{t.signs[0], t.signs[1]}] = t.weight;
  EXPECT_DOUBLE_EQ((w[{1, 1}]), 0.1875);
  EXPECT_DOUBLE_EQ((w[{1, -1}]), 0.5625);
  EXPECT_DOUBLE_EQ((w[{-1, 1}]), 0.0625);
  EXPECT_DOUBLE_EQ((w[{-1, -1}]), 0.1875);
}

TEST(SignDecomposition, Errors) {
  auto s = counting_space(2);
  EXPECT_THROW(sign_decomposition_full(real_vec(s, 2, {1, 1}), real_vec(s, 2, {2, 0})), PreconditionError);
  EXPECT_THROW(sign_decomposition_full(real_vec(s, 2, {1, 1}), real_vec(s, 2, {0.5, 0.2}), {{0, 1}}),
               PreconditionError);
  auto big = counting_space(16);
  auto z = LpVector::real(big, Exponent(2), std::vector<double>(16, 1.0));
  EXPECT_THROW(sign_decomposition_full(z, z.with_values(std::vector<cplx>(16, 0.5))), ResourceError);
}

TEST(SignDecomposition, PropertyInvariants) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 10;
    auto s = random_space(n, rng);
    std::vector<double> zv(n), xv(n);
    for (std::size_t i = 0; i < n; ++i) {
      zv[i] = trial % 7 == 0 && i == 0 ? 0.0 : std::abs(u(rng)) + 0.1;
      xv[i] = u(rng) * zv[i];
    }
    auto z = real_vec(s, 2.5, zv);
    auto x = real_vec(s, 2.5, xv);
    auto d = sign_decomposition_full(z, x);
    double wsum = 0.0;
    std::vector<double> rec(n, 0.0);
    for (const auto& t : d.terms) {
      wsum += t.weight;
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_EQ(std::abs(t.y[i].real()), zv[i]);
        rec[i] += t.weight * t.y[i].real();
      }
    }
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(rec[i], xv[i], 1e-12);
  }
}

TEST(SignSelection, ZeroXAndMonotoneScore) {
  auto s = make_space({0.5, 1.0, 2.0});
  auto z = real_vec(s, 3, {1, 2, 0.5});
  auto zero = real_vec(s, 3, {0, 0, 0});
  ScoreFn sum_abs = [&](std::span<const cplx> u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += std::abs(u[i]) * s->weight(i);
    return acc;
  };
  auto sel = best_sign_selection(z, zero, sum_abs);
  EXPECT_TRUE(sel.success);
  EXPECT_GE(sel.achieved, 0.0);
  auto x = real_vec(s, 3, {0.3, -1, 0.1});
  auto sel2 = best_sign_selection(z, x, sum_abs);
  EXPECT_NEAR(sel2.achieved, sum_abs(z.values()), 1e-15);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(std::abs(sel2.y[i].real()), z[i].real());
}

TEST(SignSelection, ExhaustiveBeatsScoreOfX) {
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = counting_space(2);
    auto t = make_matrix(s, Exponent(2), Field::real, random_values(4, rng, Field::real));
    const std::vector<double> f{u(rng), u(rng)};
    ScoreFn score = [&](std::span<const cplx> v) {
      const auto tv = t->apply_values(v);
      return f[0] * std::abs(tv[0]) + f[1] * std::abs(tv[1]);
    };
    auto x = real_vec(s, 2, {0.5, -0.5});
    auto sel = best_sign_selection(real_vec(s, 2, {1, 1}), x, score);
    EXPECT_TRUE(sel.exhaustive);
    EXPECT_TRUE(sel.success);
    EXPECT_GE(sel.achieved, score(x.values()));
  }
}

TEST(SignSelection, SamplingPathAndExplicitFailure) {
  Rng rng(5);
  const std::size_t n = 18;
  auto s = counting_space(n);
  auto t = make_matrix(s, Exponent(3), Field::real, random_values(n * n, rng, Field::real));
  std::vector<double> zv(n, 1.0), xv(n);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (auto& v : xv) v = u(rng);
  auto z = real_vec(s, 3, zv);
  auto x = real_vec(s, 3, xv);
  ScoreFn convex = [&](std::span<const cplx> v) {
    double acc = 0.0;
    for (const auto& c : t->apply_values(v)) acc += std::abs(c);
    return acc;
  };
  auto sel = best_sign_selection(z, x, convex, 1e-9, {}, 11);
  EXPECT_FALSE(sel.exhaustive);
  EXPECT_TRUE(sel.success);
  EXPECT_GE(sel.achieved, sel.target - 1e-9);

  // A score peaked strictly inside the box is beaten by no sign vector; the shortfall must be reported.
  ScoreFn concave = [&](std::span<const cplx> v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc -= std::norm(v[i] - xv[i]);
    return acc;
  };
  auto bad = best_sign_selection(z, x, concave, 1e-9, {}, 11);
  EXPECT_FALSE(bad.success);
  EXPECT_LT(bad.achieved, bad.target);
}

TEST(AbsWitnessReal, GalleryExamples) {
  for (double p : {1.3, 1.5, 3.0, 4.0}) {
    const Exponent e(p);
    SCOPED_TRACE(p);
    auto t0 = make_t0(1, 1, e);
    auto c = abs_radius_witness_real(*t0, std::nullopt, 0.0, real_vec(t0->space(), p, {1, 0}));
    EXPECT_NEAR(c.achieved, kappa(e), 1e-9);
    EXPECT_TRUE(c.valid());
    auto rot = abs_radius_witness_real(*make_rotation(e));
    EXPECT_GE(rot.achieved, kappa(e) - 1e-9);
    auto id = abs_radius_witness_real(*make_identity(counting_space(3), e));
    EXPECT_GE(id.achieved, kappa(e) - 1e-9);
    EXPECT_TRUE(id.valid());
  }
  EXPECT_THROW(abs_radius_witness_real(*make_shift(Exponent(3), Field::complex)), UnsupportedOperation);
}

TEST(AbsWitnessComplex, IdentitiesAndTightness) {
  for (double p : {1.5, 3.0}) {
    const Exponent e(p);
    auto t0 = make_t0(1, 1, e, Field::complex);
    LpVector x0(t0->space(), e, Field::complex, {1.0, 0.0});
    auto c = abs_radius_witness_complex(*t0, std::nullopt, x0);
    EXPECT_NEAR(c.achieved, kappa(e), 1e-9);
    EXPECT_TRUE(c.valid());
    EXPECT_EQ(c.vectors.size(), 2u);
  }
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = random_matrix_op(2 + trial % 5, Exponent(std::array{1.3, 1.5, 3.0, 4.0}[trial % 4]), Field::complex, rng);
    auto c = abs_radius_witness_complex(*t);
    EXPECT_TRUE(c.identities_hold());
    EXPECT_GE(c.achieved, c.bound - 1e-9);
    EXPECT_GE(c.identities.size(), 3u);
  }
  EXPECT_THROW(abs_radius_witness_complex(*make_shift(Exponent(3))), UnsupportedOperation);
}

TEST(AbsWitness, NeverExceedsSeededEstimate) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Field field = trial % 2 ? Field::complex : Field::real;
    auto t = random_matrix_op(3, Exponent(2.5), field, rng);
    auto c = abs_radius_witness(*t);
    RadiusOptions opt;
    opt.extra_starts = c.vectors;
    EXPECT_LE(c.achieved, abs_numerical_radius_lower(*t, opt).value + 1e-12);
  }
}

TEST(RankOneWitness, DisjointSupportsAtTwo) {
  auto s = counting_space(2);
  const Exponent e(2);
  LpVector f(s, e, Field::real, {1.0, 0.0});
  LpVector y(s, e, Field::real, {0.0, 1.0});
  auto c = rank_one_witness(f, y, 0.5, 1.0);
  EXPECT_NEAR(c.achieved, 0.25, 1e-12);
  EXPECT_TRUE(c.valid());
}

TEST(RankOneWitness, EqualVectorsAtTwo) {
  auto s = counting_space(2);
  const Exponent e(2);
  const double r = std::sqrt(0.5);
  LpVector x(s, e, Field::real, {r, r});
  auto c = rank_one_witness(sharp(x), x, 0.5, 1.0);
  EXPECT_NEAR(c.achieved, 1.0, 1e-12);
}

TEST(RankOneWitness, RandomOperatorsReachKappaSquared) {
  Rng rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const Exponent e{std::array{1.5, 3.0, 1.2, 6.0}[trial % 4]};
    const Field field = trial % 3 ? Field::real : Field::complex;
    auto t = random_rank_one_op(2 + trial % 5, e, field, rng);
    const auto& ro = std::get<RankOneForm>(t->form());
    const double nt = p_norm(LpVector(t->space(), e.dual(), field, ro.f)) * p_norm(LpVector(t->space(), e, field, ro.y));
    auto c = rank_one_witness(*t);
    EXPECT_GE(c.achieved, kappa(e) * kappa(e) * nt - 1e-9 * nt);
    EXPECT_NEAR(c.bound, kappa(e) * kappa(e) * nt, 1e-12 * nt);
    for (const auto& id : c.identities) EXPECT_TRUE(id.holds()) << id.description;
    EXPECT_NEAR(c.achieved, v_quotient(*c.op, c.vectors.front().values()), 1e-12 * nt);
  }
  EXPECT_THROW(rank_one_witness(*make_shift(Exponent(3))), PreconditionError);
}

TEST(HilbertWitness, Examples) {
  auto s = counting_space(2);
  const Exponent e(2);
  LpVector x1(s, e, Field::real, {1.0, 0.0});
  LpVector x2(s, e, Field::real, {0.0, 1.0});
  EXPECT_NEAR(hilbert_rank_one_witness(x1, x2).achieved, 0.5, 1e-12);
  EXPECT_NEAR(hilbert_rank_one_witness(x1, x1).achieved, 1.0, 1e-12);
  EXPECT_NEAR(hilbert_rank_one_witness(x1, -1.0 * x1).achieved, 1.0, 1e-12);
  EXPECT_THROW(hilbert_rank_one_witness(x1.with_exponent(Exponent(3)), x2.with_exponent(Exponent(3))),
               UnsupportedOperation);
}

TEST(HilbertWitness, ClosedFormOnRandomPairs) {
  Rng rng(9);
  auto s = counting_space(4);
  const Exponent e(2);
  for (int trial = 0; trial < 50; ++trial) {
    auto x1 = random_unit_vector(s, e, Field::real, rng);
    auto x2 = random_unit_vector(s, e, Field::real, rng);
    auto c = hilbert_rank_one_witness(x1, x2);
    const double ip = pairing(x1, x2).real();
    EXPECT_NEAR(c.achieved, (1 + std::abs(ip)) / 2, 1e-12);
    EXPECT_NEAR(c.achieved, v_quotient(*c.op, c.vectors.front().values()), 1e-12);
    EXPECT_TRUE(c.valid());
  }
}
