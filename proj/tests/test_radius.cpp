#include <gtest/gtest.h>

#include <cmath>

#include "frozen_values.hpp"
#include "lpnr/lpnr.hpp"
#include "test_support.hpp"

using namespace lpnr;
using namespace lpnr::testing;

TEST(Radius, IdentityHasRadiusOne) {
  auto t = make_identity(make_space({0.4, 1.1, 2.0}), Exponent(3), Field::complex);
  auto r = numerical_radius_lower(*t);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_NEAR(p_norm(r.witness), 1.0, 1e-12);
  EXPECT_NEAR(abs_numerical_radius_lower(*t).value, 1.0, 1e-12);
}

TEST(Radius, GalleryValues) {
  for (double p : {1.3, 1.5, 2.0, 3.0, 4.0}) {
    const Exponent e(p);
    SCOPED_TRACE(p);
    EXPECT_NEAR(numerical_radius_lower(*make_shift(e)).value, kappa(e), 1e-6);
    EXPECT_NEAR(numerical_radius_lower(*make_rotation(e)).value, m_p(e), 1e-6);
    EXPECT_NEAR(abs_numerical_radius_lower(*make_rotation(e)).value, 1.0, 1e-6);
    EXPECT_NEAR(abs_numerical_radius_lower(*make_t0(0.3, 1.7, e)).value, kappa(e), 1e-6);
    EXPECT_NEAR(grid_oracle(*make_shift(e), Quantity::v, 10000).value, kappa(e), 1e-6);
    EXPECT_NEAR(grid_oracle(*make_rotation(e), Quantity::v, 10000).value, m_p(e), 1e-6);
    EXPECT_NEAR(grid_oracle(*make_rotation(e), Quantity::abs_v, 10000).value, 1.0, 1e-6);
  }
}

TEST(Radius, ComplexShiftStillKappa) {
  for (double p : {1.5, 3.0}) {
    const Exponent e(p);
    EXPECT_NEAR(numerical_radius_lower(*make_shift(e, Field::complex)).value, kappa(e), 1e-6);
    EXPECT_NEAR(grid_oracle(*make_shift(e, Field::complex), Quantity::v, 400).value, kappa(e), 1e-4);
  }
}

TEST(Radius, AgreesWithFrozenOracleMatrix) {
  for (const auto& row : frozen::kMatrixRadii) {
    const Exponent e(row.p);
    SCOPED_TRACE(row.p);
    auto t = make_matrix(make_space({frozen::kMatrixWeights[0], frozen::kMatrixWeights[1]}), e, Field::real,
                         {frozen::kMatrix[0], frozen::kMatrix[1], frozen::kMatrix[2], frozen::kMatrix[3]});
    auto pair = radius_estimates(*t);
    EXPECT_NEAR(op_norm_lower(*t).estimate, row.norm, 1e-10);
    EXPECT_NEAR(pair.v.value, row.v, 1e-10);
    EXPECT_NEAR(pair.abs_v.value, row.abs_v, 1e-10);
  }
}

TEST(Radius, EstimateIsObjectiveAtWitness) {
  Rng rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    const Field field = trial % 2 ? Field::complex : Field::real;
    auto t = random_matrix_op(2 + trial % 4, Exponent(trial % 3 ? 1.7 : 3.5), field, rng);
    auto pair = radius_estimates(*t);
    EXPECT_NEAR(pair.v.value, v_quotient(*t, pair.v.witness.values()), 1e-12 * std::max(1.0, pair.v.value));
    EXPECT_NEAR(pair.abs_v.value, abs_quotient(*t, pair.abs_v.witness.values()),
                1e-12 * std::max(1.0, pair.abs_v.value));
    EXPECT_NEAR(p_norm(pair.v.witness), 1.0, 1e-12);
    EXPECT_GE(pair.abs_v.value, pair.v.value - 1e-12);
  }
}

TEST(Radius, PositiveOperatorsHaveEqualRadii) {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    auto t = random_nonnegative_op(2 + trial % 5, Exponent(std::array{1.3, 2.0, 3.0}[trial % 3]), rng);
    auto pair = radius_estimates(*t);
    EXPECT_NEAR(pair.v.value, pair.abs_v.value, 1e-8);
  }
}

TEST(Radius, VNeverExceedsAbsVOnAnyVector) {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const Field field = trial % 2 ? Field::complex : Field::real;
    const Exponent e(1.2 + 0.05 * trial);
    auto t = random_matrix_op(1 + trial % 6, e, field, rng);
    auto x = random_unit_vector(t->space(), e, field, rng);
    EXPECT_LE(v_quotient(*t, x.values()), abs_quotient(*t, x.values()) + 1e-12);
    EXPECT_LE(abs_quotient(*t, x.values()), norm_quotient(*t, x.values()) * (1 + 1e-12));
  }
}

TEST(Radius, ObjectivesArePhaseInvariantAndScaleFree) {
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const Exponent e(2.7);
    auto t = random_matrix_op(3, e, Field::complex, rng);
    auto x = random_unit_vector(t->space(), e, Field::complex, rng);
    const cplx theta = std::polar(1.0, 0.37 * trial);
    const auto y = (3.5 * theta) * x;
    for (Quantity q : {Quantity::v, Quantity::abs_v, Quantity::norm_quotient}) {
      const double a = evaluate(q, *t, x.values());
      EXPECT_NEAR(evaluate(q, *t, y.values()), a, 1e-12 * std::max(1.0, a));
    }
  }
  auto t = make_identity(counting_space(2), Exponent(3));
  EXPECT_EQ(v_quotient(*t, std::vector<cplx>{0, 0}), 0.0);
}

TEST(Radius, ScaleEquivariance) {
  Rng rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    const Field field = trial % 2 ? Field::complex : Field::real;
    auto t = random_matrix_op(3, Exponent(1.5 + trial * 0.3), field, rng);
    const cplx c = field == Field::complex ? cplx(0.0, 2.0) : cplx(2.0);
    auto ct = scaled(t, c);
    RadiusOptions opt;
    opt.seed = 77;
    EXPECT_NEAR(numerical_radius_lower(*ct, opt).value, 2.0 * numerical_radius_lower(*t, opt).value,
                1e-12 * numerical_radius_lower(*ct, opt).value);
    EXPECT_NEAR(abs_numerical_radius_lower(*ct, opt).value, 2.0 * abs_numerical_radius_lower(*t, opt).value,
                1e-12 * abs_numerical_radius_lower(*ct, opt).value);
  }
}

TEST(Radius, AscentIsMonotone) {
  Rng rng(45);
  auto t = random_matrix_op(5, Exponent(3.3), Field::complex, rng);
  for (Quantity q : {Quantity::v, Quantity::abs_v}) {
    std::map<int, double> last;
    RadiusOptions opt;
    opt.observer = [&](int start, int, double value) {
      auto it = last.find(start);
      if (it != last.end()) {
        EXPECT_GE(value, it->second);
      }
      last[start] = value;
    };
    q == Quantity::v ? numerical_radius_lower(*t, opt) : abs_numerical_radius_lower(*t, opt);
    EXPECT_FALSE(last.empty());
  }
}

TEST(Radius, DeterministicGivenSeed) {
  Rng rng(46);
  auto t = random_matrix_op(4, Exponent(1.4), Field::complex, rng);
  RadiusOptions opt;
  opt.seed = 3;
  auto a = radius_estimates(*t, opt);
  auto b = radius_estimates(*t, opt);
  EXPECT_EQ(a.v.value, b.v.value);
  EXPECT_EQ(a.abs_v.value, b.abs_v.value);
  EXPECT_EQ(a.v.witness.values()[0], b.v.witness.values()[0]);
}

TEST(GridOracle, ExamplesAndLimits) {
  const Exponent e(2);
  EXPECT_NEAR(grid_oracle(*make_identity(counting_space(2), e), Quantity::v, 50).value, 1.0, 1e-12);
  EXPECT_NEAR(grid_oracle(*make_identity(counting_space(3), e), Quantity::v, 50).value, 1.0, 1e-12);
  EXPECT_NEAR(grid_oracle(*make_shift(e), Quantity::v, 10000).value, 0.5, 1e-4);
  auto g = grid_oracle(*make_shift(e), Quantity::v, 100);
  EXPECT_EQ(g.method, RadiusMethod::grid);
  EXPECT_THROW(grid_oracle(*make_identity(counting_space(4), e), Quantity::v, 10), UnsupportedOperation);
  EXPECT_THROW(grid_oracle(*make_identity(counting_space(3), e, Field::complex), Quantity::v, 10),
               UnsupportedOperation);
  EXPECT_THROW(grid_oracle(*make_shift(e), Quantity::v, 0), InvalidArgument);
}

TEST(GridOracle, CrossValidatesAscentInDimensionTwo) {
  Rng rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    const Exponent e{std::array{1.3, 1.5, 3.0, 4.0}[trial % 4]};
    auto t = random_matrix_op(2, e, Field::real, rng);
    for (Quantity q : {Quantity::v, Quantity::abs_v}) {
      const double grid = grid_oracle(*t, q, 10000).value;
      const double asc =
          q == Quantity::v ? numerical_radius_lower(*t).value : abs_numerical_radius_lower(*t).value;
      EXPECT_GE(asc, grid - 1e-4);
      EXPECT_NEAR(asc, grid, 1e-4 * std::max(1.0, asc));
    }
  }
}

TEST(RatioReport, T0Identity) {
  for (double p : {1.5, 3.0}) {
    const Exponent e(p);
    auto r = ratio_report(make_t0(1, 1, e));
    EXPECT_NEAR(r.abs_ratio, kappa(e), 1e-6);
    EXPECT_FALSE(r.certified_violation);
    EXPECT_FALSE(r.budget_failure);
    for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name;
  }
  auto id = ratio_report(make_identity(counting_space(3), Exponent(3)));
  EXPECT_NEAR(id.v_ratio, 1.0, 1e-12);
  EXPECT_FALSE(id.certified_violation);
}

TEST(RatioReport, RandomPositiveFourByFour) {
  Rng rng(48);
  const Exponent e(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto r = ratio_report(random_nonnegative_op(4, e, rng));
    EXPECT_GE(r.v_ratio, kappa(e) - 1e-8);
    EXPECT_FALSE(r.certified_violation);
    bool has_positive = false;
    for (const auto& c : r.checks) has_positive = has_positive || c.name == "positive";
    EXPECT_TRUE(has_positive);
  }
}

TEST(RatioReport, ZeroOperator) {
  auto r = ratio_report(make_zero(counting_space(2), Exponent(3)));
  EXPECT_EQ(r.norm, 0.0);
  EXPECT_TRUE(r.checks.empty());
  EXPECT_FALSE(r.certified_violation);
}
