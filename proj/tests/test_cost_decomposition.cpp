#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace riemocad;
using riemocad::testing::gaussian;
using riemocad::testing::make_fixture;
using riemocad::testing::perturb;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(CostDecomposition, IdentitiesOnRandomPoints) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = make_fixture(seed, 4 + seed % 5, 1 + seed % 3);
    const FloatSolutionAC& fs = f.ctx.fs;
    Rng rng = make_rng({seed, 1});
    for (int k = 0; k < 20; ++k) {
      const Matrix r = fs.r_hat + gaussian(3, fs.q(), rng, 0.05);
      const Matrix n = to_real(perturb(fs.n_hat, rng, 3));
      const Matrix rb = fs.r_hat + gaussian(3, fs.q(), rng, 0.05);
      const Matrix nb = to_real(perturb(fs.n_hat, rng, 3));
      const double direct = objective_value(f.obs, r, n);
      EXPECT_LE(rel(decompose_orthogonal(fs, r, n).sum(), direct), 1e-8);
      EXPECT_LE(rel(decompose_at_point(fs, f.obs, rb, nb, r, n).sum(), direct), 1e-8);
      EXPECT_LE(rel(decompose_at_point_alt(fs, f.obs, rb, nb, r, n).sum(), direct), 1e-8);
    }
  }
}

TEST(CostDecomposition, FiveTermsAtFloatReduceToThree) {
  const auto f = make_fixture(11, 6, 2);
  const FloatSolutionAC& fs = f.ctx.fs;
  Rng rng = make_rng({11});
  const Matrix r = fs.r_hat + gaussian(3, 2, rng, 0.05);
  const Matrix n = to_real(perturb(fs.n_hat, rng, 2));
  const FiveTerms t = decompose_at_point(fs, f.obs, fs.r_hat, fs.n_hat, r, n);
  EXPECT_NEAR(t.residual, fs.residual_sq, 1e-8 * std::max(1.0, fs.residual_sq));
  EXPECT_NEAR(t.n_cross, 0.0, 1e-8);
  EXPECT_NEAR(t.r_cross, 0.0, 1e-8);
}

TEST(CostDecomposition, StiefelDistance) {
  EXPECT_NEAR(stiefel_distance_sq(Matrix::Identity(3, 2)), 0.0, 1e-15);
  Matrix m = Matrix::Zero(3, 2);
  m(0, 0) = 2.0;
  m(1, 1) = 0.5;
  EXPECT_NEAR(stiefel_distance_sq(m), 1.0 + 0.25, 1e-14);
  EXPECT_NEAR(column_norm_penalty(m), 1.0 + 0.25, 1e-14);
  // Distance equals ||m - polar(m)||^2.
  Rng rng = make_rng({12});
  const Matrix g = gaussian(3, 3, rng);
  EXPECT_NEAR(stiefel_distance_sq(g), (g - polar_factor(g)).squaredNorm(), 1e-10);
}

TEST(CostDecomposition, BoundsSandwichCost) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto f = make_fixture(20 + seed, 4 + seed % 5, 1 + seed % 3);
    Rng rng = make_rng({seed, 2});
    for (int k = 0; k < 40; ++k) {
      const Matrix n = to_real(perturb(f.ctx.fs.n_hat, rng, 2));
      const double c = cost_c(f.ctx, n).value;
      const double slack = 1e-9 * std::max(1.0, std::abs(c));
      EXPECT_LE(bound_lower(f.ctx, n), c + slack);
      EXPECT_LE(c, bound_upper(f.ctx, n) + slack);
    }
  }
}

TEST(CostDecomposition, ColumnNormPenaltyUnderestimatesForTwoColumns) {
  // Unit columns at 60 degrees: zero column-norm penalty, yet off the manifold.
  Matrix c = Matrix::Zero(3, 2);
  c(0, 0) = 1.0;
  c(0, 1) = 0.5;
  c(1, 1) = std::sqrt(0.75);
  const double xi = 3.0;
  const MinimizeResult r =
      weighted_procrustes(c, xi * Matrix::Identity(6, 6), OptimizerConfig{}, kRandomStarts);
  EXPECT_NEAR(column_norm_penalty(c), 0.0, 1e-15);
  EXPECT_NEAR(r.cost, xi * stiefel_distance_sq(c), 1e-8);
  EXPECT_GT(r.cost, xi * column_norm_penalty(c) + 0.1);
}

TEST(CostDecomposition, ColumnNormUpperFormViolatedOnRealInstance) {
  // Pick a real-valued N whose conditional attitude has unit, non-orthogonal
  // columns: the column-norm form collapses to the quadratic part while C
  // keeps a positive inner term.
  const auto f = make_fixture(40, 6, 2);
  const FloatSolutionAC& fs = f.ctx.fs;
  Matrix target = Matrix::Zero(3, 2);
  target(0, 0) = 1.0;
  target(0, 1) = 0.5;
  target(1, 1) = std::sqrt(0.75);
  const Vector shift = fs.gain_rn.completeOrthogonalDecomposition().solve(
      vec(Matrix(fs.r_hat - target)));
  const Matrix n = fs.n_hat - unvec(shift, fs.n_hat.rows(), fs.n_hat.cols());
  ASSERT_LT((conditional_r(fs, n) - target).norm(), 1e-8);
  const double c = cost_c(f.ctx, n).value;
  EXPECT_NEAR(bound_upper_column_norm(f.ctx, n), cost_quadratic(f.ctx, n), 1e-6);
  EXPECT_GT(c, bound_upper_column_norm(f.ctx, n) + 1e-3);
  EXPECT_LE(c, bound_upper(f.ctx, n) + 1e-9 * std::max(1.0, c));
}

TEST(CostDecomposition, UpperFormsAgreeForOneColumn) {
  const auto f = make_fixture(50, 6, 1);
  Rng rng = make_rng({50});
  for (int k = 0; k < 20; ++k) {
    const Matrix n = to_real(perturb(f.ctx.fs.n_hat, rng, 3));
    EXPECT_NEAR(bound_upper(f.ctx, n), bound_upper_column_norm(f.ctx, n),
                1e-9 * std::max(1.0, bound_upper(f.ctx, n)));
  }
}

TEST(CostDecomposition, CostMinusMcLambdaCostIsConstant) {
  const auto f = make_fixture(60, 5, 2);
  Rng rng = make_rng({60});
  const double offset = cost_offset(f.ctx);
  for (int k = 0; k < 30; ++k) {
    const Matrix n = to_real(perturb(f.ctx.fs.n_hat, rng, 3));
    const double c = cost_c(f.ctx, n).value;
    const double mc = mc_lambda_cost(f.ctx, n).value;
    EXPECT_NEAR(c - mc, offset, 1e-8 * std::max(1.0, std::abs(c)));
  }
  EXPECT_LE(offset, 0.0);
}

TEST(CostDecomposition, CostEqualsProfiledObjective) {
  // C(N) + residual_sq + ||N_rm - N_hat||^2 equals min over R of the objective.
  const auto f = make_fixture(61, 6, 2);
  Rng rng = make_rng({61});
  const Matrix n = to_real(perturb(f.ctx.fs.n_hat, rng, 1));
  const CostValue c = cost_c(f.ctx, n);
  EXPECT_LT(orthonormality_error(c.r), 1e-10);
  const double profiled = objective_value(f.obs, c.r, n);
  EXPECT_NEAR(c.value - cost_offset(f.ctx) + f.ctx.fs.residual_sq, profiled,
              1e-7 * std::max(1.0, profiled));
  for (int k = 0; k < 50; ++k) {
    const StiefelPoint p = StiefelPoint::random(2, rng);
    EXPECT_GE(objective_value(f.obs, p.matrix(), n), profiled - 1e-7);
  }
}

TEST(CostDecomposition, IntegerAndRealOverloadsAgree) {
  const auto f = make_fixture(62, 6, 1);
  const IntMatrix n = f.scenario.true_ambiguities;
  EXPECT_DOUBLE_EQ(cost_c(f.ctx, n).value, cost_c(f.ctx, to_real(n)).value);
}
