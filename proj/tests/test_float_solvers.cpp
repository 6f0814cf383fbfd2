#include <gtest/gtest.h>

#include "riemocad/float_solvers.hpp"
#include "test_util.hpp"

using namespace riemocad;
using riemocad::testing::gaussian;
using riemocad::testing::make_fixture;

namespace {

// Plain weighted least squares over [vec(R); vec(N)] straight from the design.
Vector brute_force_lsq(const ObservationSet& obs) {
  const Matrix j(Eigen::Index(0), Eigen::Index(0));
  const Matrix xb = obs.body_baselines();
  const Matrix jr = kron(xb.transpose(), obs.design_geometry());
  const Matrix jn = kron(Matrix::Identity(obs.n_baselines(), obs.n_baselines()),
                         obs.design_ambiguity());
  Matrix full(jr.rows(), jr.cols() + jn.cols());
  full << jr, jn;
  const Matrix m = full.transpose() * obs.weight() * full;
  return m.ldlt().solve(full.transpose() * obs.weight() * vec(obs.y()));
}

}  // namespace

TEST(FloatSolvers, NormalMatrixMatchesJacobian) {
  const auto f = make_fixture(1, 6, 2);
  const Matrix xb = f.obs.body_baselines();
  const Matrix jr = kron(xb.transpose(), f.obs.design_geometry());
  const Matrix jn = kron(Matrix::Identity(2, 2), f.obs.design_ambiguity());
  Matrix full(jr.rows(), jr.cols() + jn.cols());
  full << jr, jn;
  const Matrix expect = full.transpose() * f.obs.weight() * full;
  const Matrix m = build_normal_matrix(f.obs.design_geometry(), f.obs.design_ambiguity(), xb,
                                       f.obs.weight());
  EXPECT_LT((m - expect).norm() / expect.norm(), 1e-12);
}

TEST(FloatSolvers, AcSolutionIsLeastSquares) {
  const auto f = make_fixture(2, 7, 2);
  const FloatSolutionAC& fs = f.ctx.fs;
  const Vector theta = brute_force_lsq(f.obs);
  const Eigen::Index nr = fs.r_hat.size();
  EXPECT_LT((vec(fs.r_hat) - theta.head(nr)).norm(), 1e-6 * std::max(1.0, theta.norm()));
  EXPECT_LT((vec(fs.n_hat) - theta.tail(theta.size() - nr)).norm(), 1e-6 * theta.norm());
  EXPECT_NEAR(fs.residual_sq, objective_value(f.obs, fs.r_hat, fs.n_hat),
              1e-8 * std::max(1.0, fs.residual_sq));
}

TEST(FloatSolvers, AcCovarianceInvertsNormalMatrix) {
  const auto f = make_fixture(3, 6, 3);
  const FloatSolutionAC& fs = f.ctx.fs;
  const Eigen::Index nr = fs.r_hat.size(), nn = fs.n_hat.size();
  Matrix cov(nr + nn, nr + nn);
  cov << fs.cov_rr, fs.cov_rn, fs.cov_nr, fs.cov_nn;
  EXPECT_LT((cov * fs.normal - Matrix::Identity(nr + nn, nr + nn)).norm(), 1e-6);
  EXPECT_LT((fs.weight_nn * fs.cov_nn - Matrix::Identity(nn, nn)).norm(), 1e-6);
  EXPECT_LT((fs.m_rr * fs.cond_cov_rr_given_n - Matrix::Identity(nr, nr)).norm(), 1e-6);
}

TEST(FloatSolvers, BlockDiagonalizingTransforms) {
  const auto f = make_fixture(4, 6, 2);
  const FloatSolutionAC& fs = f.ctx.fs;
  const Eigen::Index nr = fs.r_hat.size(), nn = fs.n_hat.size(), n = nr + nn;
  const Matrix t1_inv = fs.t1.inverse();
  const Matrix d1 = t1_inv.transpose() * fs.normal * t1_inv;
  EXPECT_LT(d1.topRightCorner(nr, nn).norm(), 1e-6 * fs.normal.norm());
  EXPECT_LT((d1.topLeftCorner(nr, nr) - fs.weight_rr).norm(), 1e-6 * fs.normal.norm());
  EXPECT_LT((d1.bottomRightCorner(nn, nn) - fs.m_nn).norm(), 1e-6 * fs.normal.norm());
  const Matrix t2_inv = fs.t2.inverse();
  const Matrix d2 = t2_inv.transpose() * fs.normal * t2_inv;
  EXPECT_LT(d2.topRightCorner(nr, nn).norm(), 1e-6 * fs.normal.norm());
  EXPECT_LT((d2.topLeftCorner(nr, nr) - fs.m_rr).norm(), 1e-6 * fs.normal.norm());
  EXPECT_LT((d2.bottomRightCorner(nn, nn) - fs.weight_nn).norm(), 1e-6 * fs.normal.norm());
  EXPECT_TRUE(fs.t1.topLeftCorner(nr, nr).isIdentity());
  EXPECT_TRUE(fs.t2.bottomRightCorner(nn, nn).isIdentity());
  EXPECT_EQ(fs.t1.rows(), n);
}

TEST(FloatSolvers, LowerLeftOfT1HasKroneckerStructure) {
  // Phase and code share H, so M_NN^-1 M_NR = (X_b' (x) H) / lambda exactly.
  const auto f = make_fixture(5, 6, 2);
  const FloatSolutionAC& fs = f.ctx.fs;
  const Eigen::Index nr = fs.r_hat.size(), nn = fs.n_hat.size();
  const Matrix h = f.obs.design_geometry().topRows(f.obs.n_sat_dd());
  const Matrix expect = kron(f.obs.body_baselines().transpose(), h) / f.scenario.wavelength;
  EXPECT_LT((fs.t1.bottomLeftCorner(nn, nr) - expect).norm(), 1e-6 * expect.norm());
}

TEST(FloatSolvers, XiBoundsAreEigenvalueExtremes) {
  const auto f = make_fixture(6, 5, 2);
  const FloatSolutionAC& fs = f.ctx.fs;
  Eigen::SelfAdjointEigenSolver<Matrix> es(fs.m_rr);
  EXPECT_NEAR(fs.xi_min, es.eigenvalues().minCoeff(), 1e-8 * fs.xi_max);
  EXPECT_NEAR(fs.xi_max, es.eigenvalues().maxCoeff(), 1e-8 * fs.xi_max);
  EXPECT_GT(fs.xi_min, 0.0);
}

TEST(FloatSolvers, ConditionalEstimatesMinimizeObjective) {
  const auto f = make_fixture(7, 6, 2);
  const FloatSolutionAC& fs = f.ctx.fs;
  Rng rng = make_rng({7});
  const Matrix n = to_real(riemocad::testing::perturb(fs.n_hat, rng, 2));
  const Matrix r = conditional_r(fs, n);
  const double best = objective_value(f.obs, r, n);
  for (int k = 0; k < 20; ++k)
    EXPECT_GE(objective_value(f.obs, r + gaussian(3, fs.q(), rng, 1e-3), n), best - 1e-9);
  const Matrix r2 = fs.r_hat + gaussian(3, fs.q(), rng, 0.01);
  const Matrix n2 = conditional_n(fs, r2);
  const double best2 = objective_value(f.obs, r2, n2);
  for (int k = 0; k < 20; ++k)
    EXPECT_GE(objective_value(f.obs, r2, n2 + gaussian(n2.rows(), n2.cols(), rng, 1e-2)),
              best2 - 1e-9);
}

TEST(FloatSolvers, UcSolutionAndConditional) {
  const auto f = make_fixture(8, 6, 2);
  const FloatSolutionUC fs = solve_float_uc(f.obs);
  ASSERT_EQ(fs.x_hat.rows(), 3);
  ASSERT_EQ(fs.x_hat.cols(), 2);
  // Unconstrained float fits at least as well as the attitude-constrained one.
  EXPECT_LE(fs.residual_sq, f.ctx.fs.residual_sq + 1e-8);
  const Matrix n = to_real(f.scenario.true_ambiguities);
  const Matrix x = conditional_x(fs, n);
  Rng rng = make_rng({8});
  const double best = [&] {
    const Matrix e = f.obs.y() - f.obs.design_geometry() * x - f.obs.design_ambiguity() * n;
    return weighted_sq_norm(vec(e), f.obs.weight());
  }();
  for (int k = 0; k < 10; ++k) {
    const Matrix xp = x + gaussian(3, 2, rng, 1e-3);
    const Matrix e = f.obs.y() - f.obs.design_geometry() * xp - f.obs.design_ambiguity() * n;
    EXPECT_GE(weighted_sq_norm(vec(e), f.obs.weight()), best - 1e-9);
  }
  const double three = decompose_orthogonal(fs, x, n).sum();
  EXPECT_NEAR(three, best, 1e-8 * std::max(1.0, best));
}

TEST(FloatSolvers, RejectsRankDeficientBaselines) {
  const auto f = make_fixture(9, 6, 2);
  Matrix xb = Matrix::Ones(2, 2);
  EXPECT_THROW(solve_float_ac(f.obs, xb), std::invalid_argument);
}

TEST(FloatSolvers, DegenerateGeometryIsReported) {
  // Coplanar line-of-sight rows make the attitude block singular.
  Matrix los(4, 3);
  los << 0.1, 0.2, 0.0, -0.3, 0.1, 0.0, 0.2, -0.4, 0.0, 0.5, 0.5, 0.0;
  const DesignMatrices d = build_design_matrices(los, kDefaultWavelength);
  Matrix xb(1, 1);
  xb << 1.0;
  const ObservationSet obs(Matrix::Zero(8, 1), d.geometry, d.ambiguity,
                           build_covariance(1e-3, 0.1, 4, 1), xb);
  EXPECT_THROW(solve_float_ac(obs, xb), DegenerateGeometry);
}

TEST(FloatSolvers, RiemannianFloatIsOrthonormalAndOptimal) {
  const auto f = make_fixture(10, 7, 3);
  const RieMFloat& rm = f.ctx.rm;
  EXPECT_LT(orthonormality_error(rm.r_rm.matrix()), 1e-12);
  EXPECT_FALSE(rm.stalled);
  const Matrix diff = rm.r_rm.matrix() - f.ctx.fs.r_hat;
  EXPECT_NEAR(rm.objective, weighted_sq_norm(vec(diff), f.ctx.fs.weight_rr), 1e-9);
  EXPECT_LT((rm.n_rm - conditional_n(f.ctx.fs, rm.r_rm.matrix())).norm(), 1e-9);
  Rng rng = make_rng({10});
  for (int k = 0; k < 100; ++k) {
    const StiefelPoint p = StiefelPoint::random(3, rng);
    EXPECT_LE(rm.objective,
              weighted_sq_norm(vec(Matrix(p.matrix() - f.ctx.fs.r_hat)), f.ctx.fs.weight_rr) +
                  1e-9);
  }
}
