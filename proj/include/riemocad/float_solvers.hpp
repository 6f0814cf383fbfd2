#pragma once

#include "riemocad/gnss_model.hpp"
#include "riemocad/stiefel.hpp"

namespace riemocad {

/// Float solution of the unconstrained model Y = A X + B N (X is 3 x A).
struct FloatSolutionUC {
  Matrix x_hat;   // 3 x A
  Matrix n_hat;   // S x A
  Matrix cov_xx;  // 3A x 3A
  Matrix cov_xn;  // 3A x SA
  Matrix cov_nx;  // SA x 3A
  Matrix cov_nn;  // SA x SA
  double residual_sq = 0.0;

  Matrix normal;     // full normal matrix J'WJ over [vec(X); vec(N)]
  Matrix weight_nn;  // inverse of cov_nn
  Matrix m_xx;       // inverse of the conditional covariance of X given N
  Matrix gain_xn;    // cov_xn * weight_nn

  Eigen::Index n_sat_dd() const { return n_hat.rows(); }
  Eigen::Index n_baselines() const { return n_hat.cols(); }
};

/// Float solution of the attitude-constrained model without the orthonormality
/// constraint, Y = A R X_b + B N (R is 3 x q).
struct FloatSolutionAC {
  Matrix r_hat;  // 3 x q
  Matrix n_hat;  // S x A
  Matrix cov_rr;
  Matrix cov_rn;
  Matrix cov_nr;
  Matrix cov_nn;
  Matrix cond_cov_rr_given_n;
  Matrix cond_cov_nn_given_r;
  double residual_sq = 0.0;
  double xi_min = 0.0;
  double xi_max = 0.0;

  Matrix normal;     // M over [vec(R); vec(N)]
  Matrix weight_rr;  // inverse of cov_rr
  Matrix weight_nn;  // inverse of cov_nn
  Matrix m_rr;       // inverse of cond_cov_rr_given_n
  Matrix m_nn;       // inverse of cond_cov_nn_given_r
  Matrix gain_rn;    // cov_rn * weight_nn
  Matrix gain_nr;    // cov_nr * weight_rr
  Matrix t1;         // [[I, 0], [M_NN^-1 M_NR, I]]
  Matrix t2;         // [[I, M_RR^-1 M_RN], [0, I]]

  Eigen::Index n_sat_dd() const { return n_hat.rows(); }
  Eigen::Index n_baselines() const { return n_hat.cols(); }
  Eigen::Index q() const { return r_hat.cols(); }
};

struct RieMFloat {
  StiefelPoint r_rm;
  Matrix n_rm;             // S x A
  double objective = 0.0;  // ||vec(r_rm - r_hat)||^2 weighted by weight_rr
  bool stalled = false;    // no start reached the gradient tolerance
};

/// Normal matrix J'WJ for the parameter stack [vec(R); vec(N)] with
/// J = [X_b' (x) A, I_A (x) B].
Matrix build_normal_matrix(const Matrix& design_geometry, const Matrix& design_ambiguity,
                           const Matrix& body_baselines, const Matrix& weight);

FloatSolutionUC solve_float_uc(const ObservationSet& obs);

/// Throws std::invalid_argument if body_baselines is not q x A of full row rank.
FloatSolutionAC solve_float_ac(const ObservationSet& obs, const Matrix& body_baselines);

/// X_hat(N) = X_hat - cov_xn cov_nn^-1 vec(N_hat - N).
Matrix conditional_x(const FloatSolutionUC& fs, const Matrix& n);

/// R_hat(N) = R_hat - cov_rn cov_nn^-1 vec(N_hat - N).
Matrix conditional_r(const FloatSolutionAC& fs, const Matrix& n);

/// N_hat(R) = N_hat - cov_nr cov_rr^-1 vec(R_hat - R).
Matrix conditional_n(const FloatSolutionAC& fs, const Matrix& r);

/// Minimizes ||vec(R - center)||^2_W over St(3, q) from the polar factor of
/// `center` and `extra_starts` random points; returns the best result.
MinimizeResult weighted_procrustes(const Matrix& center, const Matrix& weight,
                                   const OptimizerConfig& cfg, int extra_starts);

/// Number of random restarts used besides the polar start.
inline constexpr int kRandomStarts = 4;

RieMFloat solve_float_riemannian(const FloatSolutionAC& fs,
                                 const OptimizerConfig& cfg = {});

}  // namespace riemocad
