#pragma once

#include "riemocad/float_solvers.hpp"

namespace riemocad {

struct CostContext {
  FloatSolutionAC fs;
  RieMFloat rm;
  OptimizerConfig opt_cfg;
};

/// Solves the manifold float problem and bundles it with `fs`.
CostContext make_cost_context(FloatSolutionAC fs, const OptimizerConfig& cfg = {});

/// Objective split at an arbitrary reference point (r_bar, n_bar).
struct FiveTerms {
  double residual = 0.0;  // objective at (r_bar, n_bar)
  double n_term = 0.0;
  double r_term = 0.0;
  double n_cross = 0.0;
  double r_cross = 0.0;

  double sum() const { return residual + n_term + r_term + n_cross + r_cross; }
};

/// residual(r_bar, n_bar) + ||N - N_bar||^2_{cov_nn^-1} + ||R - R_bar(N)||^2_{M_RR}
///   + 2 (N - N_bar)' cov_nn^-1 (N_bar - N_hat) + 2 (R - R_bar(N))' M_RR (R_bar - R_hat(N_bar)),
/// with R_bar(N) = R_bar - gain_rn vec(N_bar - N).
FiveTerms decompose_at_point(const FloatSolutionAC& fs, const ObservationSet& obs,
                             const Matrix& r_bar, const Matrix& n_bar, const Matrix& r,
                             const Matrix& n);

/// Same split with r_term = ||R - R_hat(N)||^2_{M_RR} and
/// r_cross = -||R_bar - R_hat(N_bar)||^2_{M_RR}.
FiveTerms decompose_at_point_alt(const FloatSolutionAC& fs, const ObservationSet& obs,
                                 const Matrix& r_bar, const Matrix& n_bar, const Matrix& r,
                                 const Matrix& n);

struct ThreeTerms {
  double residual = 0.0;
  double first = 0.0;
  double second = 0.0;

  double sum() const { return residual + first + second; }
};

/// residual_sq + ||R - R_hat||^2_{cov_rr^-1} + ||N - N_hat(R)||^2_{M_NN}.
ThreeTerms decompose_orthogonal(const FloatSolutionAC& fs, const Matrix& r, const Matrix& n);

/// residual_sq + ||N - N_hat||^2_{cov_nn^-1} + ||X - X_hat(N)||^2_{M_XX}.
ThreeTerms decompose_orthogonal(const FloatSolutionUC& fs, const Matrix& x, const Matrix& n);

struct CostValue {
  double value = 0.0;      // quadratic + inner
  double quadratic = 0.0;  // ||N - N_rm||^2 + cross term
  double inner = 0.0;      // min over St(3, q) of ||R - R_hat(N)||^2_{M_RR}
  Matrix r;                // inner minimizer
  bool stalled = false;
};

/// ||N - N_rm||^2_{cov_nn^-1} + 2 (N - N_rm)' cov_nn^-1 (N_rm - N_hat).
double cost_quadratic(const CostContext& ctx, const Matrix& n);

/// min over St(3, q) of ||R - center||^2_{M_RR}, started from the polar factor
/// of `center` plus `extra_starts` random points.
MinimizeResult inner_minimum(const CostContext& ctx, const Matrix& center,
                             int extra_starts = 0);

/// C(N) = cost_quadratic + inner minimum at conditional_r(fs, N), warm started
/// from the polar factor only.
CostValue cost_c(const CostContext& ctx, const Matrix& n);
CostValue cost_c(const CostContext& ctx, const IntMatrix& n);

/// Squared Frobenius distance from m to St(3, q): sum (sigma_i - 1)^2.
double stiefel_distance_sq(const Matrix& m);

/// sum_i (||m_i|| - 1)^2 over the columns of m.
double column_norm_penalty(const Matrix& m);

/// cost_quadratic + xi_min * column_norm_penalty(conditional_r(fs, N)).
double bound_lower(const CostContext& ctx, const Matrix& n);

/// cost_quadratic + xi_max * stiefel_distance_sq(conditional_r(fs, N)).
/// Equals the column-norm form for q = 1.
double bound_upper(const CostContext& ctx, const Matrix& n);

/// cost_quadratic + xi_max * column_norm_penalty. Not an upper bound of C for
/// q >= 2; kept for comparison.
double bound_upper_column_norm(const CostContext& ctx, const Matrix& n);

/// ||N - N_hat||^2_{cov_nn^-1} + min over St(3, q) of ||R - R_hat(N)||^2_{M_RR}.
CostValue mc_lambda_cost(const CostContext& ctx, const Matrix& n);

/// C(N) - mc_lambda_cost(N), constant in N: -||N_rm - N_hat||^2_{cov_nn^-1}.
double cost_offset(const CostContext& ctx);

}  // namespace riemocad
