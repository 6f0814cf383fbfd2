#include "riemocad/cost_decomposition.hpp"

namespace riemocad {

namespace {

Matrix recentered_r(const FloatSolutionAC& fs, const Matrix& r_bar, const Matrix& n_bar,
                    const Matrix& n) {
  const Vector dr = fs.gain_rn * vec(Matrix(n_bar - n));
  return r_bar - unvec(dr, r_bar.rows(), r_bar.cols());
}

double cross(const Matrix& a, const Matrix& w, const Matrix& b) {
  return 2.0 * vec(a).dot(w * vec(b));
}

}  // namespace

CostContext make_cost_context(FloatSolutionAC fs, const OptimizerConfig& cfg) {
  RieMFloat rm = solve_float_riemannian(fs, cfg);
  return {std::move(fs), std::move(rm), cfg};
}

FiveTerms decompose_at_point(const FloatSolutionAC& fs, const ObservationSet& obs,
                             const Matrix& r_bar, const Matrix& n_bar, const Matrix& r,
                             const Matrix& n) {
  const Matrix r_bar_n = recentered_r(fs, r_bar, n_bar, n);
  const Matrix r_hat_nbar = conditional_r(fs, n_bar);
  FiveTerms t;
  t.residual = objective_value(obs, r_bar, n_bar);
  t.n_term = weighted_sq_norm(vec(Matrix(n - n_bar)), fs.weight_nn);
  t.r_term = weighted_sq_norm(vec(Matrix(r - r_bar_n)), fs.m_rr);
  t.n_cross = cross(n - n_bar, fs.weight_nn, n_bar - fs.n_hat);
  t.r_cross = cross(r - r_bar_n, fs.m_rr, r_bar - r_hat_nbar);
  return t;
}

FiveTerms decompose_at_point_alt(const FloatSolutionAC& fs, const ObservationSet& obs,
                                 const Matrix& r_bar, const Matrix& n_bar, const Matrix& r,
                                 const Matrix& n) {
  FiveTerms t;
  t.residual = objective_value(obs, r_bar, n_bar);
  t.n_term = weighted_sq_norm(vec(Matrix(n - n_bar)), fs.weight_nn);
  t.r_term = weighted_sq_norm(vec(Matrix(r - conditional_r(fs, n))), fs.m_rr);
  t.n_cross = cross(n - n_bar, fs.weight_nn, n_bar - fs.n_hat);
  t.r_cross = -weighted_sq_norm(vec(Matrix(r_bar - conditional_r(fs, n_bar))), fs.m_rr);
  return t;
}

ThreeTerms decompose_orthogonal(const FloatSolutionAC& fs, const Matrix& r, const Matrix& n) {
  ThreeTerms t;
  t.residual = fs.residual_sq;
  t.first = weighted_sq_norm(vec(Matrix(r - fs.r_hat)), fs.weight_rr);
  t.second = weighted_sq_norm(vec(Matrix(n - conditional_n(fs, r))), fs.m_nn);
  return t;
}

ThreeTerms decompose_orthogonal(const FloatSolutionUC& fs, const Matrix& x, const Matrix& n) {
  ThreeTerms t;
  t.residual = fs.residual_sq;
  t.first = weighted_sq_norm(vec(Matrix(n - fs.n_hat)), fs.weight_nn);
  t.second = weighted_sq_norm(vec(Matrix(x - conditional_x(fs, n))), fs.m_xx);
  return t;
}

double cost_quadratic(const CostContext& ctx, const Matrix& n) {
  const Matrix d = n - ctx.rm.n_rm;
  return weighted_sq_norm(vec(d), ctx.fs.weight_nn) +
         cross(d, ctx.fs.weight_nn, ctx.rm.n_rm - ctx.fs.n_hat);
}

MinimizeResult inner_minimum(const CostContext& ctx, const Matrix& center, int extra_starts) {
  return weighted_procrustes(center, ctx.fs.m_rr, ctx.opt_cfg, extra_starts);
}

CostValue cost_c(const CostContext& ctx, const Matrix& n) {
  CostValue c;
  c.quadratic = cost_quadratic(ctx, n);
  MinimizeResult inner = inner_minimum(ctx, conditional_r(ctx.fs, n));
  c.inner = inner.cost;
  c.value = c.quadratic + c.inner;
  c.stalled = inner.reason != Termination::converged;
  c.r = inner.point.matrix();
  return c;
}

CostValue cost_c(const CostContext& ctx, const IntMatrix& n) { return cost_c(ctx, to_real(n)); }

double stiefel_distance_sq(const Matrix& m) {
  if (m.cols() == 1) {
    const double d = m.norm() - 1.0;
    return d * d;
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return (svd.singularValues().array() - 1.0).square().sum();
}

double column_norm_penalty(const Matrix& m) {
  return (m.colwise().norm().array() - 1.0).square().sum();
}

double bound_lower(const CostContext& ctx, const Matrix& n) {
  return cost_quadratic(ctx, n) + ctx.fs.xi_min * column_norm_penalty(conditional_r(ctx.fs, n));
}

double bound_upper(const CostContext& ctx, const Matrix& n) {
  return cost_quadratic(ctx, n) + ctx.fs.xi_max * stiefel_distance_sq(conditional_r(ctx.fs, n));
}

double bound_upper_column_norm(const CostContext& ctx, const Matrix& n) {
  return cost_quadratic(ctx, n) + ctx.fs.xi_max * column_norm_penalty(conditional_r(ctx.fs, n));
}

CostValue mc_lambda_cost(const CostContext& ctx, const Matrix& n) {
  CostValue c;
  c.quadratic = weighted_sq_norm(vec(Matrix(n - ctx.fs.n_hat)), ctx.fs.weight_nn);
  MinimizeResult inner = inner_minimum(ctx, conditional_r(ctx.fs, n));
  c.inner = inner.cost;
  c.value = c.quadratic + c.inner;
  c.stalled = inner.reason != Termination::converged;
  c.r = inner.point.matrix();
  return c;
}

double cost_offset(const CostContext& ctx) {
  return -weighted_sq_norm(vec(Matrix(ctx.rm.n_rm - ctx.fs.n_hat)), ctx.fs.weight_nn);
}

}  // namespace riemocad
