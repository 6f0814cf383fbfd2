#include "riemocad/float_solvers.hpp"

#include <limits>
#include <stdexcept>
#include <string>

#include "riemocad/errors.hpp"

namespace riemocad {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr std::uint64_t kStartSeed = 0x52694d5374617274ULL;

double scaled_condition(const Matrix& m) {
  const Vector d = m.diagonal();
  if ((d.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
  const Vector s = d.cwiseSqrt().cwiseInverse();
  const Matrix scaled = s.asDiagonal() * m * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(scaled, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return es.eigenvalues().maxCoeff() / lo;
}

// Throws DegenerateGeometry naming the block that makes M ill-conditioned.
void check_normal_matrix(const Matrix& m, Eigen::Index n_first, const std::string& first,
                         const std::string& second) {
  const double cond = scaled_condition(m);
  if (cond <= kMaxCondition) return;
  const Eigen::Index n_second = m.rows() - n_first;
  const double c1 = scaled_condition(m.topLeftCorner(n_first, n_first));
  const double c2 = scaled_condition(m.bottomRightCorner(n_second, n_second));
  std::string block;
  if (c1 > kMaxCondition)
    block = first;
  else if (c2 > kMaxCondition)
    block = second;
  else
    block = first + "/" + second + " coupling";
  throw DegenerateGeometry("normal matrix " + block + " block is singular or has condition " +
                           std::to_string(cond));
}

struct NormalSolution {
  Vector theta;
  Matrix normal;
  Matrix cov;
};

NormalSolution solve_normal(const Matrix& jac, const Matrix& weight, const Vector& y,
                            Eigen::Index n_first, const std::string& first,
                            const std::string& second) {
  const Matrix wj = weight * jac;
  Matrix normal = jac.transpose() * wj;
  normal = sym(normal);
  check_normal_matrix(normal, n_first, first, second);
  const Vector rhs = wj.transpose() * y;
  const Matrix eye = Matrix::Identity(normal.rows(), normal.cols());
  Eigen::LLT<Matrix> llt(normal);
  if (llt.info() == Eigen::Success) {
    return {llt.solve(rhs), normal, sym(llt.solve(eye))};
  }
  Eigen::LDLT<Matrix> ldlt(normal);
  if (ldlt.info() != Eigen::Success)
    throw DegenerateGeometry("normal matrix factorization failed");
  return {ldlt.solve(rhs), normal, sym(ldlt.solve(eye))};
}

Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

}  // namespace

Matrix build_normal_matrix(const Matrix& design_geometry, const Matrix& design_ambiguity,
                           const Matrix& body_baselines, const Matrix& weight) {
  const Eigen::Index a = body_baselines.cols();
  Matrix jac(design_geometry.rows() * a, 3 * body_baselines.rows() + design_ambiguity.cols() * a);
  jac << kron(body_baselines.transpose(), design_geometry), kron(identity(a), design_ambiguity);
  return sym(jac.transpose() * weight * jac);
}

FloatSolutionUC solve_float_uc(const ObservationSet& obs) {
  const Eigen::Index s = obs.n_sat_dd();
  const Eigen::Index a = obs.n_baselines();
  const Eigen::Index nx = 3 * a;
  const Eigen::Index nn = s * a;
  Matrix jac(2 * s * a, nx + nn);
  jac << kron(identity(a), obs.design_geometry()), kron(identity(a), obs.design_ambiguity());
  auto sol = solve_normal(jac, obs.weight(), vec(obs.y()), nx, "geometry", "ambiguity");

  FloatSolutionUC fs;
  fs.x_hat = unvec(Vector(sol.theta.head(nx)), 3, a);
  fs.n_hat = unvec(Vector(sol.theta.tail(nn)), s, a);
  fs.cov_xx = sol.cov.topLeftCorner(nx, nx);
  fs.cov_xn = sol.cov.topRightCorner(nx, nn);
  fs.cov_nx = sol.cov.bottomLeftCorner(nn, nx);
  fs.cov_nn = sol.cov.bottomRightCorner(nn, nn);
  fs.normal = std::move(sol.normal);

  const Matrix m_xx = fs.normal.topLeftCorner(nx, nx);
  const Matrix m_xn = fs.normal.topRightCorner(nx, nn);
  const Matrix m_nn = fs.normal.bottomRightCorner(nn, nn);
  const Eigen::LLT<Matrix> llt_xx(m_xx);
  fs.m_xx = m_xx;
  fs.weight_nn = sym(m_nn - m_xn.transpose() * llt_xx.solve(m_xn));
  fs.gain_xn = -llt_xx.solve(m_xn);
  fs.residual_sq = weighted_sq_norm(
      vec(Matrix(obs.y() - obs.design_geometry() * fs.x_hat - obs.design_ambiguity() * fs.n_hat)),
      obs.weight());
  return fs;
}

FloatSolutionAC solve_float_ac(const ObservationSet& obs, const Matrix& body_baselines) {
  const Eigen::Index s = obs.n_sat_dd();
  const Eigen::Index a = obs.n_baselines();
  if (body_baselines.cols() != a || body_baselines.rows() < 1 || body_baselines.rows() > 3)
    throw std::invalid_argument("body_baselines must be q x A with q in {1,2,3}");
  const Eigen::Index q = body_baselines.rows();
  if (q > a) throw std::invalid_argument("body_baselines must have full row rank");
  Eigen::JacobiSVD<Matrix> svd(body_baselines);
  const Vector sv = svd.singularValues();
  if (!(sv(q - 1) > 1e-10 * sv(0)))
    throw std::invalid_argument("body_baselines must have full row rank");

  const Eigen::Index nr = 3 * q;
  const Eigen::Index nn = s * a;
  Matrix jac(2 * s * a, nr + nn);
  jac << kron(body_baselines.transpose(), obs.design_geometry()),
      kron(identity(a), obs.design_ambiguity());
  auto sol = solve_normal(jac, obs.weight(), vec(obs.y()), nr, "attitude", "ambiguity");

  FloatSolutionAC fs;
  fs.r_hat = unvec(Vector(sol.theta.head(nr)), 3, q);
  fs.n_hat = unvec(Vector(sol.theta.tail(nn)), s, a);
  fs.cov_rr = sol.cov.topLeftCorner(nr, nr);
  fs.cov_rn = sol.cov.topRightCorner(nr, nn);
  fs.cov_nr = sol.cov.bottomLeftCorner(nn, nr);
  fs.cov_nn = sol.cov.bottomRightCorner(nn, nn);
  fs.normal = std::move(sol.normal);

  const Matrix m_rr = fs.normal.topLeftCorner(nr, nr);
  const Matrix m_rn = fs.normal.topRightCorner(nr, nn);
  const Matrix m_nr = fs.normal.bottomLeftCorner(nn, nr);
  const Matrix m_nn = fs.normal.bottomRightCorner(nn, nn);
  const Eigen::LLT<Matrix> llt_rr(m_rr);
  const Eigen::LLT<Matrix> llt_nn(m_nn);

  // Block-triangular transforms that decouple M.
  fs.t1 = identity(nr + nn);
  fs.t1.bottomLeftCorner(nn, nr) = llt_nn.solve(m_nr);
  fs.t2 = identity(nr + nn);
  fs.t2.topRightCorner(nr, nn) = llt_rr.solve(m_rn);
  Matrix t1_inv = identity(nr + nn);
  t1_inv.bottomLeftCorner(nn, nr) = -fs.t1.bottomLeftCorner(nn, nr);
  Matrix t2_inv = identity(nr + nn);
  t2_inv.topRightCorner(nr, nn) = -fs.t2.topRightCorner(nr, nn);
  const Matrix d1 = t1_inv.transpose() * fs.normal * t1_inv;  // blkdiag(cov_rr^-1, M_NN)
  const Matrix d2 = t2_inv.transpose() * fs.normal * t2_inv;  // blkdiag(M_RR, cov_nn^-1)

  fs.weight_rr = sym(d1.topLeftCorner(nr, nr));
  fs.m_nn = sym(d1.bottomRightCorner(nn, nn));
  fs.m_rr = sym(d2.topLeftCorner(nr, nr));
  fs.weight_nn = sym(d2.bottomRightCorner(nn, nn));
  fs.cond_cov_rr_given_n = spd_inverse(fs.m_rr);
  fs.cond_cov_nn_given_r = spd_inverse(fs.m_nn);
  fs.gain_rn = -fs.t2.topRightCorner(nr, nn);
  fs.gain_nr = -fs.t1.bottomLeftCorner(nn, nr);

  Eigen::SelfAdjointEigenSolver<Matrix> es(fs.m_rr, Eigen::EigenvaluesOnly);
  fs.xi_min = es.eigenvalues().minCoeff();
  fs.xi_max = es.eigenvalues().maxCoeff();
  const Matrix e = obs.y() - obs.design_geometry() * fs.r_hat * body_baselines -
                   obs.design_ambiguity() * fs.n_hat;
  fs.residual_sq = weighted_sq_norm(vec(e), obs.weight());
  return fs;
}

Matrix conditional_x(const FloatSolutionUC& fs, const Matrix& n) {
  const Vector dx = fs.gain_xn * vec(Matrix(fs.n_hat - n));
  return fs.x_hat - unvec(dx, fs.x_hat.rows(), fs.x_hat.cols());
}

Matrix conditional_r(const FloatSolutionAC& fs, const Matrix& n) {
  const Vector dr = fs.gain_rn * vec(Matrix(fs.n_hat - n));
  return fs.r_hat - unvec(dr, fs.r_hat.rows(), fs.r_hat.cols());
}

Matrix conditional_n(const FloatSolutionAC& fs, const Matrix& r) {
  const Vector dn = fs.gain_nr * vec(Matrix(fs.r_hat - r));
  return fs.n_hat - unvec(dn, fs.n_hat.rows(), fs.n_hat.cols());
}

MinimizeResult weighted_procrustes(const Matrix& center, const Matrix& weight,
                                   const OptimizerConfig& cfg, int extra_starts) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(weight, Eigen::EigenvaluesOnly);
  const double scale = es.eigenvalues().maxCoeff();
  const Matrix w = weight / scale;
  const auto rows = center.rows();
  const auto cols = center.cols();
  auto cost = [&](const Matrix& r) { return weighted_sq_norm(vec(Matrix(r - center)), w); };
  auto egrad = [&](const Matrix& r) {
    return Matrix(2.0 * unvec(Vector(w * vec(Matrix(r - center))), rows, cols));
  };
  auto ehess = [&](const Matrix&, const Matrix& dir) {
    return Matrix(2.0 * unvec(Vector(w * vec(dir)), rows, cols));
  };

  MinimizeResult best = minimize(cost, egrad, ehess, StiefelPoint::nearest(center), cfg);
  for (int k = 0; k < extra_starts; ++k) {
    Rng rng = make_rng({kStartSeed, static_cast<std::uint64_t>(k)});
    MinimizeResult r = minimize(cost, egrad, ehess, StiefelPoint::random(cols, rng), cfg);
    if (r.cost < best.cost) best = std::move(r);
  }
  best.cost *= scale;
  best.grad_norm *= scale;
  return best;
}

RieMFloat solve_float_riemannian(const FloatSolutionAC& fs, const OptimizerConfig& cfg) {
  MinimizeResult res = weighted_procrustes(fs.r_hat, fs.weight_rr, cfg, kRandomStarts);
  Matrix n_rm = conditional_n(fs, res.point.matrix());
  return {res.point, std::move(n_rm), res.cost, res.reason != Termination::converged};
}

}  // namespace riemocad
