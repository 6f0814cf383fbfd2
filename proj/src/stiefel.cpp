#include "riemocad/stiefel.hpp"

#include <cmath>
#include <stdexcept>

#include "riemocad/errors.hpp"

namespace riemocad {

namespace {


}  // namespace

StiefelPoint::StiefelPoint(Matrix x, double tol) : x_(std::move(x)) {
  if (x_.rows() != 3 || x_.cols() < 1 || x_.cols() > 3)
    throw std::invalid_argument("Stiefel point must be 3 x q with q in {1,2,3}");
  if (!(orthonormality_error(x_) <= tol))
    throw std::invalid_argument("matrix columns are not orthonormal");
}

StiefelPoint StiefelPoint::nearest(const Matrix& m) {
  return StiefelPoint(polar_factor(m));
}

StiefelPoint StiefelPoint::random(Eigen::Index q, Rng& rng) {
  std::normal_distribution<double> gauss;
  Matrix g(3, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < 3; ++i) g(i, j) = gauss(rng);
  return nearest(g);
}

double TangentVector::skew_defect() const {
  const Matrix& x = base.matrix();
  return (x.transpose() * v + v.transpose() * x).norm();
}

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(grad_tol >= 0.0)) throw std::invalid_argument("grad_tol must be >= 0");
  if (!(armijo_slope > 0.0 && armijo_slope < 1.0))
    throw std::invalid_argument("armijo_slope must be in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw std::invalid_argument("backtrack_factor must be in (0, 1)");
  if (!(initial_step > 0.0)) throw std::invalid_argument("initial_step must be > 0");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iterations: return "max-iterations";
    case Termination::line_search_stall: return "line-search stall";
  }
  return "unknown";
}

TangentVector project_tangent(const StiefelPoint& x, const Matrix& u) {
  const Matrix& m = x.matrix();
  return {u - m * sym(m.transpose() * u), x};
}

TangentVector riemannian_gradient(const StiefelPoint& x, const Matrix& egrad) {
  return project_tangent(x, egrad);
}

TangentVector riemannian_hessian(const StiefelPoint& x, const Matrix& egrad,
                                 const Matrix& ehess_along, const TangentVector& xi) {
  const Matrix& m = x.matrix();
  return project_tangent(x, ehess_along - xi.v * sym(m.transpose() * egrad));
}

StiefelPoint retract_polar(const StiefelPoint& x, const TangentVector& v) {
  if (v.v.isZero(0.0)) return x;
  // Y (Y'Y)^{-1/2} computed as U V' from the SVD of Y, which stays
  // orthonormal for long steps where Y'Y is badly conditioned.
  return StiefelPoint(polar_factor(x.matrix() + v.v));
}

StiefelPoint retract_qr(const StiefelPoint& x, const TangentVector& v) {
  if (v.v.isZero(0.0)) return x;
  const Matrix y = x.matrix() + v.v;
  const auto q = y.cols();
  Eigen::HouseholderQR<Matrix> qr(y);
  Matrix qf = qr.householderQ() * Matrix::Identity(3, q);
  const Matrix rf = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, y.norm());
  for (Eigen::Index j = 0; j < q; ++j) {
    if (std::abs(rf(j, j)) <= 1e-12 * scale)
      throw NumericalError("retraction step produced rank-deficient point");
    if (rf(j, j) < 0.0) qf.col(j) *= -1.0;
  }
  return StiefelPoint(std::move(qf));
}

StiefelPoint retract(const StiefelPoint& x, const TangentVector& v, Retraction kind) {
  return kind == Retraction::polar ? retract_polar(x, v) : retract_qr(x, v);
}

MinimizeResult minimize(const CostFunction& cost, const GradientFunction& egrad,
                        const StiefelPoint& x0, const OptimizerConfig& cfg) {
  cfg.validate();
  constexpr int kMaxBacktracks = 60;

  MinimizeResult res{x0, cost(x0.matrix()), 0.0, 0, Termination::max_iterations};
  Matrix grad = riemannian_gradient(res.point, egrad(res.point.matrix())).v;
  res.grad_norm = grad.norm();
  double trial_step = cfg.initial_step;

  for (int it = 0; it < cfg.max_iters; ++it) {
    if (res.grad_norm <= cfg.grad_tol) {
      res.reason = Termination::converged;
      return res;
    }
    const double slope = res.grad_norm * res.grad_norm;
    double alpha = trial_step;
    int backtracks = 0;
    for (;;) {
      TangentVector step{-alpha * grad, res.point};
      StiefelPoint candidate = res.point;
      bool ok = true;
      try {
        candidate = retract(res.point, step, cfg.retraction);
      } catch (const NumericalError&) {
        ok = false;
      }
      if (ok) {
        const double fc = cost(candidate.matrix());
        if (fc <= res.cost - cfg.armijo_slope * alpha * slope) {
          Matrix new_grad = riemannian_gradient(candidate, egrad(candidate.matrix())).v;
          const Matrix s = candidate.matrix() - res.point.matrix();
          const Matrix y = new_grad - grad;
          const double sy = (s.array() * y.array()).sum();
          const double ss = s.squaredNorm();
          trial_step = (sy > 0.0 && ss > 0.0) ? std::clamp(ss / sy, 1e-12, 1e12)
                                              : cfg.initial_step;
          res.point = std::move(candidate);
          res.cost = fc;
          grad = std::move(new_grad);
          res.grad_norm = grad.norm();
          res.iterations = it + 1;
          break;
        }
      }
      alpha *= cfg.backtrack_factor;
      if (++backtracks > kMaxBacktracks) {
        res.reason = Termination::line_search_stall;
        return res;
      }
    }
  }
  res.reason = res.grad_norm <= cfg.grad_tol ? Termination::converged
                                              : Termination::max_iterations;
  return res;
}

namespace {

// Frobenius-orthonormal basis of the tangent space at x.
std::vector<Matrix> tangent_basis(const StiefelPoint& x) {
  const Eigen::Index q = x.q();
  std::vector<Matrix> basis;
  for (Eigen::Index k = 0; k < 3 * q; ++k) {
    Matrix e = Matrix::Zero(3, q);
    e.data()[k] = 1.0;
    Matrix v = project_tangent(x, e).v;
    for (const Matrix& b : basis) v -= (v.array() * b.array()).sum() * b;
    const double norm = v.norm();
    if (norm > 1e-8) basis.push_back(v / norm);
  }
  return basis;
}

}  // namespace

MinimizeResult minimize(const CostFunction& cost, const GradientFunction& egrad,
                        const HessianFunction& ehess, const StiefelPoint& x0,
                        const OptimizerConfig& cfg) {
  cfg.validate();
  constexpr int kMaxBacktracks = 60;

  MinimizeResult res{x0, cost(x0.matrix()), 0.0, 0, Termination::max_iterations};
  Matrix eg = egrad(res.point.matrix());
  Matrix grad = riemannian_gradient(res.point, eg).v;
  res.grad_norm = grad.norm();

  for (int it = 0; it < cfg.max_iters; ++it) {
    if (res.grad_norm <= cfg.grad_tol) {
      res.reason = Termination::converged;
      return res;
    }
    const std::vector<Matrix> basis = tangent_basis(res.point);
    const auto d = static_cast<Eigen::Index>(basis.size());
    Matrix h(d, d);
    Vector g(d);
    std::vector<Matrix> hb;
    for (Eigen::Index j = 0; j < d; ++j) {
      const TangentVector xi{basis[j], res.point};
      hb.push_back(riemannian_hessian(res.point, eg, ehess(res.point.matrix(), basis[j]), xi).v);
      g(j) = (basis[j].array() * grad.array()).sum();
    }
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) h(i, j) = (basis[i].array() * hb[j].array()).sum();
    h = sym(h);

    Matrix dir = -grad;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff())) {
      const Vector eta = es.eigenvectors() *
                         (es.eigenvalues().cwiseInverse().asDiagonal() *
                          (es.eigenvectors().transpose() * (-g)));
      Matrix newton = Matrix::Zero(3, res.point.q());
      for (Eigen::Index j = 0; j < d; ++j) newton += eta(j) * basis[j];
      dir = newton;
    }
    const double slope = -(dir.array() * grad.array()).sum();
    // Predicted decrease below rounding of the cost: stationary to machine precision.
    if (slope <= 1e-15 * std::max(1.0, std::abs(res.cost))) {
      res.reason = Termination::converged;
      return res;
    }

    double alpha = 1.0;
    int backtracks = 0;
    for (;;) {
      StiefelPoint candidate = res.point;
      bool ok = true;
      try {
        candidate = retract(res.point, {alpha * dir, res.point}, cfg.retraction);
      } catch (const NumericalError&) {
        ok = false;
      }
      if (ok) {
        const double fc = cost(candidate.matrix());
        if (fc <= res.cost - cfg.armijo_slope * alpha * slope) {
          res.point = std::move(candidate);
          res.cost = fc;
          eg = egrad(res.point.matrix());
          grad = riemannian_gradient(res.point, eg).v;
          res.grad_norm = grad.norm();
          res.iterations = it + 1;
          break;
        }
      }
      alpha *= cfg.backtrack_factor;
      if (++backtracks > kMaxBacktracks) {
        res.reason = res.grad_norm <= cfg.grad_tol ? Termination::converged
                                                    : Termination::line_search_stall;
        return res;
      }
    }
  }
  res.reason = res.grad_norm <= cfg.grad_tol ? Termination::converged
                                              : Termination::max_iterations;
  return res;
}

}  // namespace riemocad
