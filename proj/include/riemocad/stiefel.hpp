#pragma once

#include <functional>
#include <string_view>

#include "riemocad/linalg.hpp"
#include "riemocad/random.hpp"

namespace riemocad {

/// A 3 x q matrix with orthonormal columns, q in {1, 2, 3}.
class StiefelPoint {
 public:
  static constexpr double kTolerance = 1e-10;

  /// Throws std::invalid_argument unless ||x'x - I|| <= tol.
  explicit StiefelPoint(Matrix x, double tol = kTolerance);

  /// Polar projection of an arbitrary full-rank 3 x q matrix.
  static StiefelPoint nearest(const Matrix& m);
  static StiefelPoint random(Eigen::Index q, Rng& rng);

  const Matrix& matrix() const { return x_; }
  Eigen::Index q() const { return x_.cols(); }

 private:
  Matrix x_;
};

struct TangentVector {
  Matrix v;
  StiefelPoint base;

  /// ||base' v + v' base||_F, zero for exact tangent vectors.
  double skew_defect() const;
};

enum class Retraction { polar, qr };

struct OptimizerConfig {
  int max_iters = 500;
  double grad_tol = 1e-9;
  double armijo_slope = 1e-4;
  double backtrack_factor = 0.5;
  double initial_step = 1.0;
  Retraction retraction = Retraction::polar;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

enum class Termination { converged, max_iterations, line_search_stall };

std::string_view to_string(Termination t);

struct MinimizeResult {
  StiefelPoint point;
  double cost = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  Termination reason = Termination::converged;
};

using CostFunction = std::function<double(const Matrix&)>;
using GradientFunction = std::function<Matrix(const Matrix&)>;
/// Euclidean Hessian at x applied to a direction.
using HessianFunction = std::function<Matrix(const Matrix& x, const Matrix& dir)>;

/// U - X sym(X'U)
TangentVector project_tangent(const StiefelPoint& x, const Matrix& u);

TangentVector riemannian_gradient(const StiefelPoint& x, const Matrix& egrad);

/// Proj_X(D^2 f[xi] - xi sym(X' grad f)).
TangentVector riemannian_hessian(const StiefelPoint& x, const Matrix& egrad,
                                 const Matrix& ehess_along, const TangentVector& xi);

/// (X + V)(I + V'V)^{-1/2}; returns X unchanged for V = 0.
StiefelPoint retract_polar(const StiefelPoint& x, const TangentVector& v);

/// Q factor of X + V with a nonnegative triangular diagonal. Throws
/// NumericalError if X + V is rank deficient.
StiefelPoint retract_qr(const StiefelPoint& x, const TangentVector& v);

StiefelPoint retract(const StiefelPoint& x, const TangentVector& v, Retraction kind);

/// First-order Riemannian descent with Armijo backtracking. The first trial
/// step is cfg.initial_step; later trial steps use the Barzilai-Borwein
/// estimate from the previous accepted step. Accepted costs never increase.
MinimizeResult minimize(const CostFunction& cost, const GradientFunction& egrad,
                        const StiefelPoint& x0, const OptimizerConfig& cfg = {});

/// Newton variant: the step solves the Riemannian Newton equation in a
/// tangent basis and falls back to steepest descent when the Hessian is not
/// positive definite. Same Armijo acceptance and termination rules.
MinimizeResult minimize(const CostFunction& cost, const GradientFunction& egrad,
                        const HessianFunction& ehess, const StiefelPoint& x0,
                        const OptimizerConfig& cfg = {});

}  // namespace riemocad
