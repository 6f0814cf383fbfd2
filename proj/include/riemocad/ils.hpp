#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "riemocad/linalg.hpp"

namespace riemocad {

/// Integer least-squares problem min over integer n of (n - c)' W (n - c),
/// where n is vec(N) for an S x A ambiguity matrix.
struct IlsProblem {
  Vector center;
  Matrix weight;
  Eigen::Index rows = 0;
  Eigen::Index cols = 1;

  /// Validates shapes and positive definiteness (throws std::invalid_argument).
  static IlsProblem from_matrix(const Matrix& center, const Matrix& weight);
  static IlsProblem from_vector(const Vector& center, const Matrix& weight);

  Eigen::Index dim() const { return center.size(); }
  double value(const IntVector& n) const;
  IntMatrix to_matrix(const IntVector& n) const { return unvec(n, rows, cols); }
};

/// Unimodular reparametrization n' = Z' n that reduces correlation.
/// `transformed` has center Z' c and weight Z^-1 W Z^-T, so values are
/// preserved; `z_inv_t` maps back: n = z_inv_t * n'.
struct Decorrelation {
  IntMatrix z;
  IntMatrix z_inv_t;
  IlsProblem transformed;
};

Decorrelation decorrelate(const IlsProblem& problem);

struct Candidate {
  IntMatrix n;
  double value = 0.0;
};

/// Strict weak ordering by value, ties broken lexicographically on the
/// row-major entries of the integer matrix.
bool candidate_less(const Candidate& a, const Candidate& b);

struct CandidateSet {
  std::vector<Candidate> candidates;  // ascending
  double radius_chi = 0.0;
  bool truncated = false;
};

/// Depth-first Schnorr-Euchner enumeration over a decorrelated problem.
class Enumerator {
 public:
  /// Called for each lattice point whose value is below the current bound,
  /// with n in original coordinates. The visitor may lower `bound`; returning
  /// false stops the search.
  using Visitor = std::function<bool(const IntVector& n, double value, double& bound)>;

  explicit Enumerator(const IlsProblem& problem);

  const IlsProblem& problem() const { return problem_; }
  const Decorrelation& decorrelation() const { return decor_; }

  /// Visits points with value < bound; returns the number of leaves visited.
  std::int64_t run(double bound, const Visitor& visit) const;

 private:
  IlsProblem problem_;
  Decorrelation decor_;
  Matrix chol_;  // upper triangular, transformed weight = chol' chol
};

/// All integer points with value < chi in ascending order. If more than `cap`
/// exist, keeps the `cap` smallest and sets truncated.
CandidateSet enumerate(const IlsProblem& problem, double chi, std::int64_t cap);

struct ClosestResult {
  IntMatrix n;
  double value = 0.0;
  std::int64_t leaves = 0;
};

/// Integer minimizer of the problem by search and shrink.
ClosestResult closest(const IlsProblem& problem);

}  // namespace riemocad
