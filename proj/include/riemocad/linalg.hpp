#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace riemocad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

// All vec(.) operations in this codebase stack columns (column-major).
inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

inline IntVector vec(const IntMatrix& m) {
  return Eigen::Map<const IntVector>(m.data(), m.size());
}

inline IntMatrix unvec(const IntVector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const IntMatrix>(v.data(), rows, cols);
}

inline Matrix to_real(const IntMatrix& m) { return m.cast<double>(); }

inline IntMatrix round_to_int(const Matrix& m) {
  return m.array().round().cast<std::int64_t>().matrix();
}

inline Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Squared weighted norm v' W v.
inline double weighted_sq_norm(const Vector& v, const Matrix& w) {
  return v.dot(w * v);
}

/// Nearest matrix with orthonormal columns in the Frobenius sense (U V' from
/// the thin SVD).
inline Matrix polar_factor(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

/// ||m' m - I||_F
inline double orthonormality_error(const Matrix& m) {
  return (m.transpose() * m - Matrix::Identity(m.cols(), m.cols())).norm();
}

/// Symmetric positive-definite inverse via LLT; caller guarantees SPD.
inline Matrix spd_inverse(const Matrix& m) {
  return m.llt().solve(Matrix::Identity(m.rows(), m.cols()));
}

}  // namespace riemocad
