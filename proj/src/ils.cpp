#include "riemocad/ils.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace riemocad {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Q = L' diag(D) L with L unit lower triangular.
void ltdl(Matrix q, Matrix& l, Vector& d) {
  const Eigen::Index n = q.rows();
  l = Matrix::Zero(n, n);
  d = Vector::Zero(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    d(i) = q(i, i);
    const double root = std::sqrt(q(i, i));
    l.row(i).head(i + 1) = q.row(i).head(i + 1) / root;
    for (Eigen::Index j = 0; j < i; ++j)
      q.row(j).head(j + 1) -= l.row(i).head(j + 1) * l(i, j);
    l.row(i).head(i + 1) /= l(i, i);
  }
}

// Row-major lexicographic comparison of two vec-ordered integer matrices.
bool lex_less(const IntMatrix& a, const IntMatrix& b) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return a(i, j) < b(i, j);
  return false;
}

}  // namespace

IlsProblem IlsProblem::from_matrix(const Matrix& center, const Matrix& weight) {
  IlsProblem p = from_vector(vec(center), weight);
  p.rows = center.rows();
  p.cols = center.cols();
  return p;
}

IlsProblem IlsProblem::from_vector(const Vector& center, const Matrix& weight) {
  require(center.size() >= 1, "ILS problem needs at least one unknown");
  require(weight.rows() == center.size() && weight.cols() == center.size(),
          "ILS weight must be square and match the center");
  require(center.allFinite() && weight.allFinite(), "ILS inputs must be finite");
  Eigen::LLT<Matrix> llt(weight);
  require(llt.info() == Eigen::Success, "ILS weight must be positive definite");
  IlsProblem p;
  p.center = center;
  p.weight = sym(weight);
  p.rows = center.size();
  p.cols = 1;
  return p;
}

double IlsProblem::value(const IntVector& n) const {
  const Vector d = n.cast<double>() - center;
  return d.dot(weight * d);
}

Decorrelation decorrelate(const IlsProblem& problem) {
  const Eigen::Index n = problem.dim();
  Matrix l;
  Vector d;
  ltdl(spd_inverse(problem.weight), l, d);

  IntMatrix z = IntMatrix::Identity(n, n);
  IntMatrix izt = IntMatrix::Identity(n, n);
  Eigen::Index i1 = n - 2;
  bool swapped = true;
  while (swapped) {
    Eigen::Index i = n - 1;
    swapped = false;
    while (!swapped && i > 0) {
      --i;
      if (i <= i1) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
          const double mu_real = std::round(l(j, i));
          if (mu_real == 0.0) continue;
          const auto mu = static_cast<std::int64_t>(mu_real);
          l.col(i).tail(n - j) -= mu_real * l.col(j).tail(n - j);
          izt.col(j) += mu * izt.col(i);
          z.col(i) -= mu * z.col(j);
        }
      }
      const double li = l(i + 1, i);
      const double delta = d(i) + li * li * d(i + 1);
      // A zero coupling only reorders; skipping keeps diagonal problems at Z = I.
      if (li != 0.0 && delta < d(i + 1)) {
        const double lambda = d(i + 1) * li / delta;
        const double eta = d(i) / delta;
        d(i) = eta * d(i + 1);
        d(i + 1) = delta;
        if (i > 0) {
          Matrix block(2, 2);
          block << -li, 1.0, eta, lambda;
          const Matrix rows = block * l.block(i, 0, 2, i);
          l.block(i, 0, 2, i) = rows;
        }
        l(i + 1, i) = lambda;
        if (i + 2 < n) l.col(i).tail(n - i - 2).swap(l.col(i + 1).tail(n - i - 2));
        izt.col(i).swap(izt.col(i + 1));
        z.col(i).swap(z.col(i + 1));
        i1 = i;
        swapped = true;
      }
    }
  }

  Decorrelation out;
  const Matrix izt_real = izt.cast<double>();
  out.transformed.center = z.cast<double>().transpose() * problem.center;
  out.transformed.weight = sym(izt_real.transpose() * problem.weight * izt_real);
  out.transformed.rows = n;
  out.transformed.cols = 1;
  out.z = std::move(z);
  out.z_inv_t = std::move(izt);
  return out;
}

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value < b.value;
  return lex_less(a.n, b.n);
}

Enumerator::Enumerator(const IlsProblem& problem)
    : problem_(problem), decor_(decorrelate(problem)) {
  Eigen::LLT<Matrix> llt(decor_.transformed.weight);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("decorrelated ILS weight is not positive definite");
  chol_ = llt.matrixU();
}

std::int64_t Enumerator::run(double bound, const Visitor& visit) const {
  const Eigen::Index n = problem_.dim();
  const Vector& c = decor_.transformed.center;
  IntVector z = IntVector::Zero(n);
  Vector diff = Vector::Zero(n);  // z_j - c_j for levels already fixed
  std::int64_t leaves = 0;
  bool stop = false;

  auto descend = [&](auto&& self, Eigen::Index k, double partial) -> void {
    const double rkk = chol_(k, k);
    double s = 0.0;
    for (Eigen::Index j = k + 1; j < n; ++j) s += chol_(k, j) * diff(j);
    const double chat = c(k) - s / rkk;
    const double z0 = std::round(chat);
    const double dir = chat >= z0 ? 1.0 : -1.0;
    for (std::int64_t step = 0;; ++step) {
      const std::int64_t m = (step + 1) / 2;
      const double zk = step % 2 == 1 ? z0 + dir * m : z0 - dir * m;
      const double e = zk - chat;
      const double next = partial + rkk * rkk * e * e;
      if (!(next < bound)) return;
      z(k) = static_cast<std::int64_t>(zk);
      diff(k) = zk - c(k);
      if (k == 0) {
        ++leaves;
        const IntVector orig = decor_.z_inv_t * z;
        if (!visit(orig, next, bound)) {
          stop = true;
          return;
        }
      } else {
        self(self, k - 1, next);
        if (stop) return;
      }
    }
  };
  descend(descend, n - 1, 0.0);
  return leaves;
}

CandidateSet enumerate(const IlsProblem& problem, double chi, std::int64_t cap) {
  require(chi > 0.0, "chi must be positive");
  require(cap >= 1, "cap must be at least 1");
  auto worse = [](const Candidate& a, const Candidate& b) { return candidate_less(a, b); };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse);
  CandidateSet out;
  out.radius_chi = chi;

  Enumerator en(problem);
  en.run(chi, [&](const IntVector& n, double, double& bound) {
    Candidate cand{problem.to_matrix(n), problem.value(n)};
    if (!(cand.value < chi)) return true;
    if (static_cast<std::int64_t>(heap.size()) < cap) {
      heap.push(std::move(cand));
      return true;
    }
    out.truncated = true;
    if (candidate_less(cand, heap.top())) {
      heap.pop();
      heap.push(std::move(cand));
    }
    const double top = heap.top().value;
    bound = std::min(bound, top + 1e-9 * std::abs(top) + 1e-12);
    return true;
  });

  out.candidates.reserve(heap.size());
  while (!heap.empty()) {
    out.candidates.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.candidates.begin(), out.candidates.end());
  return out;
}

ClosestResult closest(const IlsProblem& problem) {
  Enumerator en(problem);
  Candidate best{IntMatrix(), std::numeric_limits<double>::infinity()};
  const std::int64_t leaves =
      en.run(std::numeric_limits<double>::infinity(), [&](const IntVector& n, double v, double& bound) {
        Candidate cand{problem.to_matrix(n), problem.value(n)};
        if (best.n.size() == 0 || candidate_less(cand, best)) best = std::move(cand);
        bound = std::min(bound, v + 1e-12 * std::abs(v));
        return true;
      });
  return {std::move(best.n), best.value, leaves};
}

}  // namespace riemocad
