#include <gtest/gtest.h>

#include <algorithm>

#include "riemocad/ils.hpp"
#include "test_util.hpp"

using namespace riemocad;
using riemocad::testing::gaussian;

namespace {

IlsProblem random_problem(Rng& rng, Eigen::Index dim, double spread = 3.0) {
  const Matrix a = gaussian(dim, dim, rng);
  const Matrix w = a * a.transpose() + 0.2 * Matrix::Identity(dim, dim);
  return IlsProblem::from_vector(gaussian(dim, 1, rng, spread), w);
}

std::vector<Candidate> box_scan(const IlsProblem& p, double chi) {
  const Matrix q = spd_inverse(p.weight);
  const Eigen::Index n = p.dim();
  IntVector lo(n), hi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = std::sqrt(chi * q(i, i));
    lo(i) = static_cast<std::int64_t>(std::floor(p.center(i) - r));
    hi(i) = static_cast<std::int64_t>(std::ceil(p.center(i) + r));
  }
  std::vector<Candidate> out;
  IntVector cur = lo;
  for (;;) {
    const double v = p.value(cur);
    if (v < chi) out.push_back({p.to_matrix(cur), v});
    Eigen::Index k = 0;
    while (k < n && ++cur(k) > hi(k)) {
      cur(k) = lo(k);
      ++k;
    }
    if (k == n) break;
  }
  std::sort(out.begin(), out.end(), candidate_less);
  return out;
}

// Radius holding at least `count` lattice points, found by scanning a box.
double radius_for(const IlsProblem& p, std::size_t count) {
  double chi = 1.0;
  while (box_scan(p, chi).size() < count) chi *= 1.5;
  return chi;
}

}  // namespace

TEST(Ils, ValueIsWeightedDistance) {
  Matrix w(2, 2);
  w << 2, 1, 1, 3;
  const IlsProblem p = IlsProblem::from_vector(Vector::Constant(2, 0.5), w);
  IntVector n(2);
  n << 1, 0;
  // d = (0.5, -0.5): 2*0.25 + 2*1*(-0.25) + 3*0.25
  EXPECT_NEAR(p.value(n), 0.75, 1e-15);
}

TEST(Ils, RejectsNonPositiveDefiniteWeight) {
  EXPECT_THROW(IlsProblem::from_vector(Vector::Zero(2), -Matrix::Identity(2, 2)),
               std::invalid_argument);
  EXPECT_THROW(IlsProblem::from_vector(Vector::Zero(3), Matrix::Identity(2, 2)),
               std::invalid_argument);
}

TEST(Ils, DecorrelationIsUnimodularAndValuePreserving) {
  Rng rng = make_rng({1});
  for (int k = 0; k < 30; ++k) {
    const IlsProblem p = random_problem(rng, 2 + k % 5);
    const Decorrelation d = decorrelate(p);
    const Matrix z = to_real(d.z);
    EXPECT_NEAR(std::abs(z.determinant()), 1.0, 1e-9);
    EXPECT_EQ(IntMatrix(d.z.transpose() * d.z_inv_t),
              IntMatrix::Identity(p.dim(), p.dim()));
    for (int t = 0; t < 5; ++t) {
      IntVector np(p.dim());
      for (Eigen::Index i = 0; i < np.size(); ++i) np(i) = static_cast<std::int64_t>(rng() % 7) - 3;
      EXPECT_NEAR(d.transformed.value(np), p.value(IntVector(d.z_inv_t * np)),
                  1e-8 * std::max(1.0, p.value(IntVector(d.z_inv_t * np))));
    }
  }
}

TEST(Ils, DiagonalProblemKeepsIdentity) {
  const IlsProblem p =
      IlsProblem::from_vector(Vector::Constant(3, 0.3), Vector(Vector::LinSpaced(3, 1, 3)).asDiagonal());
  EXPECT_EQ(decorrelate(p).z, IntMatrix::Identity(3, 3));
}

TEST(Ils, EnumerateMatchesBoxScan) {
  Rng rng = make_rng({2});
  for (int k = 0; k < 200; ++k) {
    const IlsProblem p = random_problem(rng, 1 + k % 6);
    const double chi = radius_for(p, 10);
    const std::vector<Candidate> brute = box_scan(p, chi);
    const CandidateSet set = enumerate(p, chi, 1000000);
    ASSERT_GE(brute.size(), 10u);
    ASSERT_EQ(set.candidates.size(), brute.size()) << "instance " << k;
    EXPECT_FALSE(set.truncated);
    for (std::size_t i = 0; i < brute.size(); ++i) {
      EXPECT_EQ(set.candidates[i].n, brute[i].n);
      EXPECT_NEAR(set.candidates[i].value, brute[i].value, 1e-9);
    }
    const ClosestResult c = closest(p);
    EXPECT_EQ(c.n, brute.front().n);
    EXPECT_NEAR(c.value, brute.front().value, 1e-9);
  }
}

TEST(Ils, EnumerateCapKeepsSmallest) {
  Rng rng = make_rng({3});
  const IlsProblem p = random_problem(rng, 3);
  const double chi = radius_for(p, 40);
  const std::vector<Candidate> brute = box_scan(p, chi);
  const CandidateSet set = enumerate(p, chi, 7);
  EXPECT_TRUE(set.truncated);
  ASSERT_EQ(set.candidates.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(set.candidates[i].n, brute[i].n);
}

TEST(Ils, EmptyEllipsoid) {
  Matrix w = Matrix::Identity(2, 2);
  const IlsProblem p = IlsProblem::from_vector(Vector::Constant(2, 0.5), w);
  EXPECT_TRUE(enumerate(p, 0.1, 10).candidates.empty());
}

TEST(Ils, MatrixShapedProblemRoundTrips) {
  Rng rng = make_rng({4});
  const Matrix c = gaussian(3, 2, rng, 2.0);
  const Matrix a = gaussian(6, 6, rng);
  const IlsProblem p = IlsProblem::from_matrix(c, a * a.transpose() + Matrix::Identity(6, 6));
  const ClosestResult r = closest(p);
  ASSERT_EQ(r.n.rows(), 3);
  ASSERT_EQ(r.n.cols(), 2);
  EXPECT_NEAR(r.value, p.value(vec(r.n)), 1e-12);
}

TEST(Ils, VisitorCanShrinkAndStop) {
  Rng rng = make_rng({5});
  const IlsProblem p = random_problem(rng, 4);
  const Enumerator en(p);
  double best = std::numeric_limits<double>::infinity();
  en.run(radius_for(p, 30), [&](const IntVector&, double v, double& bound) {
    best = std::min(best, v);
    bound = v;
    return true;
  });
  EXPECT_NEAR(best, closest(p).value, 1e-9);
  int seen = 0;
  const std::int64_t leaves = en.run(radius_for(p, 30), [&](const IntVector&, double, double&) {
    return ++seen < 3;
  });
  EXPECT_EQ(seen, 3);
  EXPECT_EQ(leaves, 3);
}

TEST(Ils, TieBreakIsLexicographic) {
  const IlsProblem p = IlsProblem::from_vector(Vector::Constant(1, 0.5), Matrix::Identity(1, 1));
  const CandidateSet set = enumerate(p, 1.0, 10);
  ASSERT_EQ(set.candidates.size(), 2u);
  EXPECT_EQ(set.candidates[0].n(0, 0), 0);
  EXPECT_EQ(set.candidates[1].n(0, 0), 1);
}
