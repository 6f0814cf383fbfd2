#include "riemocad/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "riemocad/cost_decomposition.hpp"
#include "riemocad/errors.hpp"
#include "riemocad/ils.hpp"

namespace riemocad {

namespace {

struct Instance {
  Scenario scenario;
  ObservationSet obs;
  CostContext ctx;
};

Instance random_instance(std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng = make_rng({seed, attempt, 11});
    ScenarioSpec spec;
    spec.n_satellites = 4 + static_cast<int>(rng() % 5);
    spec.n_baselines = 1 + static_cast<int>(rng() % 3);
    spec.sigma_phase = 3e-3;
    spec.sigma_code = 0.3;
    Scenario s = sample_scenario(spec, rng);
    ObservationSet obs = simulate_observations(s, derive_seed({seed, attempt, 12}));
    try {
      CostContext ctx = make_cost_context(solve_float_ac(obs, obs.body_baselines()));
      return {std::move(s), std::move(obs), std::move(ctx)};
    } catch (const DegenerateGeometry&) {
    }
  }
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Matrix gaussian(Eigen::Index r, Eigen::Index c, Rng& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

IntMatrix perturb(const Matrix& center, Rng& rng, int spread) {
  std::uniform_int_distribution<int> d(-spread, spread);
  IntMatrix n = round_to_int(center);
  for (Eigen::Index i = 0; i < n.size(); ++i) n.data()[i] += d(rng);
  return n;
}

// All integer points of the box that bounds {value < chi}.
std::vector<Candidate> box_scan(const IlsProblem& p, double chi) {
  const Matrix q = spd_inverse(p.weight);
  const Eigen::Index n = p.dim();
  IntVector lo(n), hi(n), cur(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = std::sqrt(chi * q(i, i));
    lo(i) = static_cast<std::int64_t>(std::floor(p.center(i) - r));
    hi(i) = static_cast<std::int64_t>(std::ceil(p.center(i) + r));
  }
  std::vector<Candidate> out;
  cur = lo;
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

}  // namespace

std::vector<CheckResult> run_verification(int seeds, std::uint64_t base_seed) {
  CheckResult orth_id{"orthogonal decomposition identity", true, 0.0, 1e-8};
  CheckResult five_id{"five-term decomposition identity", true, 0.0, 1e-8};
  CheckResult alt_id{"alternative five-term identity", true, 0.0, 1e-8};
  CheckResult grad{"Riemannian gradient vs finite differences", true, 0.0, 1e-5};
  CheckResult ils{"enumeration vs box scan (mismatches)", true, 0.0, 0.0};
  CheckResult sandwich{"lower <= cost <= upper (violations)", true, 0.0, 0.0};

  for (int k = 0; k < seeds; ++k) {
    const std::uint64_t seed = derive_seed({base_seed, static_cast<std::uint64_t>(k)});
    Instance inst = random_instance(seed);
    const FloatSolutionAC& fs = inst.ctx.fs;
    Rng rng = make_rng({seed, 13});
    const Eigen::Index q = fs.q();

    for (int p = 0; p < 20; ++p) {
      const Matrix r = fs.r_hat + gaussian(3, q, rng, 0.05);
      const Matrix n = to_real(perturb(fs.n_hat, rng, 3));
      const Matrix r_bar = fs.r_hat + gaussian(3, q, rng, 0.05);
      const Matrix n_bar = to_real(perturb(fs.n_hat, rng, 3));
      const double direct = objective_value(inst.obs, r, n);
      orth_id.worst = std::max(orth_id.worst, rel_err(decompose_orthogonal(fs, r, n).sum(), direct));
      five_id.worst = std::max(
          five_id.worst, rel_err(decompose_at_point(fs, inst.obs, r_bar, n_bar, r, n).sum(), direct));
      alt_id.worst = std::max(
          alt_id.worst,
          rel_err(decompose_at_point_alt(fs, inst.obs, r_bar, n_bar, r, n).sum(), direct));
    }

    // Gradient of the weighted Procrustes cost along random tangent directions.
    const Matrix center = fs.r_hat;
    const Matrix& w = fs.m_rr;
    auto f = [&](const Matrix& r) { return weighted_sq_norm(vec(Matrix(r - center)), w); };
    const StiefelPoint x = StiefelPoint::random(q, rng);
    const Matrix egrad = 2.0 * unvec(Vector(w * vec(Matrix(x.matrix() - center))), 3, q);
    const TangentVector g = riemannian_gradient(x, egrad);
    for (int d = 0; d < 5; ++d) {
      const TangentVector xi = project_tangent(x, gaussian(3, q, rng, 1.0));
      const double h = 1e-6;
      const double fd = (f(retract_polar(x, {h * xi.v, x}).matrix()) -
                         f(retract_polar(x, {-h * xi.v, x}).matrix())) /
                        (2.0 * h);
      const double an = (g.v.array() * xi.v.array()).sum();
      grad.worst = std::max(grad.worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
    }

    // Small ILS instance against a box scan.
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(rng() % 3);
    const Matrix a = gaussian(dim, dim, rng, 1.0);
    const Matrix wt = a * a.transpose() + 0.2 * Matrix::Identity(dim, dim);
    const IlsProblem prob = IlsProblem::from_vector(gaussian(dim, 1, rng, 3.0), wt);
    const std::vector<Candidate> brute = box_scan(prob, 6.0);
    const CandidateSet en = enumerate(prob, 6.0, 1000000);
    bool same = brute.size() == en.candidates.size();
    for (std::size_t i = 0; same && i < brute.size(); ++i)
      same = brute[i].n == en.candidates[i].n;
    if (!same) ils.worst += 1.0;

    for (int c = 0; c < 10; ++c) {
      const Matrix n = to_real(perturb(fs.n_hat, rng, 2));
      const double lo = bound_lower(inst.ctx, n);
      const double mid = cost_c(inst.ctx, n).value;
      const double hi = bound_upper(inst.ctx, n);
      const double slack = 1e-9 * std::max(1.0, std::abs(mid));
      if (lo > mid + slack || mid > hi + slack) sandwich.worst += 1.0;
    }
  }

  std::vector<CheckResult> out = {orth_id, five_id, alt_id, grad, ils, sandwich};
  for (CheckResult& c : out) c.passed = c.worst <= c.tolerance;
  return out;
}

}  // namespace riemocad
