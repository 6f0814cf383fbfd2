#include "riemocad/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace riemocad {

namespace {

using Clock = std::chrono::steady_clock;
using Key = std::vector<std::int64_t>;

Key key_of(const IntMatrix& n) { return Key(n.data(), n.data() + n.size()); }

// Small relative margin so that boundary points (for example the anchor
// itself when its penalty is zero) stay inside the search ellipsoid.
double inflate(double v) { return v + 1e-9 * std::max(1.0, std::abs(v)); }

bool better(const CostValue& a, const IntMatrix& na, const CostValue& b, const IntMatrix& nb) {
  return candidate_less(Candidate{na, a.value}, Candidate{nb, b.value});
}

Matrix right_pseudo_inverse(const Matrix& xb) {
  return xb.transpose() * (xb * xb.transpose()).inverse();
}

SolverReport finish_orthonormal(Method method, const CostContext& ctx,
                                const ObservationSet& obs, IntMatrix n) {
  SolverReport rep;
  rep.method = method;
  const Matrix nr = to_real(n);
  MinimizeResult fit = inner_minimum(ctx, conditional_r(ctx.fs, nr), kRandomStarts);
  rep.r_fixed = fit.point.matrix();
  rep.objective = objective_value(obs, rep.r_fixed, nr);
  rep.n_fixed = std::move(n);
  return rep;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::UC_ILS: return "uc_ils";
    case Method::AC_ILS: return "ac_ils";
    case Method::RIEMOCAD_LF: return "riemocad_lf";
    case Method::MC_LAMBDA: return "mc_lambda";
    case Method::RIEMOCAD_TF: return "riemocad_tf";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods)
    if (to_string(m) == name) return m;
  return std::nullopt;
}

bool is_orthonormal_method(Method m) {
  return m == Method::RIEMOCAD_LF || m == Method::MC_LAMBDA || m == Method::RIEMOCAD_TF;
}

std::string_view to_string(SearchStrategy s) {
  return s == SearchStrategy::shrink ? "shrink" : "expand";
}

std::optional<SearchStrategy> parse_strategy(std::string_view name) {
  if (name == "shrink") return SearchStrategy::shrink;
  if (name == "expand") return SearchStrategy::expand;
  return std::nullopt;
}

SearchCost riemocad_search_cost(const CostContext& ctx) {
  SearchCost c;
  c.ellipsoid = IlsProblem::from_matrix(ctx.fs.n_hat, ctx.fs.weight_nn);
  c.offset = cost_offset(ctx);
  c.lower = [&ctx](const Matrix& n) { return bound_lower(ctx, n); };
  c.upper = [&ctx](const Matrix& n) { return bound_upper(ctx, n); };
  c.full = [&ctx](const Matrix& n) { return cost_c(ctx, n); };
  c.anchor = round_to_int(ctx.rm.n_rm);
  return c;
}

SearchCost mc_lambda_search_cost(const CostContext& ctx) {
  SearchCost c;
  c.ellipsoid = IlsProblem::from_matrix(ctx.fs.n_hat, ctx.fs.weight_nn);
  c.offset = 0.0;
  auto quad = [&ctx](const Matrix& n) {
    return weighted_sq_norm(vec(Matrix(n - ctx.fs.n_hat)), ctx.fs.weight_nn);
  };
  c.lower = [&ctx, quad](const Matrix& n) {
    return quad(n) + ctx.fs.xi_min * column_norm_penalty(conditional_r(ctx.fs, n));
  };
  c.upper = [&ctx, quad](const Matrix& n) {
    return quad(n) + ctx.fs.xi_max * stiefel_distance_sq(conditional_r(ctx.fs, n));
  };
  c.full = [&ctx](const Matrix& n) { return mc_lambda_cost(ctx, n); };
  c.anchor = round_to_int(ctx.fs.n_hat);
  return c;
}

std::vector<CostValue> evaluate_costs(const SearchCost& cost,
                                      const std::vector<IntMatrix>& candidates, bool parallel) {
  const auto count = static_cast<std::int64_t>(candidates.size());
  std::vector<CostValue> out(candidates.size());
  if (!parallel) {
    for (std::int64_t i = 0; i < count; ++i) out[i] = cost.full(to_real(candidates[i]));
    return out;
  }
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      out[i] = cost.full(to_real(candidates[i]));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

SearchResult search_shrink(const SearchCost& cost, std::int64_t cap, bool) {
  if (cap < 1) throw std::invalid_argument("candidate cap must be at least 1");
  const IlsProblem& ell = cost.ellipsoid;
  const std::int64_t leaf_budget = kLeafBudgetFactor * cap;
  Enumerator en(ell);
  SearchResult res;
  std::set<Key> evaluated;

  // chi is always the C_U or C value of some integer point, so it never drops
  // below the minimum of C and the minimizer is never pruned.
  res.n = cost.anchor;
  res.cost = cost.full(to_real(cost.anchor));
  res.candidates = 1;
  evaluated.insert(key_of(cost.anchor));
  double chi = std::min(cost.upper(to_real(cost.anchor)), res.cost.value);

  // Radius grows geometrically up to chi; a round at radius t is conclusive
  // once the best cost is within offset + t, as every point outside has a
  // larger quadratic part.
  double t = std::max(0.1 * (cost.lower(to_real(cost.anchor)) - cost.offset), 1e-3);
  for (;;) {
    const bool last = cost.offset + t >= chi;
    const double radius = last ? chi - cost.offset : t;
    en.run(inflate(radius), [&](const IntVector& v, double, double& bound) {
      if (++res.leaves > leaf_budget) {
        res.truncated = true;
        return false;
      }
      IntMatrix n = ell.to_matrix(v);
      Key key = key_of(n);
      if (evaluated.count(key)) return true;
      const Matrix nr = to_real(n);
      chi = std::min(chi, cost.upper(nr));
      if (cost.lower(nr) <= inflate(chi)) {
        if (res.candidates == cap) {
          res.truncated = true;
          return false;
        }
        CostValue c = cost.full(nr);
        ++res.candidates;
        evaluated.insert(std::move(key));
        if (better(c, n, res.cost, res.n)) {
          res.cost = std::move(c);
          res.n = std::move(n);
        }
        chi = std::min(chi, res.cost.value);
      }
      bound = std::min(bound, inflate(chi - cost.offset));
      return true;
    });
    if (res.truncated || last || res.cost.value <= cost.offset + t) break;
    t *= 2.0;
  }
  res.leaves = std::min(res.leaves, leaf_budget);
  res.cost_evaluations = res.candidates;
  return res;
}

SearchResult search_expand(const SearchCost& cost, std::int64_t cap, bool parallel) {
  if (cap < 1) throw std::invalid_argument("candidate cap must be at least 1");
  const IlsProblem& ell = cost.ellipsoid;
  const std::int64_t leaf_budget = kLeafBudgetFactor * cap;
  Enumerator en(ell);
  SearchResult res;
  std::map<Key, double> lower_cache;
  std::map<Key, std::pair<IntMatrix, CostValue>> evaluated;

  auto best_below = [&](double limit) -> const std::pair<IntMatrix, CostValue>* {
    const std::pair<IntMatrix, CostValue>* best = nullptr;
    for (const auto& [key, entry] : evaluated) {
      if (!(entry.second.value < limit)) continue;
      if (!best || better(entry.second, entry.first, best->second, best->first)) best = &entry;
    }
    return best;
  };

  double t = std::max(0.1 * (cost.lower(to_real(cost.anchor)) - cost.offset), 1e-3);
  for (;;) {
    const double chi = cost.offset + t;
    std::vector<IntMatrix> pending;
    en.run(t, [&](const IntVector& v, double, double&) {
      IntMatrix n = ell.to_matrix(v);
      Key key = key_of(n);
      auto it = lower_cache.find(key);
      if (it == lower_cache.end()) {
        if (++res.leaves > leaf_budget) {
          res.truncated = true;
          return false;
        }
        it = lower_cache.emplace(key, cost.lower(to_real(n))).first;
      }
      if (it->second < chi && !evaluated.count(key)) {
        if (res.candidates + static_cast<std::int64_t>(pending.size()) == cap) {
          res.truncated = true;
          return false;
        }
        pending.push_back(std::move(n));
      }
      return true;
    });
    const std::vector<CostValue> values = evaluate_costs(cost, pending, parallel);
    res.candidates += static_cast<std::int64_t>(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i)
      evaluated.emplace(key_of(pending[i]), std::make_pair(pending[i], values[i]));

    if (const auto* best = best_below(chi)) {
      res.n = best->first;
      res.cost = best->second;
      break;
    }
    if (res.truncated) {
      if (evaluated.empty()) {
        const CostValue v = cost.full(to_real(cost.anchor));
        ++res.cost_evaluations;
        evaluated.emplace(key_of(cost.anchor), std::make_pair(cost.anchor, v));
      }
      const auto* best = best_below(std::numeric_limits<double>::infinity());
      res.n = best->first;
      res.cost = best->second;
      break;
    }
    t *= 2.0;
  }
  res.leaves = std::min(res.leaves, leaf_budget);
  res.cost_evaluations += res.candidates;
  return res;
}

SearchResult run_search(const SearchCost& cost, const SearchOptions& opts) {
  return opts.strategy == SearchStrategy::shrink ? search_shrink(cost, opts.cap, opts.parallel)
                                                 : search_expand(cost, opts.cap, opts.parallel);
}

SolverReport solve_uc_ils(const FloatSolutionUC& fs, const ObservationSet& obs) {
  const auto start = Clock::now();
  ClosestResult best = closest(IlsProblem::from_matrix(fs.n_hat, fs.weight_nn));
  const Matrix nr = to_real(best.n);
  const Matrix x = conditional_x(fs, nr);
  SolverReport rep;
  rep.method = Method::UC_ILS;
  rep.r_fixed = x * right_pseudo_inverse(obs.body_baselines());
  const Matrix e = obs.y() - obs.design_geometry() * x - obs.design_ambiguity() * nr;
  rep.objective = weighted_sq_norm(vec(e), obs.weight());
  rep.candidates_evaluated = best.leaves;
  rep.n_fixed = std::move(best.n);
  rep.wall_time = Clock::now() - start;
  return rep;
}

SolverReport solve_ac_ils(const FloatSolutionAC& fs, const ObservationSet& obs) {
  const auto start = Clock::now();
  ClosestResult best = closest(IlsProblem::from_matrix(fs.n_hat, fs.weight_nn));
  const Matrix nr = to_real(best.n);
  SolverReport rep;
  rep.method = Method::AC_ILS;
  rep.r_fixed = conditional_r(fs, nr);
  rep.objective = objective_value(obs, rep.r_fixed, nr);
  rep.candidates_evaluated = best.leaves;
  rep.n_fixed = std::move(best.n);
  rep.wall_time = Clock::now() - start;
  return rep;
}

SolverReport solve_riemocad_lf(const CostContext& ctx, const ObservationSet& obs) {
  const auto start = Clock::now();
  ClosestResult best = closest(IlsProblem::from_matrix(ctx.rm.n_rm, ctx.fs.weight_nn));
  SolverReport rep = finish_orthonormal(Method::RIEMOCAD_LF, ctx, obs, std::move(best.n));
  rep.candidates_evaluated = best.leaves;
  rep.manifold_solves = 2;
  rep.wall_time = Clock::now() - start;
  return rep;
}

SolverReport solve_mc_lambda(const CostContext& ctx, const ObservationSet& obs,
                             const SearchOptions& opts) {
  const auto start = Clock::now();
  SearchResult sr = run_search(mc_lambda_search_cost(ctx), opts);
  SolverReport rep = finish_orthonormal(Method::MC_LAMBDA, ctx, obs, std::move(sr.n));
  rep.candidates_evaluated = sr.candidates;
  rep.manifold_solves = sr.cost_evaluations + 1;
  rep.truncated = sr.truncated;
  rep.wall_time = Clock::now() - start;
  return rep;
}

SolverReport solve_riemocad_tf(const CostContext& ctx, const ObservationSet& obs,
                               const SearchOptions& opts) {
  const auto start = Clock::now();
  SearchResult sr = run_search(riemocad_search_cost(ctx), opts);
  SolverReport rep = finish_orthonormal(Method::RIEMOCAD_TF, ctx, obs, std::move(sr.n));
  rep.candidates_evaluated = sr.candidates;
  rep.manifold_solves = sr.cost_evaluations + 2;
  rep.truncated = sr.truncated;
  rep.wall_time = Clock::now() - start;
  return rep;
}

}  // namespace riemocad
