#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "riemocad/cost_decomposition.hpp"
#include "riemocad/ils.hpp"

namespace riemocad {

enum class Method { UC_ILS, AC_ILS, RIEMOCAD_LF, MC_LAMBDA, RIEMOCAD_TF };

inline constexpr Method kAllMethods[] = {Method::UC_ILS, Method::AC_ILS, Method::RIEMOCAD_LF,
                                         Method::MC_LAMBDA, Method::RIEMOCAD_TF};

std::string_view to_string(Method m);
/// Accepts uc_ils, ac_ils, riemocad_lf, mc_lambda, riemocad_tf.
std::optional<Method> parse_method(std::string_view name);
bool is_orthonormal_method(Method m);

enum class SearchStrategy { shrink, expand };

std::string_view to_string(SearchStrategy s);
std::optional<SearchStrategy> parse_strategy(std::string_view name);

inline constexpr std::int64_t kDefaultCandidateCap = 10000;
// Lattice points visited per search are limited to this multiple of the cap.
inline constexpr std::int64_t kLeafBudgetFactor = 100;

struct SearchOptions {
  SearchStrategy strategy = SearchStrategy::shrink;
  std::int64_t cap = kDefaultCandidateCap;
  bool parallel = true;  // evaluate candidate costs with OpenMP
};

struct SolverReport {
  Method method = Method::UC_ILS;
  IntMatrix n_fixed;
  Matrix r_fixed;
  double objective = 0.0;
  std::int64_t candidates_evaluated = 0;
  std::int64_t manifold_solves = 0;
  bool truncated = false;
  std::chrono::nanoseconds wall_time{0};
};

/// Cost model searched by the bound-driven drivers. The quadratic part of
/// every cost is ||N - center||^2_W + offset.
struct SearchCost {
  IlsProblem ellipsoid;  // center and weight of the quadratic part
  double offset = 0.0;
  std::function<double(const Matrix&)> lower;
  std::function<double(const Matrix&)> upper;
  std::function<CostValue(const Matrix&)> full;
  IntMatrix anchor;  // integer start for the initial radius: the weighted-closest
                     // integer to N_rm (TF) or to N_hat (MC-LAMBDA)
};

struct SearchResult {
  IntMatrix n;
  CostValue cost;
  std::int64_t candidates = 0;        // integer candidates whose full cost was evaluated
  std::int64_t leaves = 0;            // lattice points visited inside the search ellipsoid
  std::int64_t cost_evaluations = 0;  // candidates plus any fallback evaluation
  bool truncated = false;
};

SearchCost riemocad_search_cost(const CostContext& ctx);
SearchCost mc_lambda_search_cost(const CostContext& ctx);

/// Evaluates `cost.full` on every candidate; the parallel path uses OpenMP,
/// the serial path is the reference implementation. Results are identical.
std::vector<CostValue> evaluate_costs(const SearchCost& cost,
                                      const std::vector<IntMatrix>& candidates, bool parallel);

/// Minimum of `cost.full` over the integers. A candidate counts once its full
/// cost is evaluated; lattice points rejected by the lower bound do not.
SearchResult search_shrink(const SearchCost& cost, std::int64_t cap, bool parallel);
SearchResult search_expand(const SearchCost& cost, std::int64_t cap, bool parallel);
SearchResult run_search(const SearchCost& cost, const SearchOptions& opts);

SolverReport solve_uc_ils(const FloatSolutionUC& fs, const ObservationSet& obs);
SolverReport solve_ac_ils(const FloatSolutionAC& fs, const ObservationSet& obs);
SolverReport solve_riemocad_lf(const CostContext& ctx, const ObservationSet& obs);
SolverReport solve_mc_lambda(const CostContext& ctx, const ObservationSet& obs,
                             const SearchOptions& opts = {});
SolverReport solve_riemocad_tf(const CostContext& ctx, const ObservationSet& obs,
                               const SearchOptions& opts = {});

}  // namespace riemocad
