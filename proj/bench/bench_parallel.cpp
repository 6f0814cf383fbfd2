#include <benchmark/benchmark.h>

#include "riemocad/errors.hpp"
#include "riemocad/harness.hpp"
#include "riemocad/solvers.hpp"

using namespace riemocad;

namespace {

CampaignConfig bench_config() {
  CampaignConfig c;
  c.n_trials = 64;
  c.n_satellites = 6;
  c.n_baselines = 1;
  c.sigma_phase_mm = 3.0;
  c.seed = 3;
  return c;
}

CostContext bench_context() {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng = make_rng({11, attempt});
    ScenarioSpec spec;
    spec.n_satellites = 6;
    spec.n_baselines = 1;
    spec.sigma_phase = 3e-3;
    spec.sigma_code = 0.3;
    const Scenario s = sample_scenario(spec, rng);
    const ObservationSet obs = simulate_observations(s, derive_seed({11, attempt, 1}));
    try {
      return make_cost_context(solve_float_ac(obs, obs.body_baselines()));
    } catch (const DegenerateGeometry&) {
    }
  }
}

void BM_Campaign(benchmark::State& state) {
  const CampaignConfig cfg = bench_config();
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_campaign(cfg, parallel));
  state.SetItemsProcessed(state.iterations() * cfg.n_trials);
  state.SetLabel(parallel ? "parallel" : "serial");
}
BENCHMARK(BM_Campaign)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EvaluateCosts(benchmark::State& state) {
  const CostContext ctx = bench_context();
  const SearchCost cost = riemocad_search_cost(ctx);
  Rng rng = make_rng({12});
  std::uniform_int_distribution<int> d(-2, 2);
  std::vector<IntMatrix> cands;
  for (int k = 0; k < 256; ++k) {
    IntMatrix n = round_to_int(ctx.fs.n_hat);
    for (Eigen::Index i = 0; i < n.size(); ++i) n.data()[i] += d(rng);
    cands.push_back(std::move(n));
  }
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_costs(cost, cands, parallel));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cands.size()));
  state.SetLabel(parallel ? "parallel" : "serial");
}
BENCHMARK(BM_EvaluateCosts)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ExpandSearch(benchmark::State& state) {
  const CostContext ctx = bench_context();
  const SearchCost cost = riemocad_search_cost(ctx);
  const bool parallel = state.range(0) != 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(search_expand(cost, kDefaultCandidateCap, parallel));
  state.SetLabel(parallel ? "parallel" : "serial");
}
BENCHMARK(BM_ExpandSearch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
