#include "riemocad/harness.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>

#include "riemocad/errors.hpp"

namespace riemocad {

namespace {

constexpr int kMaxAttempts = 100;
constexpr std::uint64_t kScenarioStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid config field '" + field + "': " + what);
}

SolverReport run_method(Method m, const FloatSolutionUC& uc, const CostContext& ctx,
                        const ObservationSet& obs, const SearchOptions& opts) {
  switch (m) {
    case Method::UC_ILS: return solve_uc_ils(uc, obs);
    case Method::AC_ILS: return solve_ac_ils(ctx.fs, obs);
    case Method::RIEMOCAD_LF: return solve_riemocad_lf(ctx, obs);
    case Method::MC_LAMBDA: return solve_mc_lambda(ctx, obs, opts);
    case Method::RIEMOCAD_TF: return solve_riemocad_tf(ctx, obs, opts);
  }
  throw std::logic_error("unknown method");
}

}  // namespace

void CampaignConfig::validate() const {
  require(n_trials >= 1, "n_trials", "must be >= 1");
  require(n_satellites >= 4, "n_satellites", "must be >= 4");
  require(n_baselines >= 1, "n_baselines", "must be >= 1");
  require(std::isfinite(sigma_phase_mm) && sigma_phase_mm >= 0.0, "sigma_phase_mm",
          "must be finite and >= 0");
  require(std::isfinite(sigma_code_over_phase) && sigma_code_over_phase > 0.0,
          "sigma_code_over_phase", "must be > 0");
  require(std::isfinite(wavelength_m) && wavelength_m > 0.0, "wavelength_m", "must be > 0");
  require(!methods.empty(), "methods", "must list at least one method");
  require(candidate_cap >= 1, "candidate_cap", "must be >= 1");
}

ScenarioSpec CampaignConfig::scenario_spec() const {
  ScenarioSpec spec;
  spec.n_satellites = n_satellites;
  spec.n_baselines = n_baselines;
  spec.sigma_phase = sigma_phase_mm * 1e-3;
  spec.sigma_code = spec.sigma_phase * sigma_code_over_phase;
  spec.wavelength = wavelength_m;
  return spec;
}

double rmse(const Matrix& a, const Matrix& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

Matrix load_campaign_geometry(const CampaignConfig& config) {
  if (!config.geometry_file) return Matrix();
  Matrix g = load_geometry_csv(*config.geometry_file);
  if (g.rows() < config.n_satellites)
    throw std::invalid_argument("geometry file " + *config.geometry_file + " lists " +
                                std::to_string(g.rows()) + " satellites but n_satellites is " +
                                std::to_string(config.n_satellites));
  return g;
}

TrialRecord run_trial(const CampaignConfig& config, int trial, const Matrix& geometry,
                      bool parallel) {
  config.validate();
  const ScenarioSpec spec = config.scenario_spec();
  const SearchOptions opts{config.search_strategy, config.candidate_cap, parallel};
  const auto seed = config.seed;
  const auto t = static_cast<std::uint64_t>(trial);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const auto a = static_cast<std::uint64_t>(attempt);
    Rng rng = make_rng({seed, t, a, kScenarioStream});
    Scenario scenario = sample_scenario(spec, rng, geometry);
    const ObservationSet obs =
        simulate_observations(scenario, derive_seed({seed, t, a, kNoiseStream}));
    try {
      const FloatSolutionUC uc = solve_float_uc(obs);
      const CostContext ctx = make_cost_context(solve_float_ac(obs, obs.body_baselines()));
      const Matrix truth = to_real(scenario.true_ambiguities);
      const double rmse_ls = rmse(ctx.fs.n_hat, truth);
      const double rmse_rm = rmse(ctx.rm.n_rm, truth);

      TrialRecord rec;
      rec.trial = trial;
      rec.resamples = attempt;
      for (Method m : config.methods) {
        SolverReport rep = run_method(m, uc, ctx, obs, opts);
        TrialRow row;
        row.trial = trial;
        row.method = m;
        row.success = rep.n_fixed == scenario.true_ambiguities;
        row.candidates = rep.candidates_evaluated;
        row.manifold_solves = rep.manifold_solves;
        row.objective = rep.objective;
        row.float_rmse_ls = rmse_ls;
        row.float_rmse_rm = rmse_rm;
        row.wall_time_us =
            config.record_wall_time
                ? std::chrono::duration<double, std::micro>(rep.wall_time).count()
                : 0.0;
        row.truncated = rep.truncated;
        rec.rows.push_back(row);
        rec.reports.push_back(std::move(rep));
      }
      rec.scenario = std::move(scenario);
      return rec;
    } catch (const DegenerateGeometry&) {
      continue;
    }
  }
  throw NumericalError("trial " + std::to_string(trial) + ": no non-degenerate geometry after " +
                       std::to_string(kMaxAttempts) + " attempts");
}

std::vector<MethodSummary> summarize(const std::vector<Method>& methods,
                                     const std::vector<TrialRow>& rows) {
  std::vector<MethodSummary> out;
  for (Method m : methods) {
    MethodSummary s;
    s.method = m;
    for (const TrialRow& r : rows) {
      if (r.method != m) continue;
      ++s.n_trials;
      s.success_rate += r.success ? 1.0 : 0.0;
      s.mean_candidates += static_cast<double>(r.candidates);
      s.mean_manifold_solves += static_cast<double>(r.manifold_solves);
      s.float_rmse_ls += r.float_rmse_ls;
      s.float_rmse_rm += r.float_rmse_rm;
      s.mean_wall_time_us += r.wall_time_us;
    }
    if (s.n_trials > 0) {
      const double n = s.n_trials;
      s.success_rate /= n;
      s.mean_candidates /= n;
      s.mean_manifold_solves /= n;
      s.float_rmse_ls /= n;
      s.float_rmse_rm /= n;
      s.mean_wall_time_us /= n;
    }
    out.push_back(s);
  }
  return out;
}

CampaignResult run_campaign(const CampaignConfig& config, bool parallel) {
  config.validate();
  const Matrix geometry = load_campaign_geometry(config);
  std::vector<TrialRecord> records(static_cast<std::size_t>(config.n_trials));
  std::exception_ptr error;

  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < config.n_trials; ++i) {
      try {
        records[i] = run_trial(config, i, geometry, true);
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (int i = 0; i < config.n_trials; ++i) records[i] = run_trial(config, i, geometry, false);
  }

  CampaignResult res;
  res.config = config;
  for (TrialRecord& rec : records) {
    res.resamples += rec.resamples;
    for (TrialRow& row : rec.rows) {
      res.truncated += row.truncated ? 1 : 0;
      res.rows.push_back(row);
    }
  }
  res.summaries = summarize(config.methods, res.rows);
  return res;
}

}  // namespace riemocad
