#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riemocad/solvers.hpp"

namespace riemocad {

struct CampaignConfig {
  int n_trials = 1000;
  int n_satellites = 8;  // tracked; S = n_satellites - 1
  int n_baselines = 1;
  double sigma_phase_mm = 1.0;
  double sigma_code_over_phase = kDefaultCodeOverPhase;
  double wavelength_m = kDefaultWavelength;
  std::vector<Method> methods = {kAllMethods, kAllMethods + 5};
  std::int64_t candidate_cap = kDefaultCandidateCap;
  std::uint64_t seed = 1;
  std::optional<std::string> geometry_file;
  SearchStrategy search_strategy = SearchStrategy::shrink;
  bool record_wall_time = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  ScenarioSpec scenario_spec() const;
};

/// One (trial, method) row of trials.csv.
struct TrialRow {
  int trial = 0;
  Method method = Method::UC_ILS;
  bool success = false;
  std::int64_t candidates = 0;
  std::int64_t manifold_solves = 0;
  double objective = 0.0;
  double float_rmse_ls = 0.0;
  double float_rmse_rm = 0.0;
  double wall_time_us = 0.0;
  bool truncated = false;
};

struct TrialRecord {
  int trial = 0;
  int resamples = 0;  // degenerate geometries redrawn before this trial
  Scenario scenario;
  std::vector<SolverReport> reports;  // in config.methods order
  std::vector<TrialRow> rows;
};

struct MethodSummary {
  Method method = Method::UC_ILS;
  int n_trials = 0;
  double success_rate = 0.0;
  double mean_candidates = 0.0;
  double mean_manifold_solves = 0.0;
  double float_rmse_ls = 0.0;
  double float_rmse_rm = 0.0;
  double mean_wall_time_us = 0.0;
};

struct CampaignResult {
  CampaignConfig config;
  std::vector<TrialRow> rows;  // ordered by (trial, method order)
  std::vector<MethodSummary> summaries;
  int resamples = 0;
  int truncated = 0;
};

/// Root mean square over all entries of a - b.
double rmse(const Matrix& a, const Matrix& b);

/// Unit line-of-sight rows loaded from config.geometry_file, or empty.
Matrix load_campaign_geometry(const CampaignConfig& config);

/// Deterministic in (config.seed, trial). `geometry` is the preloaded file
/// geometry (may be empty). Degenerate geometries are redrawn up to 100 times.
TrialRecord run_trial(const CampaignConfig& config, int trial, const Matrix& geometry = Matrix(),
                      bool parallel = false);

/// Per-method aggregates over `rows`.
std::vector<MethodSummary> summarize(const std::vector<Method>& methods,
                                     const std::vector<TrialRow>& rows);

/// Runs all trials, over OpenMP threads when `parallel`; output is identical
/// either way.
CampaignResult run_campaign(const CampaignConfig& config, bool parallel = true);

}  // namespace riemocad
