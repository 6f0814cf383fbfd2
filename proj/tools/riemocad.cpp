// Command-line front end: simulate, solve, bench, sweep, verify.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "riemocad/errors.hpp"
#include "riemocad/harness.hpp"
#include "riemocad/io.hpp"
#include "riemocad/verification.hpp"

namespace {

using namespace riemocad;

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Accepts "4..8" (inclusive) or "4,6,8".
std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  try {
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
      const int lo = std::stoi(text.substr(0, dots));
      const int hi = std::stoi(text.substr(dots + 2));
      if (hi < lo) throw UsageError(flag + ": empty range '" + text + "'");
      for (int v = lo; v <= hi; ++v) out.push_back(v);
      return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  } catch (const std::logic_error&) {
    throw UsageError(flag + ": cannot parse '" + text + "'");
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  } catch (const std::logic_error&) {
    throw UsageError(flag + ": cannot parse '" + text + "'");
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto m = parse_method(item);
    if (!m) throw UsageError("--methods: unknown method '" + item + "'");
    out.push_back(*m);
  }
  if (out.empty()) throw UsageError("--methods: empty list");
  return out;
}

// Flags shared by the campaign-style subcommands.
struct CampaignFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string methods;
  std::string sats;
  std::string sigma_mm;
  std::string baselines;
  std::optional<std::int64_t> cap;
  std::string geometry;
  std::string strategy;
  bool serial = false;

  void add_to(CLI::App* app, bool grid) {
    app->add_option("--config", config, "CampaignConfig JSON file");
    app->add_option("--seed", seed, "Base random seed");
    app->add_option("--trials", trials, "Number of Monte-Carlo trials");
    app->add_option("--methods", methods,
                    "Comma list of uc_ils,ac_ils,riemocad_lf,mc_lambda,riemocad_tf");
    app->add_option("--sats", sats, grid ? "Tracked satellites, e.g. 4..8 or 4,6" : "Tracked satellites");
    app->add_option("--sigma-mm", sigma_mm, grid ? "Phase sigma list in mm, e.g. 7,5,3,1" : "Phase sigma in mm");
    app->add_option("--baselines", baselines, grid ? "Baseline counts, e.g. 1,3" : "Number of baselines");
    app->add_option("--cap", cap, "Candidate cap for bound-driven search");
    app->add_option("--geometry", geometry, "CSV of sat_id,ux,uy,uz line-of-sight vectors");
    app->add_option("--strategy", strategy, "Search strategy: shrink or expand");
    app->add_flag("--serial", serial, "Run the serial reference path (no OpenMP)");
  }

  CampaignConfig base() const {
    CampaignConfig c;
    if (!config.empty()) c = config_from_json(read_json_file(config));
    if (seed) c.seed = *seed;
    if (trials) c.n_trials = *trials;
    if (!methods.empty()) c.methods = parse_methods(methods);
    if (cap) c.candidate_cap = *cap;
    if (!geometry.empty()) c.geometry_file = geometry;
    if (!strategy.empty()) {
      auto s = parse_strategy(strategy);
      if (!s) throw UsageError("--strategy: expected shrink or expand");
      c.search_strategy = *s;
    }
    return c;
  }
};

void print_summary(const CampaignResult& r, std::ostream& os) {
  std::fprintf(stdout, "%-12s %8s %12s %12s %14s %14s\n", "method", "success", "candidates",
               "manifold", "rmse_ls", "rmse_rm");
  for (const MethodSummary& s : r.summaries)
    std::fprintf(stdout, "%-12s %8.4f %12.3f %12.3f %14.6g %14.6g\n",
                 std::string(to_string(s.method)).c_str(), s.success_rate, s.mean_candidates,
                 s.mean_manifold_solves, s.float_rmse_ls, s.float_rmse_rm);
  os << "trials: " << r.config.n_trials << ", degenerate geometries resampled: " << r.resamples
     << ", truncated searches: " << r.truncated << "\n";
}

int cmd_simulate(const CampaignFlags& f, const std::string& out, const std::string& obs_out) {
  CampaignConfig c = f.base();
  if (!f.sats.empty()) c.n_satellites = parse_int_list(f.sats, "--sats").front();
  if (!f.sigma_mm.empty()) c.sigma_phase_mm = parse_real_list(f.sigma_mm, "--sigma-mm").front();
  if (!f.baselines.empty()) c.n_baselines = parse_int_list(f.baselines, "--baselines").front();
  c.n_trials = 1;
  c.validate();
  const Matrix geometry = load_campaign_geometry(c);
  Rng rng = make_rng({c.seed, 0, 0, 1});
  Scenario s = sample_scenario(c.scenario_spec(), rng, geometry);
  const std::string text = scenario_to_json(s).dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text_file(out, text);
  if (!obs_out.empty()) {
    const ObservationSet obs = simulate_observations(s, derive_seed({c.seed, 0, 0, 2}));
    write_text_file(obs_out, observations_to_json(obs).dump(2) + "\n");
  }
  return 0;
}

int cmd_solve(const CampaignFlags& f, const std::string& input, const std::string& out) {
  const ObservationSet obs = observations_from_json(read_json_file(input));
  std::vector<Method> methods(std::begin(kAllMethods), std::end(kAllMethods));
  if (!f.methods.empty()) methods = parse_methods(f.methods);
  SearchOptions opts;
  opts.parallel = !f.serial;
  if (f.cap) opts.cap = *f.cap;
  if (!f.strategy.empty()) {
    auto s = parse_strategy(f.strategy);
    if (!s) throw UsageError("--strategy: expected shrink or expand");
    opts.strategy = *s;
  }
  const FloatSolutionUC uc = solve_float_uc(obs);
  const CostContext ctx = make_cost_context(solve_float_ac(obs, obs.body_baselines()));
  Json reports = Json::array();
  for (Method m : methods) {
    SolverReport rep;
    switch (m) {
      case Method::UC_ILS: rep = solve_uc_ils(uc, obs); break;
      case Method::AC_ILS: rep = solve_ac_ils(ctx.fs, obs); break;
      case Method::RIEMOCAD_LF: rep = solve_riemocad_lf(ctx, obs); break;
      case Method::MC_LAMBDA: rep = solve_mc_lambda(ctx, obs, opts); break;
      case Method::RIEMOCAD_TF: rep = solve_riemocad_tf(ctx, obs, opts); break;
    }
    reports.push_back(report_to_json(rep));
  }
  const std::string text = reports.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text_file(out, text);
  return 0;
}

int cmd_bench(const CampaignFlags& f, const std::string& out) {
  CampaignConfig c = f.base();
  if (!f.sats.empty()) c.n_satellites = parse_int_list(f.sats, "--sats").front();
  if (!f.sigma_mm.empty()) c.sigma_phase_mm = parse_real_list(f.sigma_mm, "--sigma-mm").front();
  if (!f.baselines.empty()) c.n_baselines = parse_int_list(f.baselines, "--baselines").front();
  c.validate();
  const CampaignResult r = run_campaign(c, !f.serial);
  const std::filesystem::path dir = out.empty() ? std::filesystem::path("results") : std::filesystem::path(out);
  write_text_file(dir / "trials.csv", trials_csv(r.rows));
  write_text_file(dir / "summary.json", summary_to_json(r).dump(2) + "\n");
  print_summary(r, std::cout);
  std::cout << "wrote " << (dir / "trials.csv").string() << " and "
            << (dir / "summary.json").string() << "\n";
  return 0;
}

int cmd_sweep(const CampaignFlags& f, const std::string& out) {
  CampaignConfig base = f.base();
  const std::vector<int> sats =
      f.sats.empty() ? std::vector<int>{base.n_satellites} : parse_int_list(f.sats, "--sats");
  const std::vector<double> sigmas = f.sigma_mm.empty()
                                         ? std::vector<double>{base.sigma_phase_mm}
                                         : parse_real_list(f.sigma_mm, "--sigma-mm");
  const std::vector<int> baselines = f.baselines.empty()
                                         ? std::vector<int>{base.n_baselines}
                                         : parse_int_list(f.baselines, "--baselines");
  std::string csv =
      "n_satellites,sigma_phase_mm,n_baselines,method,n_trials,success_rate,mean_candidates,"
      "mean_manifold_solves,float_rmse_ls,float_rmse_rm\n";
  for (int a : baselines) {
    for (double sigma : sigmas) {
      for (int s : sats) {
        CampaignConfig c = base;
        c.n_satellites = s;
        c.sigma_phase_mm = sigma;
        c.n_baselines = a;
        c.validate();
        const CampaignResult r = run_campaign(c, !f.serial);
        for (const MethodSummary& m : r.summaries) {
          csv += std::to_string(s) + "," + format_double(sigma) + "," + std::to_string(a) + "," +
                 std::string(to_string(m.method)) + "," + std::to_string(m.n_trials) + "," +
                 format_double(m.success_rate) + "," + format_double(m.mean_candidates) + "," +
                 format_double(m.mean_manifold_solves) + "," + format_double(m.float_rmse_ls) +
                 "," + format_double(m.float_rmse_rm) + "\n";
        }
        std::cerr << "cell sats=" << s << " sigma_mm=" << sigma << " baselines=" << a
                  << " done (resampled " << r.resamples << ")\n";
      }
    }
  }
  if (out.empty())
    std::cout << csv;
  else
    write_text_file(out, csv);
  return 0;
}

int cmd_verify(int seeds, std::uint64_t seed) {
  if (seeds < 1) throw UsageError("--seeds must be >= 1");
  bool ok = true;
  for (const CheckResult& c : run_verification(seeds, seed)) {
    std::printf("[%s] %s (worst %.3g, tolerance %.3g)\n", c.passed ? "PASS" : "FAIL",
                c.name.c_str(), c.worst, c.tolerance);
    ok = ok && c.passed;
  }
  return ok ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attitude-constrained GNSS ambiguity resolution on the Stiefel manifold"};
  app.require_subcommand(1);

  CampaignFlags sim_flags, solve_flags, bench_flags, sweep_flags;
  std::string sim_out, sim_obs_out, solve_input, solve_out, bench_out, sweep_out;
  int verify_seeds = 100;
  std::uint64_t verify_seed = 7;

  auto* sim = app.add_subcommand("simulate", "Sample a scenario and write it as JSON");
  sim_flags.add_to(sim, false);
  sim->add_option("--out", sim_out, "Scenario JSON path (stdout if omitted)");
  sim->add_option("--obs-out", sim_obs_out, "Also write simulated observations to this path");

  auto* solve = app.add_subcommand("solve", "Solve one ObservationSet JSON");
  solve->add_option("input", solve_input, "ObservationSet JSON")->required();
  solve->add_option("--out", solve_out, "Report JSON path (stdout if omitted)");
  solve->add_option("--methods", solve_flags.methods, "Comma list of methods");
  solve->add_option("--cap", solve_flags.cap, "Candidate cap");
  solve->add_option("--strategy", solve_flags.strategy, "shrink or expand");
  solve->add_flag("--serial", solve_flags.serial, "Serial candidate evaluation");

  auto* bench = app.add_subcommand("bench", "Run a Monte-Carlo campaign");
  bench_flags.add_to(bench, false);
  bench->add_option("--out", bench_out, "Output directory for trials.csv and summary.json");

  auto* sweep = app.add_subcommand("sweep", "Run a campaign per grid cell");
  sweep_flags.add_to(sweep, true);
  sweep->add_option("--out", sweep_out, "CSV path (stdout if omitted)");

  auto* verify = app.add_subcommand("verify", "Run property checks on random instances");
  verify->add_option("--seeds", verify_seeds, "Number of random instances");
  verify->add_option("--seed", verify_seed, "Base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*sim) return cmd_simulate(sim_flags, sim_out, sim_obs_out);
    if (*solve) return cmd_solve(solve_flags, solve_input, solve_out);
    if (*bench) return cmd_bench(bench_flags, bench_out);
    if (*sweep) return cmd_sweep(sweep_flags, sweep_out);
    if (*verify) return cmd_verify(verify_seeds, verify_seed);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DegenerateGeometry& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
