#include "riemocad/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace riemocad {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ParseError("field '" + field + "': " + what);
}

const Json& member(const Json& j, const std::string& key) {
  if (!j.is_object()) fail(key, "enclosing value is not an object");
  auto it = j.find(key);
  if (it == j.end()) fail(key, "missing");
  return *it;
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

std::int64_t integer(const Json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<std::int64_t>();
}

template <typename M, typename Get>
M nested_from_json(const Json& j, const std::string& field, Get get) {
  if (!j.is_array() || j.empty()) fail(field, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) fail(field, "expected rows to be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  M m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      fail(field, "rows must all have " + std::to_string(cols) + " entries");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = get(row[static_cast<std::size_t>(k)], field);
  }
  return m;
}

template <typename M>
Json nested_to_json(const M& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

Json matrix_to_json(const Matrix& m) { return nested_to_json(m); }
Json matrix_to_json(const IntMatrix& m) { return nested_to_json(m); }

Matrix matrix_from_json(const Json& j, const std::string& field) {
  return nested_from_json<Matrix>(j, field, number);
}

IntMatrix int_matrix_from_json(const Json& j, const std::string& field) {
  return nested_from_json<IntMatrix>(j, field, integer);
}

Json scenario_to_json(const Scenario& s) {
  return {{"los", matrix_to_json(s.los)},
          {"wavelength_m", s.wavelength},
          {"body_baselines_m", matrix_to_json(s.body_baselines)},
          {"true_rotation", matrix_to_json(s.true_rotation)},
          {"true_ambiguities", matrix_to_json(s.true_ambiguities)},
          {"sigma_phase_m", s.sigma_phase},
          {"sigma_code_m", s.sigma_code}};
}

Scenario scenario_from_json(const Json& j) {
  Scenario s;
  s.los = matrix_from_json(member(j, "los"), "los");
  s.wavelength = number(member(j, "wavelength_m"), "wavelength_m");
  s.body_baselines = matrix_from_json(member(j, "body_baselines_m"), "body_baselines_m");
  s.true_rotation = matrix_from_json(member(j, "true_rotation"), "true_rotation");
  s.true_ambiguities = int_matrix_from_json(member(j, "true_ambiguities"), "true_ambiguities");
  s.sigma_phase = number(member(j, "sigma_phase_m"), "sigma_phase_m");
  s.sigma_code = number(member(j, "sigma_code_m"), "sigma_code_m");
  return s;
}

Json observations_to_json(const ObservationSet& obs) {
  return {{"y", matrix_to_json(obs.y())},
          {"design_geometry", matrix_to_json(obs.design_geometry())},
          {"design_ambiguity", matrix_to_json(obs.design_ambiguity())},
          {"cov_yy", matrix_to_json(obs.cov_yy())},
          {"n_sat_dd", obs.n_sat_dd()},
          {"n_baselines", obs.n_baselines()},
          {"body_baselines", matrix_to_json(obs.body_baselines())}};
}

ObservationSet observations_from_json(const Json& j) {
  Matrix y = matrix_from_json(member(j, "y"), "y");
  Matrix a = matrix_from_json(member(j, "design_geometry"), "design_geometry");
  Matrix b = matrix_from_json(member(j, "design_ambiguity"), "design_ambiguity");
  Matrix cov = matrix_from_json(member(j, "cov_yy"), "cov_yy");
  Matrix xb = matrix_from_json(member(j, "body_baselines"), "body_baselines");
  if (j.contains("n_sat_dd") && integer(j["n_sat_dd"], "n_sat_dd") != b.cols())
    fail("n_sat_dd", "does not match design_ambiguity");
  if (j.contains("n_baselines") && integer(j["n_baselines"], "n_baselines") != y.cols())
    fail("n_baselines", "does not match y");
  try {
    return ObservationSet(std::move(y), std::move(a), std::move(b), std::move(cov), std::move(xb));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

Json report_to_json(const SolverReport& r) {
  return {{"method", std::string(to_string(r.method))},
          {"n_fixed", matrix_to_json(r.n_fixed)},
          {"r_fixed", matrix_to_json(r.r_fixed)},
          {"objective", r.objective},
          {"candidates_evaluated", r.candidates_evaluated},
          {"manifold_solves", r.manifold_solves},
          {"truncated", r.truncated},
          {"wall_time_us", std::chrono::duration<double, std::micro>(r.wall_time).count()}};
}

Json config_to_json(const CampaignConfig& c) {
  Json methods = Json::array();
  for (Method m : c.methods) methods.push_back(std::string(to_string(m)));
  Json j = {{"n_trials", c.n_trials},
            {"n_satellites", c.n_satellites},
            {"n_baselines", c.n_baselines},
            {"sigma_phase_mm", c.sigma_phase_mm},
            {"sigma_code_over_phase", c.sigma_code_over_phase},
            {"wavelength_m", c.wavelength_m},
            {"methods", methods},
            {"candidate_cap", c.candidate_cap},
            {"seed", c.seed},
            {"search_strategy", std::string(to_string(c.search_strategy))},
            {"record_wall_time", c.record_wall_time}};
  j["geometry_file"] = c.geometry_file ? Json(*c.geometry_file) : Json(nullptr);
  return j;
}

CampaignConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  static const std::set<std::string> known = {
      "n_trials",      "n_satellites", "n_baselines", "sigma_phase_mm",  "sigma_code_over_phase",
      "wavelength_m",  "methods",      "candidate_cap", "seed",          "geometry_file",
      "search_strategy", "record_wall_time"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) fail(key, "unknown config field");

  CampaignConfig c;
  auto get_int = [&](const char* key, auto& out) {
    if (j.contains(key)) out = static_cast<std::decay_t<decltype(out)>>(integer(j[key], key));
  };
  auto get_real = [&](const char* key, double& out) {
    if (j.contains(key)) out = number(j[key], key);
  };
  get_int("n_trials", c.n_trials);
  get_int("n_satellites", c.n_satellites);
  get_int("n_baselines", c.n_baselines);
  get_real("sigma_phase_mm", c.sigma_phase_mm);
  get_real("sigma_code_over_phase", c.sigma_code_over_phase);
  get_real("wavelength_m", c.wavelength_m);
  get_int("candidate_cap", c.candidate_cap);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("methods")) {
    const Json& ms = j["methods"];
    if (!ms.is_array()) fail("methods", "expected an array of method names");
    c.methods.clear();
    for (const Json& m : ms) {
      if (!m.is_string()) fail("methods", "expected method names as strings");
      auto parsed = parse_method(m.get<std::string>());
      if (!parsed) fail("methods", "unknown method '" + m.get<std::string>() + "'");
      c.methods.push_back(*parsed);
    }
  }
  if (j.contains("geometry_file") && !j["geometry_file"].is_null()) {
    if (!j["geometry_file"].is_string()) fail("geometry_file", "expected a path string");
    c.geometry_file = j["geometry_file"].get<std::string>();
  }
  if (j.contains("search_strategy")) {
    if (!j["search_strategy"].is_string()) fail("search_strategy", "expected a string");
    auto s = parse_strategy(j["search_strategy"].get<std::string>());
    if (!s) fail("search_strategy", "expected 'shrink' or 'expand'");
    c.search_strategy = *s;
  }
  if (j.contains("record_wall_time")) {
    if (!j["record_wall_time"].is_boolean()) fail("record_wall_time", "expected a boolean");
    c.record_wall_time = j["record_wall_time"].get<bool>();
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return c;
}

Json summary_to_json(const CampaignResult& r) {
  Json methods = Json::object();
  for (const MethodSummary& s : r.summaries) {
    methods[std::string(to_string(s.method))] = {
        {"n_trials", s.n_trials},
        {"success_rate", s.success_rate},
        {"mean_candidates", s.mean_candidates},
        {"mean_manifold_solves", s.mean_manifold_solves},
        {"float_rmse_ls", s.float_rmse_ls},
        {"float_rmse_rm", s.float_rmse_rm},
        {"mean_wall_time_us", s.mean_wall_time_us}};
  }
  return {{"config", config_to_json(r.config)}, {"methods", methods}};
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trials_csv(const std::vector<TrialRow>& rows) {
  std::string out = kTrialsHeader;
  out += '\n';
  for (const TrialRow& r : rows) {
    out += std::to_string(r.trial);
    out += ',';
    out += to_string(r.method);
    out += r.success ? ",1," : ",0,";
    out += std::to_string(r.candidates);
    out += ',';
    out += std::to_string(r.manifold_solves);
    out += ',';
    out += format_double(r.objective);
    out += ',';
    out += format_double(r.float_rmse_ls);
    out += ',';
    out += format_double(r.float_rmse_rm);
    out += ',';
    out += format_double(r.wall_time_us);
    out += '\n';
  }
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() +
                                   ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace riemocad
