#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "riemocad/harness.hpp"

namespace riemocad {

using Json = nlohmann::json;

/// Malformed JSON document or field; the message names the field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json matrix_to_json(const Matrix& m);
Json matrix_to_json(const IntMatrix& m);
Matrix matrix_from_json(const Json& j, const std::string& field);
IntMatrix int_matrix_from_json(const Json& j, const std::string& field);

Json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j);

Json observations_to_json(const ObservationSet& obs);
ObservationSet observations_from_json(const Json& j);

Json report_to_json(const SolverReport& r);

Json config_to_json(const CampaignConfig& c);
/// Keys are the CampaignConfig field names; unknown keys are rejected.
CampaignConfig config_from_json(const Json& j);

Json summary_to_json(const CampaignResult& r);

inline constexpr const char* kTrialsHeader =
    "trial,method,success,candidates,manifold_solves,objective,float_rmse_ls,float_rmse_rm,"
    "wall_time_us";

/// trials.csv contents: header plus one row per (trial, method).
std::string trials_csv(const std::vector<TrialRow>& rows);

/// Number formatting used in every CSV: shortest exact (%.17g).
std::string format_double(double v);

Json read_json_file(const std::filesystem::path& path);
/// Writes text, creating parent directories; errors name the path.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace riemocad
