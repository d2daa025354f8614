#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ncsir/ncsir.hpp"

namespace ncsir::cli {

/// Exit codes of the ncsir tool.
enum ExitCode : int { kOk = 0, kUsageError = 1, kSolverError = 2 };

/// Configuration decoding failure; `path` names the offending field, e.g. "params.beta".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct OutputSpec {
  std::string dir = ".";
  std::string prefix = "run";

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

/// Everything a single run needs, decoded from one JSON document.
struct RunConfig {
  ModelParams params;
  CostWeights weights;
  State x0;
  double t_final = 100.0;
  double dt = 0.1;
  double kappa = 0.2;
  double tol = 1e-3;
  int max_iter = 500;
  ControlVec u_init;
  ControlMask mask;
  /// Constant control used by simulate and analyze.
  ControlVec control;
  /// When set, analyze must be able to classify this DFE kind or it fails with exit 1.
  std::optional<DfeKind> analyze_dfe;
  OutputSpec output;

  Grid grid() const { return Grid(t_final, dt); }
  FbsSettings fbs_settings() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig decode_run_config(const nlohmann::json& doc);
nlohmann::json encode_run_config(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_scenario(const ScenarioConfig& sc);

inline const char* const kCsvHeader =
    "t,S,I,R,S_star,I_star,R_star,alpha,eta,mu,nu,p_S,p_I,p_R,p_Sstar,p_Istar,p_Rstar,r0_regime";

/// One row per grid node, values with 17 significant digits; costate columns are left
/// blank when `costate` is null.
void write_trajectory_csv(std::ostream& os, const Trajectory<State>& state, const Trajectory<ControlVec>& control,
                          const Trajectory<CostateVec>* costate, std::span<const double> r0);

nlohmann::json analysis_json(const ModelParams& p, const ControlVec& u, std::optional<DfeKind> required);
nlohmann::json report_json(const ScenarioReport& r);

/// Entry point shared by the executable and the tests; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ncsir::cli
