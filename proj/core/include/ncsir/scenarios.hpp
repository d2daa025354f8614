#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ncsir/model.hpp"
#include "ncsir/solver.hpp"

namespace ncsir {

enum class ScenarioId { S1, S2, S3 };

std::string_view to_string(ScenarioId id);
/// Accepts "S1".."S3" (case-insensitive) or "1".."3"; throws InvalidArgument otherwise.
ScenarioId parse_scenario_id(std::string_view text);

struct ScenarioConfig {
  ModelParams params;
  CostWeights weights;
  State x0;
  Grid grid{100.0, 0.1};
  FbsSettings fbs;
  ControlMask mask;
  std::string label;

  void validate() const;
};

/// Overridable knobs of a builtin scenario.
struct ScenarioOverrides {
  std::optional<double> c1;
  std::optional<double> c2;
  std::optional<double> xi;
  std::optional<ControlMask> mask;
};

/// The three builtin parameter sets, all on T = 100, dt = 0.1 from
/// x0 = (0.69, 0.01, 0, 0.29, 0.01, 0).
ScenarioConfig builtin_scenario(ScenarioId id, const ScenarioOverrides& overrides = {});

/// Applies a named override ("c1", "c2", "xi", "mask_alpha", "mask_eta", "mask_mu",
/// "mask_nu"; mask values are nonzero for masked). Throws UnknownOverride for anything else.
void apply_override(ScenarioConfig& cfg, std::string_view key, double value);

struct ScenarioReport {
  std::string label;
  double cost_uncontrolled = 0.0;
  double cost_optimal = 0.0;
  /// (J0 - J*) / J0, or 0 when J0 = 0.
  double relative_reduction = 0.0;
  std::vector<double> r0_series;
  Trajectory<State> uncontrolled_state;
  FbsResult optimal;
};

ScenarioReport run_scenario(const ScenarioConfig& cfg);

/// Regime-dependent reproductive ratio along a control path: R0(b/delta, 0) while
/// b/delta < (nu+delta)/(mu_bar-mu), otherwise R0 at the mixed DFE.
std::vector<double> r0_timeseries(const Trajectory<State>& state, const Trajectory<ControlVec>& control,
                                  const ModelParams& p);

enum class SweepKnob { c1, c2, xi };

std::string_view to_string(SweepKnob knob);
SweepKnob parse_sweep_knob(std::string_view text);

/// One independent solve per value, returned in input order. `jobs` > 1 runs solves on
/// that many threads.
std::vector<ScenarioReport> sweep(const ScenarioConfig& base, SweepKnob knob, std::span<const double> values,
                                  unsigned jobs = 1);

}  // namespace ncsir
