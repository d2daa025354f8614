#include "ncsir/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <mutex>
#include <thread>

#include "ncsir/analysis.hpp"
#include "ncsir/error.hpp"

namespace ncsir {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string format_value(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

void set_knob(ScenarioConfig& cfg, SweepKnob knob, double value) {
  switch (knob) {
    case SweepKnob::c1:
      if (!(value >= 0.0)) throw InvalidArgument("c1 must be nonnegative");
      cfg.weights.c1 = value;
      break;
    case SweepKnob::c2:
      if (!(value >= 0.0)) throw InvalidArgument("c2 must be nonnegative");
      cfg.weights.c2 = value;
      break;
    case SweepKnob::xi:
      if (!(value >= 0.0 && value <= 1.0)) throw InvalidArgument("xi must lie in [0, 1]");
      cfg.params.xi = value;
      break;
  }
}

}  // namespace

std::string_view to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::S1: return "S1";
    case ScenarioId::S2: return "S2";
    case ScenarioId::S3: return "S3";
  }
  return "?";
}

ScenarioId parse_scenario_id(std::string_view text) {
  const std::string t = lower(text);
  if (t == "s1" || t == "1") return ScenarioId::S1;
  if (t == "s2" || t == "2") return ScenarioId::S2;
  if (t == "s3" || t == "3") return ScenarioId::S3;
  throw InvalidArgument("unknown scenario id '" + std::string(text) + "'");
}

std::string_view to_string(SweepKnob knob) {
  switch (knob) {
    case SweepKnob::c1: return "c1";
    case SweepKnob::c2: return "c2";
    case SweepKnob::xi: return "xi";
  }
  return "?";
}

SweepKnob parse_sweep_knob(std::string_view text) {
  const std::string t = lower(text);
  if (t == "c1") return SweepKnob::c1;
  if (t == "c2") return SweepKnob::c2;
  if (t == "xi") return SweepKnob::xi;
  throw InvalidArgument("unknown sweep knob '" + std::string(text) + "'");
}

void ScenarioConfig::validate() const {
  params.validate();
  weights.validate();
  fbs.validate();
  x0.validate();
  if (x0.total() > params.capacity() * (1.0 + 1e-12)) {
    throw InvalidArgument("x0 total exceeds b/delta");
  }
}

ScenarioConfig builtin_scenario(ScenarioId id, const ScenarioOverrides& overrides) {
  ScenarioConfig cfg;
  cfg.params = {.b = 0.01, .delta = 0.01, .beta = 0.4, .gamma = 0.2, .eta_bar = 0.1, .xi = 0.0, .mu_bar = 0.1,
                .nu_bar = 0.1};
  cfg.weights = {.c1 = 1.0, .c2 = 0.1, .c3 = 1.0, .c4 = 1.0, .c5 = 1.0, .c6 = 1.0};
  cfg.x0 = {0.69, 0.01, 0.0, 0.29, 0.01, 0.0};
  switch (id) {
    case ScenarioId::S1:
      break;
    case ScenarioId::S2:
      cfg.params.beta = 0.6;
      cfg.params.xi = 0.3;
      cfg.params.mu_bar = 0.2;
      cfg.weights.c2 = 0.01;
      break;
    case ScenarioId::S3:
      cfg.params.mu_bar = 0.5;
      break;
  }
  if (overrides.c1) set_knob(cfg, SweepKnob::c1, *overrides.c1);
  if (overrides.c2) set_knob(cfg, SweepKnob::c2, *overrides.c2);
  if (overrides.xi) set_knob(cfg, SweepKnob::xi, *overrides.xi);
  if (overrides.mask) cfg.mask = *overrides.mask;

  cfg.label = std::string(to_string(id));
  if (overrides.c1) cfg.label += " c1=" + format_value(*overrides.c1);
  if (overrides.c2) cfg.label += " c2=" + format_value(*overrides.c2);
  if (overrides.xi) cfg.label += " xi=" + format_value(*overrides.xi);
  if (overrides.mask) {
    const auto m = overrides.mask->to_array();
    static constexpr const char* names[] = {"alpha", "eta", "mu", "nu"};
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i]) cfg.label += std::string(" no-") + names[i];
    }
  }
  cfg.validate();
  return cfg;
}

void apply_override(ScenarioConfig& cfg, std::string_view key, double value) {
  const std::string k = lower(key);
  if (k == "c1") {
    set_knob(cfg, SweepKnob::c1, value);
  } else if (k == "c2") {
    set_knob(cfg, SweepKnob::c2, value);
  } else if (k == "xi") {
    set_knob(cfg, SweepKnob::xi, value);
  } else if (k == "mask_alpha") {
    cfg.mask.alpha = value != 0.0;
  } else if (k == "mask_eta") {
    cfg.mask.eta = value != 0.0;
  } else if (k == "mask_mu") {
    cfg.mask.mu = value != 0.0;
  } else if (k == "mask_nu") {
    cfg.mask.nu = value != 0.0;
  } else {
    throw UnknownOverride("unknown scenario override '" + std::string(key) + "'");
  }
}

std::vector<double> r0_timeseries(const Trajectory<State>& state, const Trajectory<ControlVec>& control,
                                  const ModelParams& p) {
  if (!(state.grid == control.grid)) throw InvalidArgument("r0_timeseries: trajectories are not aligned");
  std::vector<double> out;
  out.reserve(control.size());
  const double k = p.capacity();
  for (const ControlVec& u : control.values) {
    const double threshold = mixing_threshold(p, u);
    if (k < threshold) {
      out.push_back(reproductive_ratio(k, 0.0, p, u));
    } else {
      out.push_back(reproductive_ratio(threshold, k - threshold, p, u));
    }
  }
  return out;
}

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const Trajectory<ControlVec> zero(cfg.grid);
  ScenarioReport report{cfg.label, 0.0, 0.0, 0.0, {}, integrate_forward(cfg.x0, zero, cfg.params),
                        fbs_solve(cfg.x0, cfg.params, cfg.weights, cfg.grid, cfg.fbs, cfg.mask)};
  report.cost_uncontrolled = total_cost(report.uncontrolled_state, zero, cfg.weights);
  report.cost_optimal = report.optimal.total_cost;
  if (report.cost_uncontrolled > 0.0) {
    report.relative_reduction = (report.cost_uncontrolled - report.cost_optimal) / report.cost_uncontrolled;
  }
  report.r0_series = r0_timeseries(report.optimal.state, report.optimal.control, cfg.params);
  return report;
}

std::vector<ScenarioReport> sweep(const ScenarioConfig& base, SweepKnob knob, std::span<const double> values,
                                  unsigned jobs) {
  std::vector<ScenarioConfig> configs;
  configs.reserve(values.size());
  for (double v : values) {
    ScenarioConfig cfg = base;
    set_knob(cfg, knob, v);
    cfg.label = base.label + " " + std::string(to_string(knob)) + "=" + format_value(v);
    configs.push_back(std::move(cfg));
  }

  std::vector<std::optional<ScenarioReport>> slots(configs.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) slots[i] = run_scenario(configs[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
          try {
            slots[i] = run_scenario(configs[i]);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<ScenarioReport> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace ncsir
