#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"

namespace ncsir::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json* member(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "$" : path, "expected an object");
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!keys.count(it.key())) throw ConfigError(join(path, it.key()), "unknown field");
  }
}

double number(const json& obj, const std::string& path, const char* key, std::optional<double> fallback = {}) {
  const json* v = member(obj, key);
  const std::string where = join(path, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(where, "missing required field");
  }
  if (!v->is_number()) throw ConfigError(where, "expected a number");
  const double d = v->get<double>();
  if (!std::isfinite(d)) throw ConfigError(where, "expected a finite number");
  return d;
}

int integer(const json& obj, const std::string& path, const char* key, int fallback) {
  const json* v = member(obj, key);
  const std::string where = join(path, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ConfigError(where, "expected an integer");
  return v->get<int>();
}

bool boolean(const json& obj, const std::string& path, const char* key, bool fallback) {
  const json* v = member(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return v->get<bool>();
}

std::string text(const json& obj, const std::string& path, const char* key, const std::string& fallback) {
  const json* v = member(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError(join(path, key), "expected a string");
  return v->get<std::string>();
}

const json& section(const json& root, const char* key, bool required, const json& empty) {
  const json* v = member(root, key);
  if (!v) {
    if (required) throw ConfigError(key, "missing required section");
    return empty;
  }
  expect_object(*v, key);
  return *v;
}

ControlVec decode_control(const json& obj, const std::string& path) {
  reject_unknown(obj, path, {"alpha", "eta", "mu", "nu"});
  return {number(obj, path, "alpha", 0.0), number(obj, path, "eta", 0.0), number(obj, path, "mu", 0.0),
          number(obj, path, "nu", 0.0)};
}

json encode_control(const ControlVec& u) { return {{"alpha", u.alpha}, {"eta", u.eta}, {"mu", u.mu}, {"nu", u.nu}}; }

DfeKind parse_dfe_kind(const std::string& s, const std::string& path) {
  for (DfeKind k : {DfeKind::ComplianceOnly, DfeKind::MixedXiZero, DfeKind::MixedXiPositive}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError(path, "expected one of ComplianceOnly, MixedXiZero, MixedXiPositive");
}

template <class F>
void checked(const std::string& path, F&& check) {
  try {
    check();
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open output file " + path.string());
  return os;
}

void write_json(const fs::path& path, const json& j) {
  auto os = open_output(path);
  os << j.dump(2) << '\n';
}

void write_csv(const fs::path& path, const Trajectory<State>& x, const Trajectory<ControlVec>& u,
               const Trajectory<CostateVec>* pc, const ModelParams& p) {
  auto os = open_output(path);
  write_trajectory_csv(os, x, u, pc, r0_timeseries(x, u, p));
}

json summary_json(double j0, const FbsResult& r) {
  const double reduction = j0 > 0.0 ? (j0 - r.total_cost) / j0 : 0.0;
  return {{"cost_uncontrolled", j0},
          {"cost_optimal", r.total_cost},
          {"relative_reduction", reduction},
          {"iterations", r.iterations},
          {"converged", r.converged}};
}

double parse_value(const std::string& token) {
  const auto slash = token.find('/');
  std::size_t used = 0;
  try {
    if (slash == std::string::npos) {
      const double v = std::stod(token, &used);
      if (used == token.size()) return v;
    } else {
      const std::string num = token.substr(0, slash), den = token.substr(slash + 1);
      std::size_t used_den = 0;
      const double a = std::stod(num, &used);
      const double b = std::stod(den, &used_den);
      if (used == num.size() && used_den == den.size() && b != 0.0) return a / b;
    }
  } catch (const std::exception&) {
  }
  throw InvalidArgument("cannot parse value '" + token + "'");
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(parse_value(token));
  }
  return out;
}

struct ScenarioFlags {
  std::optional<double> c1, c2, xi;
  bool mask_alpha = false, mask_eta = false, mask_mu = false, mask_nu = false;

  void attach(CLI::App* app) {
    app->add_option("--c1", c1, "Infection cost weight");
    app->add_option("--c2", c2, "Noncompliance cost weight");
    app->add_option("--xi", xi, "Noncompliant fraction of new population");
    app->add_flag("--mask-alpha", mask_alpha, "Force alpha = 0");
    app->add_flag("--mask-eta", mask_eta, "Force eta = 0");
    app->add_flag("--mask-mu", mask_mu, "Force mu = 0");
    app->add_flag("--mask-nu", mask_nu, "Force nu = 0");
  }

  ScenarioOverrides overrides() const {
    ScenarioOverrides o{c1, c2, xi, std::nullopt};
    if (mask_alpha || mask_eta || mask_mu || mask_nu) o.mask = ControlMask{mask_alpha, mask_eta, mask_mu, mask_nu};
    return o;
  }
};

void dump_config(const RunConfig& cfg, const std::string& target, std::ostream& out) {
  const json doc = encode_run_config(cfg);
  if (target == "-") {
    out << doc.dump(2) << '\n';
  } else {
    write_json(target, doc);
  }
}

}  // namespace

FbsSettings RunConfig::fbs_settings() const {
  FbsSettings s;
  s.kappa = kappa;
  s.tol = tol;
  s.max_iter = max_iter;
  if (!(u_init == ControlVec{})) s.u_init = Trajectory<ControlVec>(grid(), u_init);
  return s;
}

RunConfig decode_run_config(const json& doc) {
  expect_object(doc, "");
  reject_unknown(doc, "", {"params", "weights", "x0", "grid", "fbs", "mask", "control", "analyze", "output"});
  const json empty = json::object();
  RunConfig cfg;

  const json& p = section(doc, "params", true, empty);
  reject_unknown(p, "params", {"b", "delta", "beta", "gamma", "eta_bar", "xi", "mu_bar", "nu_bar"});
  cfg.params = {number(p, "params", "b"),       number(p, "params", "delta"),  number(p, "params", "beta"),
                number(p, "params", "gamma"),   number(p, "params", "eta_bar"), number(p, "params", "xi"),
                number(p, "params", "mu_bar"),  number(p, "params", "nu_bar")};

  const json& w = section(doc, "weights", true, empty);
  reject_unknown(w, "weights", {"c1", "c2", "c3", "c4", "c5", "c6"});
  cfg.weights = {number(w, "weights", "c1"),      number(w, "weights", "c2"),
                 number(w, "weights", "c3", 1.0), number(w, "weights", "c4", 1.0),
                 number(w, "weights", "c5", 1.0), number(w, "weights", "c6", 1.0)};

  const json& x = section(doc, "x0", true, empty);
  reject_unknown(x, "x0", {"S", "I", "R", "S_star", "I_star", "R_star"});
  cfg.x0 = {number(x, "x0", "S"),      number(x, "x0", "I"),      number(x, "x0", "R"),
            number(x, "x0", "S_star"), number(x, "x0", "I_star"), number(x, "x0", "R_star")};

  const json& g = section(doc, "grid", false, empty);
  reject_unknown(g, "grid", {"t_final", "dt"});
  cfg.t_final = number(g, "grid", "t_final", 100.0);
  cfg.dt = number(g, "grid", "dt", 0.1);

  const json& f = section(doc, "fbs", false, empty);
  reject_unknown(f, "fbs", {"kappa", "tol", "max_iter", "u_init"});
  cfg.kappa = number(f, "fbs", "kappa", 0.2);
  cfg.tol = number(f, "fbs", "tol", 1e-3);
  cfg.max_iter = integer(f, "fbs", "max_iter", 500);
  if (const json* ui = member(f, "u_init")) {
    expect_object(*ui, "fbs.u_init");
    cfg.u_init = decode_control(*ui, "fbs.u_init");
  }

  const json& m = section(doc, "mask", false, empty);
  reject_unknown(m, "mask", {"alpha", "eta", "mu", "nu"});
  cfg.mask = {boolean(m, "mask", "alpha", false), boolean(m, "mask", "eta", false), boolean(m, "mask", "mu", false),
              boolean(m, "mask", "nu", false)};

  cfg.control = decode_control(section(doc, "control", false, empty), "control");

  const json& a = section(doc, "analyze", false, empty);
  reject_unknown(a, "analyze", {"dfe"});
  if (member(a, "dfe")) cfg.analyze_dfe = parse_dfe_kind(text(a, "analyze", "dfe", ""), "analyze.dfe");

  const json& o = section(doc, "output", false, empty);
  reject_unknown(o, "output", {"dir", "prefix"});
  cfg.output = {text(o, "output", "dir", "."), text(o, "output", "prefix", "run")};
  if (cfg.output.prefix.empty()) throw ConfigError("output.prefix", "must not be empty");

  checked("params", [&] { cfg.params.validate(); });
  checked("weights", [&] { cfg.weights.validate(); });
  checked("x0", [&] {
    cfg.x0.validate();
    if (cfg.x0.total() > cfg.params.capacity() * (1.0 + 1e-12)) throw InvalidArgument("total exceeds b/delta");
  });
  checked("grid", [&] { (void)cfg.grid(); });
  checked("fbs", [&] { cfg.fbs_settings().validate(); });
  checked("fbs.u_init", [&] { cfg.u_init.validate(cfg.params); });
  checked("control", [&] { cfg.control.validate(cfg.params); });
  return cfg;
}

json encode_run_config(const RunConfig& cfg) {
  const auto& p = cfg.params;
  const auto& w = cfg.weights;
  const auto& x = cfg.x0;
  json doc = {
      {"params",
       {{"b", p.b}, {"delta", p.delta}, {"beta", p.beta}, {"gamma", p.gamma}, {"eta_bar", p.eta_bar}, {"xi", p.xi},
        {"mu_bar", p.mu_bar}, {"nu_bar", p.nu_bar}}},
      {"weights", {{"c1", w.c1}, {"c2", w.c2}, {"c3", w.c3}, {"c4", w.c4}, {"c5", w.c5}, {"c6", w.c6}}},
      {"x0",
       {{"S", x.S}, {"I", x.I}, {"R", x.R}, {"S_star", x.S_star}, {"I_star", x.I_star}, {"R_star", x.R_star}}},
      {"grid", {{"t_final", cfg.t_final}, {"dt", cfg.dt}}},
      {"fbs",
       {{"kappa", cfg.kappa}, {"tol", cfg.tol}, {"max_iter", cfg.max_iter}, {"u_init", encode_control(cfg.u_init)}}},
      {"mask", {{"alpha", cfg.mask.alpha}, {"eta", cfg.mask.eta}, {"mu", cfg.mask.mu}, {"nu", cfg.mask.nu}}},
      {"control", encode_control(cfg.control)},
      {"output", {{"dir", cfg.output.dir}, {"prefix", cfg.output.prefix}}},
  };
  if (cfg.analyze_dfe) doc["analyze"] = {{"dfe", std::string(to_string(*cfg.analyze_dfe))}};
  return doc;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("$", "cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("malformed JSON (") + e.what() + ")");
  }
  return decode_run_config(doc);
}

RunConfig run_config_from_scenario(const ScenarioConfig& sc) {
  RunConfig cfg;
  cfg.params = sc.params;
  cfg.weights = sc.weights;
  cfg.x0 = sc.x0;
  cfg.t_final = sc.grid.t_final();
  cfg.dt = sc.grid.dt();
  cfg.kappa = sc.fbs.kappa;
  cfg.tol = sc.fbs.tol;
  cfg.max_iter = sc.fbs.max_iter;
  cfg.mask = sc.mask;
  return cfg;
}

void write_trajectory_csv(std::ostream& os, const Trajectory<State>& state, const Trajectory<ControlVec>& control,
                          const Trajectory<CostateVec>* costate, std::span<const double> r0) {
  if (!(state.grid == control.grid) || r0.size() != state.size() || (costate && !(costate->grid == state.grid))) {
    throw InvalidArgument("write_trajectory_csv: trajectories are not aligned");
  }
  os << kCsvHeader << '\n';
  for (std::size_t k = 0; k < state.size(); ++k) {
    os << fmt17(state.grid.time(k));
    for (double v : state[k].clamped().to_array()) os << ',' << fmt17(v);
    for (double v : control[k].to_array()) os << ',' << fmt17(v);
    if (costate) {
      for (double v : (*costate)[k].to_array()) os << ',' << fmt17(v);
    } else {
      os << ",,,,,,";
    }
    os << ',' << fmt17(r0[k]) << '\n';
  }
}

json analysis_json(const ModelParams& p, const ControlVec& u, std::optional<DfeKind> required) {
  json dfes = json::array();
  bool found_required = !required.has_value();
  for (const Dfe& d : compute_dfes(p, u)) {
    json entry = {{"kind", std::string(to_string(d.kind))},
                  {"s", d.s},
                  {"s_star", d.s_star},
                  {"r0", reproductive_ratio(d, p, u)},
                  {"r0_ngm", ngm_at(d, p, u).next_generation_radius()}};
    try {
      const StabilityReport rep = classify_stability(d, p, u);
      entry["theorem_case"] = std::string(to_string(rep.theorem_case));
      entry["classification"] = std::string(to_string(rep.classification));
      entry["h5_eigenvalues"] = rep.h5_eigenvalues;
      entry["h5_holds"] = rep.h5_holds;
      if (required && *required == d.kind) found_required = true;
    } catch (const HypothesisViolation& e) {
      entry["hypothesis_violation"] = e.what();
    }
    dfes.push_back(std::move(entry));
  }
  if (!found_required) {
    throw HypothesisViolation("requested DFE " + std::string(to_string(*required)) +
                              " is not physically meaningful or its theorem hypotheses fail");
  }
  const double threshold = mixing_threshold(p, u);
  return {{"capacity", p.capacity()},
          {"mixing_threshold", std::isfinite(threshold) ? json(threshold) : json(nullptr)},
          {"control", encode_control(u)},
          {"dfes", dfes}};
}

json report_json(const ScenarioReport& r) {
  json j = summary_json(r.cost_uncontrolled, r.optimal);
  j["label"] = r.label;
  j["reduction_percent"] = std::lround(100.0 * r.relative_reduction);
  double alpha_integral = 0.0;
  std::array<double, ControlVec::size> sup{};
  const double dt = r.optimal.control.grid.dt();
  for (std::size_t k = 0; k < r.optimal.control.size(); ++k) {
    const auto c = r.optimal.control[k].to_array();
    if (k + 1 < r.optimal.control.size()) alpha_integral += dt * c[0];
    for (std::size_t i = 0; i < c.size(); ++i) sup[i] = std::max(sup[i], c[i]);
  }
  j["alpha_integral"] = alpha_integral;
  j["control_max"] = {{"alpha", sup[0]}, {"eta", sup[1]}, {"mu", sup[2]}, {"nu", sup[3]}};
  return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compliance-structured SIR model: simulation, stability analysis and optimal control"};
  app.require_subcommand(1);

  std::string config_path, out_dir, prefix, dump_path;

  auto* sim = app.add_subcommand("simulate", "Integrate the dynamics under a constant control");
  std::optional<double> alpha, eta, mu, nu;
  sim->add_option("config", config_path, "Run config JSON")->required();
  sim->add_option("--alpha", alpha, "Constant alpha (overrides config)");
  sim->add_option("--eta", eta, "Constant eta (overrides config)");
  sim->add_option("--mu", mu, "Constant mu (overrides config)");
  sim->add_option("--nu", nu, "Constant nu (overrides config)");

  auto* opt = app.add_subcommand("optimize", "Solve the optimal control problem by forward-backward sweep");
  bool strict = false;
  opt->add_option("config", config_path, "Run config JSON")->required();
  opt->add_flag("--strict", strict, "Exit 2 when the sweep does not converge");

  auto* ana = app.add_subcommand("analyze", "Disease-free equilibria, R0 and stability under a constant control");
  ana->add_option("config", config_path, "Run config JSON")->required();

  auto* scen = app.add_subcommand("scenario", "Run a builtin scenario (uncontrolled and optimal)");
  std::string scenario_id;
  ScenarioFlags scen_flags;
  scen->add_option("id", scenario_id, "S1, S2 or S3")->required();
  scen_flags.attach(scen);

  auto* swp = app.add_subcommand("sweep", "Run a builtin scenario over a list of knob values");
  std::string knob_name, value_list;
  unsigned jobs = 1;
  ScenarioFlags sweep_flags;
  swp->add_option("id", scenario_id, "S1, S2 or S3")->required();
  swp->add_option("knob", knob_name, "c1, c2 or xi")->required();
  swp->add_option("values", value_list, "Comma-separated values, fractions allowed (e.g. 1/3,1,3)")->required();
  swp->add_option("--jobs", jobs, "Parallel solves")->check(CLI::PositiveNumber);
  sweep_flags.attach(swp);

  for (auto* sub : {sim, opt, ana, scen, swp}) {
    sub->add_option("--out", out_dir, "Output directory (overrides config)");
    sub->add_option("--prefix", prefix, "Output file prefix (overrides config)");
    sub->add_option("--dump-config", dump_path, "Write the effective run config as JSON ('-' for stdout)");
  }

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  auto target = [&](const RunConfig& cfg, const std::string& suffix) {
    const fs::path dir = out_dir.empty() ? fs::path(cfg.output.dir) : fs::path(out_dir);
    return dir / ((prefix.empty() ? cfg.output.prefix : prefix) + suffix);
  };

  try {
    if (sim->parsed() || opt->parsed() || ana->parsed()) {
      RunConfig cfg = load_run_config(config_path);
      if (alpha) cfg.control.alpha = *alpha;
      if (eta) cfg.control.eta = *eta;
      if (mu) cfg.control.mu = *mu;
      if (nu) cfg.control.nu = *nu;
      checked("control", [&] { cfg.control.validate(cfg.params); });
      if (!dump_path.empty()) {
        dump_config(cfg, dump_path, out);
        return kOk;
      }
      const Grid grid = cfg.grid();

      if (sim->parsed()) {
        const Trajectory<ControlVec> u(grid, cfg.control);
        const auto x = integrate_forward(cfg.x0, u, cfg.params);
        write_csv(target(cfg, "_trajectory.csv"), x, u, nullptr, cfg.params);
        return kOk;
      }
      if (opt->parsed()) {
        const Trajectory<ControlVec> zero(grid);
        const double j0 = total_cost(integrate_forward(cfg.x0, zero, cfg.params), zero, cfg.weights);
        const FbsResult r = fbs_solve(cfg.x0, cfg.params, cfg.weights, grid, cfg.fbs_settings(), cfg.mask);
        write_csv(target(cfg, "_optimal.csv"), r.state, r.control, &r.costate, cfg.params);
        const json summary = summary_json(j0, r);
        write_json(target(cfg, "_summary.json"), summary);
        out << summary.dump(2) << '\n';
        if (strict && !r.converged) {
          err << "error: forward-backward sweep did not converge in " << r.iterations << " iterations\n";
          return kSolverError;
        }
        return kOk;
      }
      const json report = analysis_json(cfg.params, cfg.control, cfg.analyze_dfe);
      write_json(target(cfg, "_analysis.json"), report);
      out << report.dump(2) << '\n';
      return kOk;
    }

    const ScenarioId id = parse_scenario_id(scenario_id);
    const ScenarioFlags& flags = scen->parsed() ? scen_flags : sweep_flags;
    const ScenarioConfig base = builtin_scenario(id, flags.overrides());
    RunConfig as_run = run_config_from_scenario(base);
    as_run.output.prefix = std::string(to_string(id));
    if (!dump_path.empty()) {
      dump_config(as_run, dump_path, out);
      return kOk;
    }

    if (scen->parsed()) {
      const ScenarioReport r = run_scenario(base);
      const Trajectory<ControlVec> zero(base.grid);
      write_csv(target(as_run, "_uncontrolled.csv"), r.uncontrolled_state, zero, nullptr, base.params);
      write_csv(target(as_run, "_optimal.csv"), r.optimal.state, r.optimal.control, &r.optimal.costate,
                base.params);
      const json rep = report_json(r);
      write_json(target(as_run, "_report.json"), rep);
      out << rep.dump(2) << '\n';
      return kOk;
    }

    const SweepKnob knob = parse_sweep_knob(knob_name);
    const std::vector<double> values = parse_values(value_list);
    const auto reports = sweep(base, knob, values, jobs);
    json aggregate = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const std::string stem = "_" + std::string(to_string(knob)) + "_" + std::to_string(i);
      const auto& r = reports[i];
      write_csv(target(as_run, stem + "_optimal.csv"), r.optimal.state, r.optimal.control, &r.optimal.costate,
                base.params);
      json rep = report_json(r);
      rep[std::string(to_string(knob))] = values[i];
      write_json(target(as_run, stem + "_report.json"), rep);
      aggregate.push_back(std::move(rep));
    }
    write_json(target(as_run, "_" + std::string(to_string(knob)) + "_sweep.json"), aggregate);
    out << aggregate.dump(2) << '\n';
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const NonFiniteState& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const NegativityBreach& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverError;
  }
}

}  // namespace ncsir::cli
