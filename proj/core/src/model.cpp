#include "ncsir/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ncsir/error.hpp"

namespace ncsir {
namespace {

// Controls produced by convex relaxation can overshoot a bound by an ulp.
constexpr double kControlSlack = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void ModelParams::validate() const {
  for (double v : {b, delta, beta, gamma, eta_bar, xi, mu_bar, nu_bar}) {
    require(finite(v), "model parameters must be finite");
  }
  require(b > 0.0, "b must be positive");
  require(delta > 0.0, "delta must be positive");
  require(beta > 0.0, "beta must be positive");
  require(gamma > 0.0, "gamma must be positive");
  require(eta_bar >= 0.0, "eta_bar must be nonnegative");
  require(mu_bar >= 0.0, "mu_bar must be nonnegative");
  require(nu_bar >= 0.0, "nu_bar must be nonnegative");
  require(xi >= 0.0 && xi <= 1.0, "xi must lie in [0, 1]");
  require(b / delta >= 1.0, "b/delta must be at least 1");
}

bool State::all_finite() const {
  const auto v = to_array();
  return std::all_of(v.begin(), v.end(), [](double c) { return finite(c); });
}

void State::validate(double tolerance) const {
  require(all_finite(), "state components must be finite");
  for (double c : to_array()) {
    require(c >= -tolerance, "state components must be nonnegative");
  }
}

State State::clamped() const {
  auto v = to_array();
  for (double& c : v) c = std::max(c, 0.0);
  return from_array(v);
}

std::array<double, ControlVec::size> control_upper_bounds(const ModelParams& p) {
  return {1.0, p.eta_bar, p.mu_bar, p.nu_bar};
}

bool ControlVec::admissible(const ModelParams& p, double slack) const {
  const auto v = to_array();
  const auto hi = control_upper_bounds(p);
  for (std::size_t i = 0; i < size; ++i) {
    if (!finite(v[i]) || v[i] < -slack || v[i] > hi[i] + slack) return false;
  }
  return true;
}

void ControlVec::validate(const ModelParams& p, double slack) const {
  require(admissible(p, slack), "control outside the admissible set");
}

void CostWeights::validate() const {
  for (double v : {c1, c2, c3, c4, c5, c6}) require(finite(v), "cost weights must be finite");
  require(c1 >= 0.0 && c2 >= 0.0, "c1 and c2 must be nonnegative");
  require(c3 > 0.0 && c4 > 0.0 && c5 > 0.0 && c6 > 0.0, "c3..c6 must be positive");
}

StateDerivative rhs(const State& x, const ControlVec& u, const ModelParams& p) {
  require(x.all_finite(), "rhs: non-finite state");
  u.validate(p, kControlSlack);

  const double contact = p.beta * (x.I + x.I_star);
  const double compliant_contact = (1.0 - u.alpha) * contact;
  const double spread = (p.mu_bar - u.mu) * x.noncompliant();
  const double recovery = p.gamma + u.eta;

  StateDerivative d;
  d.S = (1.0 - p.xi) * p.b - compliant_contact * x.S - spread * x.S + u.nu * x.S_star - p.delta * x.S;
  d.I = compliant_contact * x.S - recovery * x.I - spread * x.I + u.nu * x.I_star - p.delta * x.I;
  d.R = recovery * x.I - spread * x.R + u.nu * x.R_star - p.delta * x.R;
  d.S_star = p.xi * p.b - contact * x.S_star + spread * x.S - u.nu * x.S_star - p.delta * x.S_star;
  d.I_star = contact * x.S_star - p.gamma * x.I_star + spread * x.I - u.nu * x.I_star - p.delta * x.I_star;
  d.R_star = p.gamma * x.I_star + spread * x.R - u.nu * x.R_star - p.delta * x.R_star;
  return d;
}

double population_closed_form(double t, double n0, const ModelParams& p) {
  require(finite(t) && finite(n0), "population_closed_form: non-finite input");
  const double k = p.capacity();
  return k + (n0 - k) * std::exp(-p.delta * t);
}

double running_cost(const State& x, const ControlVec& u, const CostWeights& w) {
  return w.c1 * x.infected() + w.c2 * x.noncompliant() +
         0.5 * (w.c3 * u.alpha * u.alpha + w.c4 * u.eta * u.eta + w.c5 * u.mu * u.mu +
                w.c6 * u.nu * u.nu);
}

}  // namespace ncsir
