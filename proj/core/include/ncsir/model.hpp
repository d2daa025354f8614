#pragma once

#include <array>
#include <cstddef>

namespace ncsir {

/// Epidemiological and behavioral rate constants of the compliance-structured SIR model.
struct ModelParams {
  double b = 0.0;        ///< birth rate
  double delta = 0.0;    ///< natural death rate
  double beta = 0.0;     ///< disease infection rate (mass action)
  double gamma = 0.0;    ///< disease recovery rate
  double eta_bar = 0.0;  ///< maximum added recovery from treatment
  double xi = 0.0;       ///< noncompliant fraction of newly introduced population
  double mu_bar = 0.0;   ///< baseline spread rate of noncompliance
  double nu_bar = 0.0;   ///< maximum recovery rate from noncompliance

  /// Total population level b/delta that every solution approaches.
  double capacity() const { return b / delta; }

  /// Throws InvalidArgument unless b, delta, beta, gamma > 0, the control bounds are
  /// nonnegative, xi lies in [0, 1] and b/delta >= 1.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Compartment values (S, I, R) compliant and (S*, I*, R*) noncompliant.
///
/// Also used for the state derivative, which shares the layout.
struct State {
  double S = 0.0;
  double I = 0.0;
  double R = 0.0;
  double S_star = 0.0;
  double I_star = 0.0;
  double R_star = 0.0;

  static constexpr std::size_t size = 6;

  double noncompliant() const { return S_star + I_star + R_star; }
  double infected() const { return I + I_star; }
  double total() const { return S + I + R + S_star + I_star + R_star; }

  std::array<double, size> to_array() const { return {S, I, R, S_star, I_star, R_star}; }
  static State from_array(const std::array<double, size>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }

  bool all_finite() const;

  /// Throws InvalidArgument if any component is non-finite or below -tolerance.
  void validate(double tolerance = 0.0) const;

  /// Copy with tiny negative round-off clamped to zero, for reporting.
  State clamped() const;

  friend bool operator==(const State&, const State&) = default;
};

using StateDerivative = State;

/// Control values: infectivity reduction, added recovery, noncompliance-spread reduction,
/// noncompliance recovery.
struct ControlVec {
  double alpha = 0.0;
  double eta = 0.0;
  double mu = 0.0;
  double nu = 0.0;

  static constexpr std::size_t size = 4;

  std::array<double, size> to_array() const { return {alpha, eta, mu, nu}; }
  static ControlVec from_array(const std::array<double, size>& v) { return {v[0], v[1], v[2], v[3]}; }

  /// Membership in the admissible box U_ad, allowing `slack` of round-off at each bound.
  bool admissible(const ModelParams& p, double slack = 0.0) const;
  void validate(const ModelParams& p, double slack = 0.0) const;

  friend bool operator==(const ControlVec&, const ControlVec&) = default;
};

/// Upper bounds of U_ad in (alpha, eta, mu, nu) order.
std::array<double, ControlVec::size> control_upper_bounds(const ModelParams& p);

/// Marks controls that are unavailable and pinned to zero.
struct ControlMask {
  bool alpha = false;
  bool eta = false;
  bool mu = false;
  bool nu = false;

  std::array<bool, ControlVec::size> to_array() const { return {alpha, eta, mu, nu}; }
  ControlVec apply(const ControlVec& u) const {
    return {alpha ? 0.0 : u.alpha, eta ? 0.0 : u.eta, mu ? 0.0 : u.mu, nu ? 0.0 : u.nu};
  }

  friend bool operator==(const ControlMask&, const ControlMask&) = default;
};

/// Weights of the running cost: c1 on infections, c2 on noncompliance, c3..c6 on the
/// squared controls.
struct CostWeights {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 1.0;
  double c4 = 1.0;
  double c5 = 1.0;
  double c6 = 1.0;

  /// c1, c2 >= 0 and c3..c6 > 0.
  void validate() const;

  friend bool operator==(const CostWeights&, const CostWeights&) = default;
};

/// Right-hand side of the controlled dynamics.
///
/// Throws InvalidArgument on non-finite inputs or a control outside U_ad. Small negative
/// state components from integrator round-off are accepted as-is.
StateDerivative rhs(const State& x, const ControlVec& u, const ModelParams& p);

/// N(t) = b/delta + (n0 - b/delta) exp(-delta t), the exact total population.
double population_closed_form(double t, double n0, const ModelParams& p);

/// r(x, u) = c1 (I + I*) + c2 N* + (c3 alpha^2 + c4 eta^2 + c5 mu^2 + c6 nu^2) / 2.
double running_cost(const State& x, const ControlVec& u, const CostWeights& w);

}  // namespace ncsir
