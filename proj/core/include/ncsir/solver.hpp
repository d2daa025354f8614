#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "ncsir/model.hpp"

namespace ncsir {

/// Uniform discretization of [0, T].
class Grid {
 public:
  /// Throws InvalidArgument unless T > 0, dt > 0 and T/dt is integral to within 1e-9.
  Grid(double t_final, double dt);

  double t_final() const { return t_final_; }
  double dt() const { return dt_; }
  std::size_t n_nodes() const { return n_nodes_; }
  double time(std::size_t k) const { return static_cast<double>(k) * dt_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double t_final_;
  double dt_;
  std::size_t n_nodes_;
};

/// Values sampled at every node of a grid.
template <class V>
struct Trajectory {
  Grid grid;
  std::vector<V> values;

  explicit Trajectory(const Grid& g, const V& fill = V{}) : grid(g), values(g.n_nodes(), fill) {}

  std::size_t size() const { return values.size(); }
  V& operator[](std::size_t k) { return values[k]; }
  const V& operator[](std::size_t k) const { return values[k]; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct CostateVec {
  double p_S = 0.0;
  double p_I = 0.0;
  double p_R = 0.0;
  double p_Sstar = 0.0;
  double p_Istar = 0.0;
  double p_Rstar = 0.0;

  static constexpr std::size_t size = 6;

  std::array<double, size> to_array() const { return {p_S, p_I, p_R, p_Sstar, p_Istar, p_Rstar}; }
  static CostateVec from_array(const std::array<double, size>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
  bool all_finite() const;

  friend bool operator==(const CostateVec&, const CostateVec&) = default;
};

using CostateDerivative = CostateVec;

/// Forward-backward sweep settings.
///
/// Each sweep moves the control a fraction `kappa` of the way to the projected optimum:
/// u <- (1 - kappa) u + kappa u*. The default 0.2 keeps 0.8 of the previous iterate.
struct FbsSettings {
  double kappa = 0.2;
  double tol = 1e-3;
  int max_iter = 500;
  /// Initial control trajectory; zero when empty.
  std::optional<Trajectory<ControlVec>> u_init;

  void validate() const;
};

struct FbsResult {
  Trajectory<ControlVec> control;
  Trajectory<State> state;
  Trajectory<CostateVec> costate;
  double total_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  /// tol * ||c_new||_inf - ||c_new - c_old||_inf per iteration, for (alpha, eta, mu, nu).
  std::vector<std::array<double, ControlVec::size>> criterion_history;
};

/// Explicit Euler: x_{k+1} = x_k + dt rhs(x_k, u_k).
///
/// Throws NonFiniteState on overflow and NegativityBreach when a component drops
/// below -1e-9.
Trajectory<State> integrate_forward(const State& x0, const Trajectory<ControlVec>& u, const ModelParams& p);

/// Hamiltonian H = <p, f(x, u)> + r(x, u).
double hamiltonian(const State& x, const CostateVec& pc, const ControlVec& u, const ModelParams& p,
                   const CostWeights& w);

/// dp/dt = -grad_x H.
CostateDerivative costate_rhs(const State& x, const CostateVec& pc, const ControlVec& u, const ModelParams& p,
                              const CostWeights& w);

/// Backward explicit Euler from p(T) = 0: p_k = p_{k+1} - dt costate_rhs(x_{k+1}, p_{k+1}, u_{k+1}).
Trajectory<CostateVec> integrate_costate_backward(const Trajectory<State>& x, const Trajectory<ControlVec>& u,
                                                  const ModelParams& p, const CostWeights& w);

/// Pointwise minimizer of H over U_ad (unconstrained stationary point clipped to the box).
ControlVec project_optimal_controls(const State& x, const CostateVec& pc, const ModelParams& p,
                                    const CostWeights& w);

/// Left-endpoint Riemann sum of the running cost.
double total_cost(const Trajectory<State>& x, const Trajectory<ControlVec>& u, const CostWeights& w);

/// Forward-backward sweep for the optimal control problem.
///
/// Halts once a relaxation step passes the sup-norm test for every unmasked control and the
/// resulting control is within tol (1 + ||u||) of its own projection. Masked controls stay at
/// zero and are excluded from both tests. Hitting max_iter is not an error: the last iterate
/// is returned with converged = false.
FbsResult fbs_solve(const State& x0, const ModelParams& p, const CostWeights& w, const Grid& g,
                    const FbsSettings& s, const ControlMask& mask = {});

}  // namespace ncsir
