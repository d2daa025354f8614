#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ncsir/ncsir.hpp"
#include "test_support.hpp"

using namespace ncsir;
using ncsir::oracle::Sampler;

namespace {

void expect_state_near(const State& a, const State& b, double tol) {
  const auto x = a.to_array(), y = b.to_array();
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(x[i], y[i], tol) << "component " << i;
}

}  // namespace

TEST(ModelParams, ValidateRejectsBadValues) {
  auto p = oracle::scenario1_params();
  EXPECT_NO_THROW(p.validate());
  auto q = p;
  q.beta = 0.0;
  EXPECT_THROW(q.validate(), InvalidArgument);
  q = p;
  q.xi = 1.5;
  EXPECT_THROW(q.validate(), InvalidArgument);
  q = p;
  q.mu_bar = -0.1;
  EXPECT_THROW(q.validate(), InvalidArgument);
  q = p;
  q.b = 0.005;  // b/delta < 1
  EXPECT_THROW(q.validate(), InvalidArgument);
  q = p;
  q.gamma = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(q.validate(), InvalidArgument);
}

TEST(CostWeights, QuadraticWeightsMustBePositive) {
  EXPECT_NO_THROW((CostWeights{0, 0, 1, 1, 1, 1}.validate()));
  EXPECT_THROW((CostWeights{1, 0, 0, 1, 1, 1}.validate()), InvalidArgument);
  EXPECT_THROW((CostWeights{-1, 0, 1, 1, 1, 1}.validate()), InvalidArgument);
}

TEST(ControlVec, AdmissibleBox) {
  const auto p = oracle::scenario1_params();
  EXPECT_TRUE((ControlVec{1.0, 0.1, 0.1, 0.1}.admissible(p)));
  EXPECT_FALSE((ControlVec{1.01, 0, 0, 0}.admissible(p)));
  EXPECT_FALSE((ControlVec{0, 0.2, 0, 0}.admissible(p)));
  EXPECT_FALSE((ControlVec{0, 0, -1e-3, 0}.admissible(p)));
  EXPECT_TRUE((ControlVec{0, 0, 0, 0.1 + 1e-13}.admissible(p, 1e-12)));
}

TEST(Rhs, VacuumStateOnlyBirth) {
  const auto p = oracle::scenario1_params();
  expect_state_near(rhs(State{}, ControlVec{}, p), State{p.b, 0, 0, 0, 0, 0}, 0.0);
}

TEST(Rhs, ComplianceOnlyDfeIsEquilibrium) {
  const auto p = oracle::scenario1_params();
  const State dfe{p.capacity(), 0, 0, 0, 0, 0};
  expect_state_near(rhs(dfe, ControlVec{0.3, 0.05, 0.02, 0.07}, p), State{}, 1e-15);
}

TEST(Rhs, HandEvaluationAtReferenceInitialState) {
  // S1, u = 0: contact beta (I + I*) = 0.008, spread mu_bar N* = 0.03.
  //   S'  = 0.01 - 0.008*0.69 - 0.03*0.69 - 0.01*0.69          = -0.02312
  //   I'  = 0.008*0.69 - 0.2*0.01 - 0.03*0.01 - 0.01*0.01       =  0.00312
  //   R'  = 0.2*0.01                                            =  0.002
  //   S*' = -0.008*0.29 + 0.03*0.69 - 0.01*0.29                 =  0.01548
  //   I*' = 0.008*0.29 - 0.2*0.01 + 0.03*0.01 - 0.01*0.01       =  0.00052
  //   R*' = 0.2*0.01                                            =  0.002
  const State d = rhs(oracle::reference_x0(), ControlVec{}, oracle::scenario1_params());
  expect_state_near(d, State{-0.02312, 0.00312, 0.002, 0.01548, 0.00052, 0.002}, 1e-15);
}

TEST(Rhs, RejectsControlOutsideBox) {
  const auto p = oracle::scenario1_params();
  EXPECT_THROW(rhs(oracle::reference_x0(), ControlVec{0, 0.5, 0, 0}, p), InvalidArgument);
}

TEST(Rhs, RejectsNonFiniteState) {
  const auto p = oracle::scenario1_params();
  State x = oracle::reference_x0();
  x.I = std::numeric_limits<double>::infinity();
  EXPECT_THROW(rhs(x, ControlVec{}, p), InvalidArgument);
}

TEST(RhsProperty, SumEqualsBirthMinusDeath) {
  Sampler rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto p = rng.params();
    const auto x = rng.state(p);
    const auto d = rhs(x, rng.control(p), p);
    EXPECT_NEAR(d.total(), p.b - p.delta * x.total(), 1e-14 * (1 + p.beta));
  }
}

TEST(RhsProperty, QuasiPositivity) {
  Sampler rng(12);
  for (int i = 0; i < 500; ++i) {
    const auto p = rng.params();
    for (int j = 0; j < 6; ++j) {
      auto v = rng.state(p).to_array();
      v[j] = 0.0;
      const auto d = rhs(State::from_array(v), rng.control(p), p).to_array();
      EXPECT_GE(d[j], 0.0) << "component " << j;
    }
  }
}

TEST(RhsProperty, AffineInControl) {
  Sampler rng(13);
  for (int i = 0; i < 300; ++i) {
    const auto p = rng.params();
    const auto x = rng.state(p);
    const auto u = rng.control(p), v = rng.control(p);
    const ControlVec mid{(u.alpha + v.alpha) / 2, (u.eta + v.eta) / 2, (u.mu + v.mu) / 2, (u.nu + v.nu) / 2};
    const auto a = rhs(x, u, p).to_array(), b = rhs(x, v, p).to_array(), m = rhs(x, mid, p).to_array();
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(m[k], 0.5 * (a[k] + b[k]), 1e-14);
  }
}

TEST(PopulationClosedForm, Examples) {
  auto p = oracle::scenario1_params();
  EXPECT_DOUBLE_EQ(population_closed_form(37.0, 1.0, p), 1.0);
  p.b = 0.03;
  p.delta = 0.01;
  EXPECT_NEAR(population_closed_form(250.0, 3.0, p), 3.0, 1e-15);

  p.b = 0.02;
  const double oracle = oracle::integrate_population_rk4(10.0, 1.0, 0.02, 0.01, 2000);
  EXPECT_NEAR(population_closed_form(10.0, 1.0, p), oracle, 1e-12);
  EXPECT_NEAR(oracle, 2.0 - std::exp(-0.1), 1e-12);
}

TEST(RunningCost, Examples) {
  const auto p = oracle::scenario1_params();
  EXPECT_EQ(running_cost(State{}, ControlVec{}, CostWeights{1, 1}), 0.0);
  const ControlVec top{1.0, p.eta_bar, p.mu_bar, p.nu_bar};
  EXPECT_NEAR(running_cost(oracle::reference_x0(), top, CostWeights{0, 0}),
              0.5 * (1 + 0.01 + 0.01 + 0.01), 1e-15);
  EXPECT_NEAR(running_cost(oracle::reference_x0(), ControlVec{}, CostWeights{1, 0.1}), 0.05, 1e-15);
}

TEST(RunningCostProperty, MidpointConvexInControl) {
  Sampler rng(14);
  for (int i = 0; i < 300; ++i) {
    const auto p = rng.params();
    const auto x = rng.state(p);
    const auto w = rng.weights();
    const auto u = rng.control(p), v = rng.control(p);
    const ControlVec mid{(u.alpha + v.alpha) / 2, (u.eta + v.eta) / 2, (u.mu + v.mu) / 2, (u.nu + v.nu) / 2};
    EXPECT_LE(running_cost(x, mid, w), 0.5 * (running_cost(x, u, w) + running_cost(x, v, w)) + 1e-14);
  }
}

TEST(State, ClampedAndValidate) {
  const State x{-1e-13, 0.5, 0, 0, 0, 0};
  EXPECT_EQ(x.clamped().S, 0.0);
  EXPECT_NO_THROW(x.validate(1e-12));
  EXPECT_THROW(x.validate(0.0), InvalidArgument);
}
