#include <gtest/gtest.h>

#include <cmath>

#include "ncsir/ncsir.hpp"
#include "test_support.hpp"

using namespace ncsir;
using ncsir::oracle::Sampler;

namespace {

ModelParams threshold_example() {
  // b/delta = 1, nu + delta = 0.06, mu_bar - mu = 0.1 → threshold 0.6.
  ModelParams p = oracle::scenario1_params();
  p.nu_bar = 0.05;
  return p;
}

void expect_matches_newton(const ModelParams& p, const ControlVec& u) {
  const auto dfes = compute_dfes(p, u);
  const auto roots = oracle::dfe_roots_by_newton(p, u);
  ASSERT_EQ(dfes.size(), roots.size());
  for (const auto& d : dfes) {
    bool found = false;
    for (const auto& r : roots) found = found || (std::abs(r[0] - d.s) + std::abs(r[1] - d.s_star) < 1e-9);
    EXPECT_TRUE(found) << "(" << d.s << ", " << d.s_star << ") not found by Newton";
  }
}

}  // namespace

TEST(Matrix2, EigenvaluesAndInverse) {
  const Matrix2 m{2.0, 1.0, 1.0, 3.0};
  const auto ev = m.eigenvalue_real_parts();
  EXPECT_NEAR(ev[0], (5 + std::sqrt(5.0)) / 2, 1e-14);
  EXPECT_NEAR(ev[1], (5 - std::sqrt(5.0)) / 2, 1e-14);
  const Matrix2 id = m * m.inverse();
  EXPECT_NEAR(id.a11, 1.0, 1e-15);
  EXPECT_NEAR(id.a12, 0.0, 1e-15);
  EXPECT_NEAR(id.a22, 1.0, 1e-15);
  const Matrix2 rot{0.0, -2.0, 2.0, 0.0};
  EXPECT_NEAR(rot.spectral_radius(), 2.0, 1e-15);
  EXPECT_NEAR(rot.eigenvalue_real_parts()[0], 0.0, 1e-15);
}

TEST(ComputeDfes, XiZeroBothEquilibria) {
  const auto p = threshold_example();
  const ControlVec u{0, 0, 0, 0.05};
  const auto dfes = compute_dfes(p, u);
  ASSERT_EQ(dfes.size(), 2u);
  EXPECT_EQ(dfes[0].kind, DfeKind::ComplianceOnly);
  EXPECT_DOUBLE_EQ(dfes[0].s, 1.0);
  EXPECT_DOUBLE_EQ(dfes[0].s_star, 0.0);
  EXPECT_EQ(dfes[1].kind, DfeKind::MixedXiZero);
  EXPECT_NEAR(dfes[1].s, 0.6, 1e-14);
  EXPECT_NEAR(dfes[1].s_star, 0.4, 1e-14);
  expect_matches_newton(p, u);
}

TEST(ComputeDfes, XiZeroBelowThresholdSingleEquilibrium) {
  const auto p = oracle::scenario1_params();
  const ControlVec u{0, 0, 0.09, 0.1};  // threshold 0.11/0.01 = 11 > 1
  const auto dfes = compute_dfes(p, u);
  ASSERT_EQ(dfes.size(), 1u);
  EXPECT_EQ(dfes[0].kind, DfeKind::ComplianceOnly);
  expect_matches_newton(p, u);
}

TEST(ComputeDfes, FullyNoncompliantInflowWithoutRecovery) {
  auto p = oracle::scenario1_params();
  p.xi = 1.0;
  p.nu_bar = 0.0;
  const auto dfes = compute_dfes(p, ControlVec{});
  ASSERT_EQ(dfes.size(), 1u);
  EXPECT_EQ(dfes[0].kind, DfeKind::MixedXiPositive);
  EXPECT_NEAR(dfes[0].s, 0.0, 1e-15);
  EXPECT_NEAR(dfes[0].s_star, 1.0, 1e-15);
}

TEST(ComputeDfes, SpreadFullySuppressedReducesToLinearSystem) {
  auto p = oracle::scenario1_params();
  p.xi = 0.3;
  const ControlVec u{0, 0, p.mu_bar, 0.04};
  const auto dfes = compute_dfes(p, u);
  ASSERT_EQ(dfes.size(), 1u);
  // gap = 0: s* = xi b / (nu + delta), s = K - s*.
  EXPECT_NEAR(dfes[0].s_star, 0.3 * 0.01 / 0.05, 1e-15);
  EXPECT_NEAR(dfes[0].s, 1.0 - 0.06, 1e-15);

  p.xi = 0.0;
  const auto only = compute_dfes(p, u);
  ASSERT_EQ(only.size(), 1u);
  EXPECT_EQ(only[0].kind, DfeKind::ComplianceOnly);
}

TEST(ComputeDfes, SmallXiLimitMatchesXiZero) {
  // Above threshold: limit is the mixed DFE; below: the compliance-only DFE.
  for (const ControlVec u : {ControlVec{0, 0, 0, 0.05}, ControlVec{0, 0, 0.09, 0.05}}) {
    auto p = threshold_example();
    const auto zero = compute_dfes(p, u).back();
    p.xi = 1e-8;
    const auto small = compute_dfes(p, u);
    ASSERT_EQ(small.size(), 1u);
    EXPECT_NEAR(small[0].s, zero.s, 1e-3);
    EXPECT_NEAR(small[0].s_star, zero.s_star, 1e-3);
  }
}

TEST(ComputeDfes, NearThresholdStaysAccurate) {
  auto p = threshold_example();
  p.xi = 1e-12;
  const ControlVec u{0, 0, 0.04, 0.05};  // threshold exactly 1 = b/delta
  const auto d = compute_dfes(p, u).at(0);
  const auto r = dfe_residual(d.s, d.s_star, p, u);
  EXPECT_LE(std::abs(r[0]), 1e-15);
  EXPECT_LE(std::abs(r[1]), 1e-15);
}

TEST(ComputeDfesProperty, AgreesWithNewtonAndHasSmallResidual) {
  Sampler rng(21);
  for (int i = 0; i < 400; ++i) {
    const auto p = rng.params();
    const auto u = rng.control(p);
    for (const auto& d : compute_dfes(p, u)) {
      const auto r = dfe_residual(d.s, d.s_star, p, u);
      EXPECT_LE(std::abs(r[0]), 1e-10);
      EXPECT_LE(std::abs(r[1]), 1e-10);
      EXPECT_GE(d.s, 0.0);
      EXPECT_GE(d.s_star, 0.0);
      EXPECT_LE(d.s, p.capacity() * (1 + 1e-12));
      EXPECT_LE(d.s_star, p.capacity() * (1 + 1e-12));
    }
    if (i < 150) expect_matches_newton(p, u);
  }
}

TEST(ComputeDfes, RejectsInvalidParams) {
  auto p = oracle::scenario1_params();
  p.delta = 0.0;
  EXPECT_THROW(compute_dfes(p, ControlVec{}), InvalidArgument);
}

TEST(NgmAt, Examples) {
  const auto p = oracle::scenario1_params();
  const ControlVec u{0.3, 0.05, 0.02, 0.07};
  const auto zero = ngm_at(Dfe{0, 0, DfeKind::ComplianceOnly}, p, u);
  EXPECT_EQ(zero.F.a11, 0.0);
  EXPECT_EQ(zero.F.a22, 0.0);
  EXPECT_NEAR(zero.V.a11, 0.2 + 0.05 + 0.01, 1e-15);
  EXPECT_NEAR(zero.V.a12, -0.07, 1e-15);
  EXPECT_EQ(zero.V.a21, 0.0);
  EXPECT_NEAR(zero.V.a22, 0.2 + 0.07 + 0.01, 1e-15);

  const auto full = ngm_at(Dfe{0.5, 0.5, DfeKind::MixedXiPositive}, p, ControlVec{1, 0, 0, 0});
  EXPECT_EQ(full.F.a11, 0.0);
  EXPECT_EQ(full.F.a12, 0.0);

  const auto s1 = ngm_at(Dfe{1, 0, DfeKind::ComplianceOnly}, p, ControlVec{});
  EXPECT_NEAR(s1.F.a11, 0.4, 1e-15);
  EXPECT_NEAR(s1.F.a12, 0.4, 1e-15);
  EXPECT_EQ(s1.F.a21, 0.0);
  EXPECT_NEAR(s1.V.a11, 0.21, 1e-15);
  EXPECT_NEAR(s1.V.a22, 0.21, 1e-15);
  EXPECT_EQ(s1.V.a12, 0.0);
  EXPECT_EQ(s1.V.a21, 0.0);
}

TEST(ReproductiveRatio, Examples) {
  const auto p = oracle::scenario1_params();
  EXPECT_NEAR(reproductive_ratio(0.0, 1.0, p, ControlVec{}), 0.4 / 0.21, 1e-15);
  EXPECT_NEAR(reproductive_ratio(1.0, 0.0, p, ControlVec{}), 40.0 / 21.0, 1e-12);
  const ControlVec u{0.25, 0.06, 0.03, 0.02};
  EXPECT_NEAR(reproductive_ratio(1.0, 0.0, p, u), 0.4 * 0.75 / (0.2 + 0.06 + 0.01), 1e-15);
}

TEST(ReproductiveRatioProperty, ClosedFormMatchesSpectralRadius) {
  Sampler rng(22);
  for (int i = 0; i < 1000; ++i) {
    const auto p = rng.params();
    const auto u = rng.control(p);
    const double s = rng.uniform(0, p.capacity()), z = rng.uniform(0, p.capacity());
    const double oracle = oracle::ngm_radius_oracle(s, z, p, u);
    EXPECT_NEAR(reproductive_ratio(s, z, p, u), oracle, 1e-10);
    EXPECT_NEAR(ngm_at(Dfe{s, z, DfeKind::MixedXiPositive}, p, u).next_generation_radius(), oracle, 1e-10);
  }
}

TEST(ReproductiveRatioProperty, NonincreasingInEachControl) {
  Sampler rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = rng.params();
    const double s = rng.uniform(0, p.capacity()), z = rng.uniform(0, p.capacity());
    const auto base = rng.control(p);
    const auto ub = control_upper_bounds(p);
    for (int c = 0; c < 4; ++c) {
      double prev = INFINITY;
      for (int k = 0; k < 200; ++k) {
        auto v = base.to_array();
        v[c] = ub[c] * k / 199.0;
        const double r = reproductive_ratio(s, z, p, ControlVec::from_array(v));
        EXPECT_LE(r, prev + 1e-14 * (1 + std::abs(prev))) << "control " << c << " step " << k;
        prev = r;
      }
    }
  }
}

TEST(ReproductiveRatioProperty, NondecreasingAlongNoncompliantShift) {
  Sampler rng(24);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = rng.params();
    const auto u = rng.control(p);
    const double k = p.capacity();
    double prev = -INFINITY;
    for (int i = 0; i < 200; ++i) {
      const double z = k * i / 199.0;
      const double r = reproductive_ratio(k - z, z, p, u);
      EXPECT_GE(r, prev - 1e-14 * (1 + std::abs(prev)));
      prev = r;
    }
  }
}

TEST(ClassifyStability, StableUnderStrongControl) {
  const auto p = oracle::scenario1_params();
  const ControlVec u{0.6, 0.1, p.mu_bar, p.nu_bar};
  const auto dfes = compute_dfes(p, u);
  ASSERT_EQ(dfes.size(), 1u);
  const auto rep = classify_stability(dfes[0], p, u);
  EXPECT_NEAR(rep.r0, 0.16 / 0.31, 1e-14);
  EXPECT_EQ(rep.classification, Stability::Stable);
  EXPECT_EQ(rep.theorem_case, TheoremCase::CaseI);
  EXPECT_TRUE(rep.h5_holds);

  // Long-horizon simulation settles on the DFE.
  const Grid g(3000.0, 0.1);
  const auto x = integrate_forward(oracle::reference_x0(), Trajectory<ControlVec>(g, u), p);
  const auto end = x.values.back();
  EXPECT_NEAR(end.S, 1.0, 1e-6);
  EXPECT_NEAR(end.infected(), 0.0, 1e-8);
}

TEST(ClassifyStability, UncontrolledMixedEquilibriumMatchesJacobian) {
  const auto p = oracle::scenario1_params();
  const ControlVec u{};
  const auto dfes = compute_dfes(p, u);
  ASSERT_EQ(dfes.size(), 2u);
  const auto rep = classify_stability(dfes[1], p, u);
  EXPECT_EQ(rep.theorem_case, TheoremCase::CaseII);
  EXPECT_TRUE(rep.h5_holds);
  const double lead = oracle::max_real_eigenvalue(oracle::numerical_jacobian(dfes[1].as_state(), u, p));
  EXPECT_EQ(rep.r0 > 1.0, lead > 0.0);
  EXPECT_EQ(rep.classification, rep.r0 > 1 ? Stability::Unstable : Stability::Stable);

  EXPECT_THROW(classify_stability(dfes[0], p, u), HypothesisViolation);
}

TEST(ClassifyStability, H5EigenvaluesListed) {
  const auto p = oracle::scenario1_params();
  const ControlVec u{0.1, 0.02, 0.03, 0.04};
  const auto d = compute_dfes(p, u).back();
  const auto rep = classify_stability(d, p, u);
  const double gap = p.mu_bar - u.mu;
  EXPECT_DOUBLE_EQ(rep.h5_eigenvalues[2], p.delta);
  EXPECT_DOUBLE_EQ(rep.h5_eigenvalues[3], p.delta);
  EXPECT_NEAR(rep.h5_eigenvalues[4], p.delta + u.nu + gap * d.s_star, 1e-15);
  EXPECT_NEAR(rep.h5_eigenvalues[5], p.delta + u.nu + gap * (d.s_star - d.s), 1e-15);
  const auto V = ngm_at(d, p, u).V;
  Eigen::Matrix2d m;
  m << V.a11, V.a12, V.a21, V.a22;
  EXPECT_NEAR(rep.h5_eigenvalues[0], oracle::max_real_eigenvalue(m), 1e-12);
}

TEST(ClassifyStability, KnifeEdgeIsMarginal) {
  // b/delta = 1 and (nu + delta)/(mu_bar - mu) = 0.5/0.5 = 1.
  ModelParams p = oracle::scenario1_params();
  p.b = p.delta = 0.25;
  p.nu_bar = 0.25;
  p.mu_bar = 0.5;
  const ControlVec u{0, 0, 0, 0.25};
  const auto dfes = compute_dfes(p, u);
  ASSERT_EQ(dfes.size(), 1u);
  const auto rep = classify_stability(dfes[0], p, u);
  EXPECT_FALSE(rep.h5_holds);
  EXPECT_EQ(rep.classification, Stability::Marginal);
}

TEST(ClassifyStability, RegimeMismatchThrows) {
  const auto p = oracle::scenario1_params();
  const ControlVec u{0, 0, 0.09, 0.1};  // threshold 11 > b/delta
  EXPECT_THROW(classify_stability(Dfe{0.1, 0.9, DfeKind::MixedXiZero}, p, u), HypothesisViolation);
  EXPECT_THROW(classify_stability(Dfe{0.3, 0.7, DfeKind::MixedXiPositive}, p, u), HypothesisViolation);
  auto q = p;
  q.xi = 0.2;
  EXPECT_THROW(classify_stability(Dfe{1, 0, DfeKind::ComplianceOnly}, q, u), HypothesisViolation);
}

TEST(ClassifyStability, RejectsPointThatIsNotAnEquilibrium) {
  const auto p = oracle::scenario1_params();
  EXPECT_THROW(classify_stability(Dfe{0.5, 0.0, DfeKind::ComplianceOnly}, p, ControlVec{0, 0, 0.09, 0.1}),
               InvalidArgument);
}

TEST(ClassifyStabilityProperty, SignMatchesFullJacobian) {
  Sampler rng(25);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    const auto p = rng.params();
    const auto u = rng.control(p);
    for (const auto& d : compute_dfes(p, u)) {
      StabilityReport rep;
      try {
        rep = classify_stability(d, p, u);
      } catch (const HypothesisViolation&) {
        continue;
      }
      if (!rep.h5_holds || std::abs(rep.r0 - 1.0) < 1e-3) continue;
      const double lead = oracle::max_real_eigenvalue(oracle::numerical_jacobian(d.as_state(), u, p));
      if (std::abs(lead) < 1e-7) continue;
      EXPECT_EQ(rep.r0 > 1.0, lead > 0.0) << "r0 " << rep.r0 << " lead " << lead;
      ++checked;
    }
  }
  EXPECT_GT(checked, 200);
}
