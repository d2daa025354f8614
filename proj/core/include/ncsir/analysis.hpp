#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "ncsir/model.hpp"

namespace ncsir {

/// Row-major 2x2 matrix; all eigen computations go through the characteristic polynomial.
struct Matrix2 {
  double a11 = 0.0, a12 = 0.0;
  double a21 = 0.0, a22 = 0.0;

  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a21; }
  Matrix2 inverse() const;

  /// Real parts of the two eigenvalues, larger first.
  std::array<double, 2> eigenvalue_real_parts() const;
  /// Largest eigenvalue modulus.
  double spectral_radius() const;

  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b);
};

enum class DfeKind {
  ComplianceOnly,   ///< (b/delta, 0), xi = 0
  MixedXiZero,      ///< ((nu+delta)/(mu_bar-mu), b/delta - (nu+delta)/(mu_bar-mu)), xi = 0
  MixedXiPositive,  ///< unique DFE for xi in (0, 1]
};

std::string_view to_string(DfeKind kind);

/// Disease-free equilibrium (0, 0, s, 0, s*, 0) in compartment terms.
struct Dfe {
  double s = 0.0;
  double s_star = 0.0;
  DfeKind kind = DfeKind::ComplianceOnly;

  State as_state() const { return {s, 0.0, 0.0, s_star, 0.0, 0.0}; }
};

/// (nu + delta) / (mu_bar - mu); +infinity when mu = mu_bar.
double mixing_threshold(const ModelParams& p, const ControlVec& u);

/// Residuals of the two DFE equations at (s, s*).
std::array<double, 2> dfe_residual(double s, double s_star, const ModelParams& p, const ControlVec& u);

/// All physically meaningful DFEs for constant controls u.
///
/// xi = 0 always yields (b/delta, 0) and adds the mixed DFE when b/delta exceeds the mixing
/// threshold; xi > 0 yields the single closed-form DFE.
std::vector<Dfe> compute_dfes(const ModelParams& p, const ControlVec& u);

/// Linearizations at a DFE over the infected compartments (I, I*).
struct NgmPair {
  Matrix2 F;  ///< new infections
  Matrix2 V;  ///< transfers

  /// rho(F V^-1).
  double next_generation_radius() const { return (F * V.inverse()).spectral_radius(); }
};

NgmPair ngm_at(const Dfe& dfe, const ModelParams& p, const ControlVec& u);

/// Closed-form reproductive ratio at (s, s*).
double reproductive_ratio(double s, double s_star, const ModelParams& p, const ControlVec& u);
inline double reproductive_ratio(const Dfe& dfe, const ModelParams& p, const ControlVec& u) {
  return reproductive_ratio(dfe.s, dfe.s_star, p, u);
}

enum class Stability { Stable, Unstable, Marginal };
enum class TheoremCase { CaseI, CaseII, CaseIII };

std::string_view to_string(Stability s);
std::string_view to_string(TheoremCase c);

inline constexpr double kStabilityMargin = 1e-9;

struct StabilityReport {
  Dfe dfe;
  double r0 = 0.0;
  Stability classification = Stability::Marginal;
  /// Real parts of the eigenvalues of M = DV^- - DV^+ at the DFE: the two of the leading
  /// 2x2 block, then delta, delta, delta + nu + A s*, delta + nu + A (s* - s).
  std::array<double, 6> h5_eigenvalues{};
  bool h5_holds = false;
  TheoremCase theorem_case = TheoremCase::CaseI;
};

/// Stability of `dfe` under constant controls.
///
/// Throws HypothesisViolation when (xi, b/delta) is not in the regime of the DFE kind.
/// A failed H5 check reports Marginal.
StabilityReport classify_stability(const Dfe& dfe, const ModelParams& p, const ControlVec& u);

}  // namespace ncsir
