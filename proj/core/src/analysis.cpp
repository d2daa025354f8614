#include "ncsir/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ncsir/error.hpp"

namespace ncsir {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kResidualTol = 1e-10;
// Relative closeness at which b/delta is taken to sit on the mixing threshold.
constexpr double kEdgeTol = 1e-12;
// Smallest eigenvalue real part still counted as positive for H5.
constexpr double kH5Tol = 1e-12;

double spread_gap(const ModelParams& p, const ControlVec& u) { return p.mu_bar - u.mu; }

void check_inputs(const ModelParams& p, const ControlVec& u) {
  p.validate();
  u.validate(p, 1e-12);
}

}  // namespace

Matrix2 Matrix2::inverse() const {
  const double d = det();
  if (d == 0.0 || !std::isfinite(d)) throw InvalidArgument("Matrix2::inverse: singular matrix");
  return {a22 / d, -a12 / d, -a21 / d, a11 / d};
}

Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

std::array<double, 2> Matrix2::eigenvalue_real_parts() const {
  const double half_tr = 0.5 * trace();
  const double disc = half_tr * half_tr - det();
  if (disc < 0.0) return {half_tr, half_tr};
  const double r = std::sqrt(disc);
  return {half_tr + r, half_tr - r};
}

double Matrix2::spectral_radius() const {
  const double half_tr = 0.5 * trace();
  const double disc = half_tr * half_tr - det();
  if (disc < 0.0) return std::sqrt(det());
  const double r = std::sqrt(disc);
  return std::max(std::abs(half_tr + r), std::abs(half_tr - r));
}

std::string_view to_string(DfeKind kind) {
  switch (kind) {
    case DfeKind::ComplianceOnly: return "ComplianceOnly";
    case DfeKind::MixedXiZero: return "MixedXiZero";
    case DfeKind::MixedXiPositive: return "MixedXiPositive";
  }
  return "?";
}

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "Stable";
    case Stability::Unstable: return "Unstable";
    case Stability::Marginal: return "Marginal";
  }
  return "?";
}

std::string_view to_string(TheoremCase c) {
  switch (c) {
    case TheoremCase::CaseI: return "CaseI";
    case TheoremCase::CaseII: return "CaseII";
    case TheoremCase::CaseIII: return "CaseIII";
  }
  return "?";
}

double mixing_threshold(const ModelParams& p, const ControlVec& u) {
  const double gap = spread_gap(p, u);
  if (gap <= 0.0) return kInf;
  return (u.nu + p.delta) / gap;
}

std::array<double, 2> dfe_residual(double s, double s_star, const ModelParams& p, const ControlVec& u) {
  const double gap = spread_gap(p, u);
  return {(1.0 - p.xi) * p.b - gap * s * s_star + u.nu * s_star - p.delta * s,
          p.xi * p.b + gap * s * s_star - u.nu * s_star - p.delta * s_star};
}

std::vector<Dfe> compute_dfes(const ModelParams& p, const ControlVec& u) {
  check_inputs(p, u);
  const double k = p.capacity();
  const double gap = spread_gap(p, u);
  const double threshold = mixing_threshold(p, u);

  std::vector<Dfe> out;
  if (p.xi == 0.0) {
    out.push_back({k, 0.0, DfeKind::ComplianceOnly});
    if (gap > 0.0 && k > threshold) out.push_back({threshold, k - threshold, DfeKind::MixedXiZero});
    return out;
  }

  if (gap <= 0.0) {
    // mu = mu_bar: no transfer term, both equations are linear.
    const double s_star = p.xi * p.b / (u.nu + p.delta);
    out.push_back({k - s_star, s_star, DfeKind::MixedXiPositive});
    return out;
  }

  // s* solves z^2 - (k - T) z - xi b / A = 0 and s = k - s*; both roots are taken in
  // cancellation-free form.
  const double diff = k - threshold;
  const double disc = std::sqrt(diff * diff + 4.0 * p.xi * p.b / gap);
  const double s = 2.0 * (p.b / gap) * (u.nu / p.delta + 1.0 - p.xi) / (k + threshold + disc);
  const double s_star = diff >= 0.0 ? 0.5 * (diff + disc) : 2.0 * p.xi * p.b / gap / (disc - diff);
  out.push_back({s, s_star, DfeKind::MixedXiPositive});
  return out;
}

NgmPair ngm_at(const Dfe& dfe, const ModelParams& p, const ControlVec& u) {
  check_inputs(p, u);
  const double gap = spread_gap(p, u);
  const double compliant = p.beta * (1.0 - u.alpha) * dfe.s;
  const double noncompliant = p.beta * dfe.s_star;
  NgmPair out;
  out.F = {compliant, compliant, noncompliant, noncompliant};
  out.V = {p.gamma + u.eta + p.delta + gap * dfe.s_star, -u.nu, -gap * dfe.s_star, p.gamma + u.nu + p.delta};
  return out;
}

double reproductive_ratio(double s, double s_star, const ModelParams& p, const ControlVec& u) {
  const double gap = spread_gap(p, u);
  const double mixed = gap * s_star;
  const double denom_inner = p.gamma + u.eta + u.nu + p.delta + mixed;
  const double numer = p.beta * ((1.0 - u.alpha) * (p.gamma + u.nu + p.delta + mixed) * s + denom_inner * s_star);
  const double denom = (p.gamma + p.delta) * denom_inner + u.eta * u.nu;
  return numer / denom;
}

StabilityReport classify_stability(const Dfe& dfe, const ModelParams& p, const ControlVec& u) {
  check_inputs(p, u);
  const double k = p.capacity();
  const double threshold = mixing_threshold(p, u);
  const bool on_edge = std::isfinite(threshold) && std::abs(k - threshold) <= kEdgeTol * std::max(k, threshold);

  StabilityReport report;
  report.dfe = dfe;
  switch (dfe.kind) {
    case DfeKind::ComplianceOnly:
      if (p.xi != 0.0) throw HypothesisViolation("ComplianceOnly DFE requires xi = 0");
      if (k > threshold && !on_edge) {
        throw HypothesisViolation("ComplianceOnly DFE requires b/delta < (nu+delta)/(mu_bar-mu), got " +
                                  std::to_string(k) + " >= " + std::to_string(threshold));
      }
      report.theorem_case = TheoremCase::CaseI;
      break;
    case DfeKind::MixedXiZero:
      if (p.xi != 0.0) throw HypothesisViolation("MixedXiZero DFE requires xi = 0");
      if (!std::isfinite(threshold)) throw HypothesisViolation("MixedXiZero DFE requires mu < mu_bar");
      if (k < threshold && !on_edge) {
        throw HypothesisViolation("MixedXiZero DFE requires b/delta > (nu+delta)/(mu_bar-mu), got " +
                                  std::to_string(k) + " <= " + std::to_string(threshold));
      }
      report.theorem_case = TheoremCase::CaseII;
      break;
    case DfeKind::MixedXiPositive:
      if (!(p.xi > 0.0)) throw HypothesisViolation("MixedXiPositive DFE requires xi in (0, 1]");
      report.theorem_case = TheoremCase::CaseIII;
      break;
  }

  if (!(dfe.s >= 0.0 && dfe.s_star >= 0.0 && dfe.s <= k * (1.0 + 1e-12) && dfe.s_star <= k * (1.0 + 1e-12))) {
    throw InvalidArgument("classify_stability: DFE outside [0, b/delta]");
  }
  const auto res = dfe_residual(dfe.s, dfe.s_star, p, u);
  const double scale = std::max(1.0, p.b);
  if (std::abs(res[0]) > kResidualTol * scale || std::abs(res[1]) > kResidualTol * scale) {
    throw InvalidArgument("classify_stability: (s, s*) does not satisfy the DFE equations");
  }

  const NgmPair ngm = ngm_at(dfe, p, u);
  const auto block = ngm.V.eigenvalue_real_parts();
  const double gap = spread_gap(p, u);
  report.h5_eigenvalues = {block[0],
                           block[1],
                           p.delta,
                           p.delta,
                           p.delta + u.nu + gap * dfe.s_star,
                           p.delta + u.nu + gap * (dfe.s_star - dfe.s)};
  report.h5_holds = std::all_of(report.h5_eigenvalues.begin(), report.h5_eigenvalues.end(),
                                [](double l) { return l > kH5Tol; });
  if (on_edge && dfe.kind != DfeKind::MixedXiPositive) report.h5_holds = false;

  report.r0 = reproductive_ratio(dfe, p, u);
  if (!report.h5_holds) {
    report.classification = Stability::Marginal;
  } else if (report.r0 < 1.0 - kStabilityMargin) {
    report.classification = Stability::Stable;
  } else if (report.r0 > 1.0 + kStabilityMargin) {
    report.classification = Stability::Unstable;
  } else {
    report.classification = Stability::Marginal;
  }
  return report;
}

}  // namespace ncsir
