#pragma once

// Profile ratios of separated infinity-harmonic functions.
//
// A separated solution u = f(r) g(theta) ... is governed by first order ODEs
// for the logarithmic derivative of each factor (G = g'/g, Phi = r f'/f,
// F = f'/f, H = h'/h). This header defines those ODEs, integrates them into
// ProfileTable objects and evaluates the antiderivative ("implicit") forms
// t + c = Psi(y) used as an independent cross-check.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "infharm/errors.hpp"

namespace infharm {

/// Blow-up cap on the magnitude of a profile ratio.
inline constexpr double kYMax = 1e8;
/// Smallest step the integrator accepts before declaring the trajectory ended.
inline constexpr double kHMin = 1e-13;

enum class OdeKind { PolarAngularG, PolarRadialPhi, CartesianF, SphericalPolarH };

inline const char* to_string(OdeKind kind) {
  switch (kind) {
    case OdeKind::PolarAngularG: return "PolarAngularG";
    case OdeKind::PolarRadialPhi: return "PolarRadialPhi";
    case OdeKind::CartesianF: return "CartesianF";
    case OdeKind::SphericalPolarH: return "SphericalPolarH";
  }
  return "?";
}

/// One of the four profile ODEs together with its coefficients.
///
/// PolarAngularG uses `a` (= A), PolarRadialPhi uses `b` (= B, or C in the
/// spherical case iii), CartesianF uses `s` (= sum of A_i^2 over i != j) and
/// SphericalPolarH uses the pair (a, b). Build through the named factories;
/// they enforce finiteness and S >= 0.
struct OdeSpec {
  OdeKind kind = OdeKind::CartesianF;
  double a = 0.0;
  double b = 0.0;
  double s = 0.0;

  static OdeSpec polar_angular(double A) { return checked({OdeKind::PolarAngularG, A, 0.0, 0.0}); }
  static OdeSpec polar_radial(double B) { return checked({OdeKind::PolarRadialPhi, 0.0, B, 0.0}); }
  static OdeSpec cartesian(double S) { return checked({OdeKind::CartesianF, 0.0, 0.0, S}); }
  static OdeSpec spherical_polar(double A, double B) {
    return checked({OdeKind::SphericalPolarH, A, B, 0.0});
  }

 private:
  static OdeSpec checked(OdeSpec spec) {
    if (!std::isfinite(spec.a) || !std::isfinite(spec.b) || !std::isfinite(spec.s))
      throw DomainError("OdeSpec coefficients must be finite");
    if (spec.s < 0.0) throw DomainError("CartesianF requires S >= 0");
    return spec;
  }
};

/// y^2 * y'(t), the numerator shared by every profile ODE.
inline double ode_numerator(const OdeSpec& spec, double t, double y) {
  const double y2 = y * y;
  switch (spec.kind) {
    case OdeKind::PolarAngularG: {
      const double A = spec.a;
      return -(A * A + y2) * (A * A - A + y2);
    }
    case OdeKind::PolarRadialPhi: {
      const double B2 = spec.b * spec.b;
      return -(y2 + B2) * (y2 - y + B2);
    }
    case OdeKind::CartesianF: {
      const double q = spec.s + y2;
      return -q * q;
    }
    case OdeKind::SphericalPolarH: {
      const double A = spec.a;
      const double sn = std::sin(t);
      const double B2s = spec.b * spec.b / (sn * sn);
      return spec.b * spec.b * std::cos(t) / (sn * sn * sn) * y -
             (A * A - A + B2s + y2) * (A * A + B2s + y2);
    }
  }
  return 0.0;
}

/// Derivative of the profile ratio, y' = numerator / y^2.
inline double ode_rhs(const OdeSpec& spec, double t, double y) {
  if (y == 0.0 || !std::isfinite(y)) throw DomainError("ode_rhs: profile ratio must be finite and nonzero");
  if (spec.kind == OdeKind::SphericalPolarH && std::sin(t) == 0.0)
    throw DomainError("ode_rhs: sin(t) = 0 for SphericalPolarH");
  return ode_numerator(spec, t, y) / (y * y);
}

/// dt/dy = y^2 / numerator; regular through y = 0 whenever the numerator is.
inline double ode_inverse_rhs(const OdeSpec& spec, double t, double y) {
  if (spec.kind == OdeKind::PolarAngularG && spec.a * spec.a - spec.a == 0.0 && spec.a != 0.0)
    return -1.0 / (spec.a * spec.a + y * y);
  const double num = ode_numerator(spec, t, y);
  if (num == 0.0) return y == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                  : std::copysign(std::numeric_limits<double>::infinity(), -1.0);
  return y * y / num;
}

// ---------------------------------------------------------------------------
// ProfileTable
// ---------------------------------------------------------------------------

enum class StopReason { Limit, BlowUp, StepUnderflow, Turning, Equilibrium };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Limit: return "limit";
    case StopReason::BlowUp: return "blow-up";
    case StopReason::StepUnderflow: return "step-underflow";
    case StopReason::Turning: return "turning";
    case StopReason::Equilibrium: return "equilibrium";
  }
  return "?";
}

struct IntegrationOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  /// Upper bound on node spacing; keeps interpolation error far below
  /// second-difference truncation error at the verifier's step sizes.
  double max_step = 1e-3;
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  /// |y| below which a trajectory heading for zero switches to y as the
  /// independent variable so it can pass through the sign change.
  double crossing_band = 0.1;
  /// Node cap per side; trajectories approaching an equilibrium never stop otherwise.
  std::size_t max_nodes = 1'000'000;
  /// Autonomous trajectories stop once |y'| falls below this: y is then within
  /// a few ulps of an equilibrium and the implicit relation is ill-conditioned.
  double stall_slope = 1e-6;
};

namespace detail {
struct TableAccess;
}

/// Tabulated profile ratio y(t) with its running integrals.
///
/// log_integral(t) = int_{t0}^{t} y, inverse_integral(t) = int_{t0}^{t} 1/y.
/// Immutable once built.
class ProfileTable {
 public:
  ProfileTable() = default;

  std::span<const double> nodes() const { return t_; }
  std::span<const double> values() const { return y_; }
  std::span<const double> slopes() const { return m_; }
  std::span<const double> log_integrals() const { return L_; }
  std::span<const double> inverse_integrals() const { return I_; }
  std::size_t size() const { return t_.size(); }

  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }
  double anchor_t() const { return anchor_t_; }
  double anchor_y() const { return anchor_y_; }
  StopReason stop_low() const { return stop_lo_; }
  StopReason stop_high() const { return stop_hi_; }
  const OdeSpec& spec() const { return spec_; }

  bool contains(double t, double pad = 0.0) const {
    return !t_.empty() && t >= t_min() + pad && t <= t_max() - pad;
  }

  /// Profile ratio at t (cubic Hermite on stored values and ODE slopes).
  double value(double t) const {
    const auto k = locate(t);
    const double h = t_[k + 1] - t_[k];
    const double s = (t - t_[k]) / h;
    if (!hermite_ok(k, h)) return y_[k] + s * (y_[k + 1] - y_[k]);
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[k] + (s3 - 2 * s2 + s) * h * m_[k] + (-2 * s3 + 3 * s2) * y_[k + 1] +
           (s3 - s2) * h * m_[k + 1];
  }

  /// Exact integral of the interpolant, so d/dt log_integral(t) = value(t).
  double log_integral(double t) const {
    const auto k = locate(t);
    const double h = t_[k + 1] - t_[k];
    const double s = (t - t_[k]) / h;
    if (!hermite_ok(k, h)) return L_[k] + h * (s * y_[k] + 0.5 * s * s * (y_[k + 1] - y_[k]));
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    const double i00 = 0.5 * s4 - s3 + s;
    const double i10 = 0.25 * s4 - (2.0 / 3.0) * s3 + 0.5 * s2;
    const double i01 = -0.5 * s4 + s3;
    const double i11 = 0.25 * s4 - s3 / 3.0;
    return L_[k] + h * (i00 * y_[k] + i10 * h * m_[k] + i01 * y_[k + 1] + i11 * h * m_[k + 1]);
  }

 private:
  friend struct detail::TableAccess;

  std::size_t locate(double t) const {
    if (!(t >= t_min() && t <= t_max()))
      throw DomainError("ProfileTable: t = " + std::to_string(t) + " outside [" + std::to_string(t_min()) +
                        ", " + std::to_string(t_max()) + "]");
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    auto k = static_cast<std::size_t>(it - t_.begin());
    if (k == 0) k = 1;
    if (k >= t_.size()) k = t_.size() - 1;
    return k - 1;
  }

  bool hermite_ok(std::size_t k, double h) const {
    const double m0 = m_[k], m1 = m_[k + 1];
    if (!std::isfinite(m0) || !std::isfinite(m1)) return false;
    const double scale = 4.0 * std::max({std::abs(y_[k]), std::abs(y_[k + 1]), std::abs(y_[k + 1] - y_[k])});
    return std::abs(m0) * h <= scale && std::abs(m1) * h <= scale;
  }

  OdeSpec spec_{};
  std::vector<double> t_, y_, m_, L_, I_;
  double anchor_t_ = 0.0;
  double anchor_y_ = 0.0;
  StopReason stop_lo_ = StopReason::Limit;
  StopReason stop_hi_ = StopReason::Limit;
};

namespace detail {

struct Node {
  double t, y, m, L, I;
};

// Dormand-Prince 5(4) tableau.
inline constexpr std::array<double, 7> kDpC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kDpA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
inline constexpr std::array<double, 7> kDpB{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                                            11.0 / 84, 0.0};
inline constexpr std::array<double, 7> kDpE{71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                                            -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

using State = std::array<double, 3>;

/// One embedded step. Returns false if the right-hand side was not finite at
/// some stage (or `guard` rejected a stage state).
template <class Rhs, class Guard>
bool dp_step(Rhs&& rhs, Guard&& guard, double x, const State& s, double h, State& out, double& err,
             double atol, double rtol) {
  std::array<State, 7> k{};
  for (int i = 0; i < 7; ++i) {
    State st = s;
    for (int j = 0; j < i; ++j)
      for (int q = 0; q < 3; ++q) st[q] += h * kDpA[i][j] * k[j][q];
    if (!guard(st)) return false;
    k[i] = rhs(x + kDpC[i] * h, st);
    for (double v : k[i])
      if (!std::isfinite(v)) return false;
  }
  err = 0.0;
  for (int q = 0; q < 3; ++q) {
    double y5 = s[q], e = 0.0;
    for (int i = 0; i < 7; ++i) {
      y5 += h * kDpB[i] * k[i][q];
      e += h * kDpE[i] * k[i][q];
    }
    out[q] = y5;
    const double sc = atol + rtol * std::max(std::abs(s[q]), std::abs(y5));
    err = std::max(err, std::abs(e) / sc);
  }
  return true;
}

inline double step_factor(double err) {
  if (err == 0.0) return 5.0;
  return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

inline bool crossable(const OdeSpec& spec, double t, double y) {
  const double g = ode_inverse_rhs(spec, t, std::copysign(1e-8, y));
  return std::isfinite(g) && std::abs(g) < 1e6;
}

/// Marches from (t0, y0) in direction dir; the first node is the anchor.
inline std::vector<Node> march(const OdeSpec& spec, double t0, double y0, int dir, const IntegrationOptions& opt,
                               StopReason& reason) {
  const double limit = dir > 0 ? opt.t_hi : opt.t_lo;
  std::vector<Node> out;
  out.push_back({t0, y0, ode_rhs(spec, t0, y0), 0.0, 0.0});
  double t = t0;
  State s{y0, 0.0, 0.0};
  double h = std::min(opt.max_step, 1e-4);
  double hy = opt.crossing_band / 8.0;

  const auto t_rhs = [&](double x, const State& st) -> State {
    const double y = st[0];
    return {ode_numerator(spec, x, y) / (y * y), y, 1.0 / y};
  };

  for (;;) {
    if (std::abs(limit - t) <= 1e-14 * std::max(1.0, std::abs(t)) || out.size() >= opt.max_nodes) {
      reason = StopReason::Limit;
      break;
    }
    const double y = s[0];
    const double yp = ode_rhs(spec, t, y);
    if (std::abs(y) < opt.crossing_band && y * yp * dir < 0.0 && crossable(spec, t, y)) {
      // Pass through y = 0 using y as the independent variable.
      const double y_end = -std::copysign(opt.crossing_band, y);
      const double ydir = y_end > y ? 1.0 : -1.0;
      double yc = y;
      State cs{t, s[1], s[2]};
      const auto y_rhs = [&](double yy, const State& st) -> State {
        const double g = ode_inverse_rhs(spec, st[0], yy);
        return {g, yy * g, yy != 0.0 ? g / yy : 0.0};
      };
      const auto in_range = [&](const State& st) {
        return (dir > 0 ? st[0] <= limit : st[0] >= limit) &&
               !(spec.kind == OdeKind::SphericalPolarH && std::sin(st[0]) == 0.0);
      };
      bool stopped = false;
      while (yc != y_end) {
        const double g0 = ode_inverse_rhs(spec, cs[0], yc);
        double cap = opt.crossing_band / 8.0;
        if (std::isfinite(g0) && g0 != 0.0) cap = std::min(cap, opt.max_step / std::abs(g0));
        double step = std::min({hy, cap, std::abs(y_end - yc)});
        if (step < kHMin) {
          reason = StopReason::StepUnderflow;
          stopped = true;
          break;
        }
        State ns{};
        double err = 0.0;
        if (!dp_step(y_rhs, in_range, yc, cs, ydir * step, ns, err, opt.abs_tol, opt.rel_tol) || err > 1.0) {
          hy = step * (err > 1.0 ? step_factor(err) : 0.25);
          continue;
        }
        hy = step * step_factor(err);
        const double ynew = (step == std::abs(y_end - yc)) ? y_end : yc + ydir * step;
        if ((ns[0] - cs[0]) * dir <= 0.0) {
          reason = StopReason::Turning;
          stopped = true;
          break;
        }
        if (!in_range(ns)) {
          reason = StopReason::Limit;
          stopped = true;
          break;
        }
        yc = ynew;
        cs = ns;
        const double g = ode_inverse_rhs(spec, cs[0], yc);
        const double slope = (g != 0.0 && std::isfinite(g)) ? 1.0 / g : std::numeric_limits<double>::infinity();
        out.push_back({cs[0], yc, slope, cs[1], cs[2]});
      }
      if (stopped) break;
      t = cs[0];
      s = {yc, cs[1], cs[2]};
      h = std::min(h, opt.max_step);
      continue;
    }

    double step = std::min({h, opt.max_step, std::abs(limit - t)});
    if (step < kHMin) {
      reason = StopReason::StepUnderflow;
      break;
    }
    const double sgn = y > 0 ? 1.0 : -1.0;
    const auto same_sign = [&](const State& st) { return st[0] * sgn > 0.0; };
    State ns{};
    double err = 0.0;
    if (!dp_step(t_rhs, same_sign, t, s, dir * step, ns, err, opt.abs_tol, opt.rel_tol) || !same_sign(ns) ||
        err > 1.0) {
      h = step * (err > 1.0 ? step_factor(err) : 0.25);
      continue;
    }
    h = step * step_factor(err);
    t = (step == std::abs(limit - t)) ? limit : t + dir * step;
    s = ns;
    out.push_back({t, s[0], ode_numerator(spec, t, s[0]) / (s[0] * s[0]), s[1], s[2]});
    if (std::abs(s[0]) > kYMax) {
      reason = StopReason::BlowUp;
      break;
    }
    if (spec.kind != OdeKind::SphericalPolarH && std::abs(out.back().m) < opt.stall_slope) {
      reason = StopReason::Equilibrium;
      break;
    }
  }
  return out;
}

struct TableAccess {
  static ProfileTable make(const OdeSpec& spec, double t0, double y0, const std::vector<Node>& nodes,
                           StopReason lo, StopReason hi) {
    ProfileTable tab;
    tab.spec_ = spec;
    tab.anchor_t_ = t0;
    tab.anchor_y_ = y0;
    tab.stop_lo_ = lo;
    tab.stop_hi_ = hi;
    for (const auto& n : nodes) {
      tab.t_.push_back(n.t);
      tab.y_.push_back(n.y);
      tab.m_.push_back(n.m);
      tab.L_.push_back(n.L);
      tab.I_.push_back(n.I);
    }
    if (tab.t_.size() < 2) throw DomainError("integrate_profile: trajectory ends at its anchor");
    return tab;
  }
};

}  // namespace detail

/// Integrates one side of a profile trajectory from `anchor` = (t0, y0).
/// Stops without error at blow-up, step underflow or the option limits; the
/// stopping point becomes the table's interval endpoint.
inline ProfileTable integrate_profile(const OdeSpec& spec, std::pair<double, double> anchor, int direction,
                                      const IntegrationOptions& opt = {}) {
  const auto [t0, y0] = anchor;
  if (!std::isfinite(t0) || !std::isfinite(y0) || y0 == 0.0)
    throw DomainError("integrate_profile: anchor must be finite with y0 != 0");
  if (!(opt.abs_tol > 0.0) || !(opt.rel_tol > 0.0) || !(opt.max_step > 0.0))
    throw DomainError("integrate_profile: tolerances must be positive");
  if (direction != 1 && direction != -1) throw DomainError("integrate_profile: direction must be +1 or -1");
  if (t0 < opt.t_lo || t0 > opt.t_hi) throw DomainError("integrate_profile: anchor outside limits");
  if (spec.kind == OdeKind::SphericalPolarH && std::sin(t0) == 0.0)
    throw DomainError("integrate_profile: sin(t0) = 0");

  StopReason reason{};
  auto nodes = detail::march(spec, t0, y0, direction, opt, reason);
  if (direction < 0) std::reverse(nodes.begin(), nodes.end());

  return detail::TableAccess::make(spec, t0, y0, nodes, direction < 0 ? reason : StopReason::Limit,
                                   direction > 0 ? reason : StopReason::Limit);
}

/// Both sides of the trajectory through `anchor`, merged into one table.
inline ProfileTable integrate_profile_both(const OdeSpec& spec, std::pair<double, double> anchor,
                                           const IntegrationOptions& opt = {}) {
  const auto [t0, y0] = anchor;
  if (!std::isfinite(t0) || !std::isfinite(y0) || y0 == 0.0)
    throw DomainError("integrate_profile: anchor must be finite with y0 != 0");
  StopReason lo_reason{}, hi_reason{};
  auto back = detail::march(spec, t0, y0, -1, opt, lo_reason);
  auto fwd = detail::march(spec, t0, y0, +1, opt, hi_reason);
  std::reverse(back.begin(), back.end());
  back.pop_back();
  back.insert(back.end(), fwd.begin(), fwd.end());

  return detail::TableAccess::make(spec, t0, y0, back, lo_reason, hi_reason);
}

// ---------------------------------------------------------------------------
// Implicit relations t + c = Psi(y)
// ---------------------------------------------------------------------------

enum class RelationCase {
  AngularPositive,  // A^2 - A > 0
  AngularZero,      // A = 0
  AngularOne,       // A = 1
  AngularNegative,  // A^2 - A < 0
  RadialPositive,   // B^2 - 1/4 > 0
  RadialCritical,   // B^2 - 1/4 = 0
  RadialNegative,   // B^2 - 1/4 < 0
  CartesianZero,    // S = 0
  CartesianPositive // S > 0
};

inline const char* to_string(RelationCase c) {
  switch (c) {
    case RelationCase::AngularPositive: return "thm1ii:A2-A>0";
    case RelationCase::AngularZero: return "thm1ii:A=0";
    case RelationCase::AngularOne: return "thm1ii:A=1";
    case RelationCase::AngularNegative: return "thm1ii:A2-A<0";
    case RelationCase::RadialPositive: return "thm1iii:B2-1/4>0";
    case RelationCase::RadialCritical: return "thm1iii:B2-1/4=0";
    case RelationCase::RadialNegative: return "thm1iii:B2-1/4<0";
    case RelationCase::CartesianZero: return "thm3:S=0";
    case RelationCase::CartesianPositive: return "thm3:S>0";
  }
  return "?";
}

inline constexpr double kCaseTol = 1e-12;

/// Antiderivative form of a profile ODE. For the radial case the abscissa is
/// s = ln r, matching the tables built from PolarRadialPhi.
class ImplicitRelation {
 public:
  /// Throws DomainError when `coef` does not belong to `case_tag`.
  ImplicitRelation(RelationCase case_tag, double coef, double c = 0.0) : case_(case_tag), coef_(coef), c_(c) {
    if (!std::isfinite(coef) || !std::isfinite(c)) throw DomainError("ImplicitRelation: non-finite parameter");
    if (case_from(case_family(case_tag), coef) != case_tag)
      throw DomainError(std::string("ImplicitRelation: coefficient inconsistent with case ") + to_string(case_tag));
  }

  /// Relation matching an ODE; the case is classified from the coefficient.
  static ImplicitRelation for_ode(const OdeSpec& spec, double c = 0.0) {
    switch (spec.kind) {
      case OdeKind::PolarAngularG: return {case_from(0, spec.a), spec.a, c};
      case OdeKind::PolarRadialPhi: return {case_from(1, spec.b), spec.b, c};
      case OdeKind::CartesianF: return {case_from(2, spec.s), spec.s, c};
      case OdeKind::SphericalPolarH: break;
    }
    throw DomainError("ImplicitRelation: SphericalPolarH has no closed antiderivative form");
  }

  RelationCase case_tag() const { return case_; }
  double coef() const { return coef_; }
  double c() const { return c_; }
  ImplicitRelation with_c(double c) const { return {case_, coef_, c}; }

  /// Psi(y). Throws DomainError outside the branch domain.
  double psi(double y) const {
    if (!std::isfinite(y)) throw DomainError("Psi: non-finite argument");
    const double A = coef_;
    switch (case_) {
      case RelationCase::AngularPositive: {
        const double k = std::sqrt(A * A - A);
        return -std::atan(y / A) + (A - 1.0) / k * std::atan(y / k);
      }
      case RelationCase::AngularZero:
      case RelationCase::CartesianZero:
        if (y == 0.0) throw DomainError("Psi: y = 0 outside branch domain");
        return 1.0 / y;
      case RelationCase::AngularOne: return -std::atan(y);
      case RelationCase::AngularNegative: {
        const double k = std::sqrt(A - A * A);
        const double ratio = (y - k) / (y + k);
        if (y + k == 0.0 || ratio == 0.0) throw DomainError("Psi: |G| = sqrt(A - A^2) outside branch domain");
        return -std::atan(y / A) + (A - 1.0) / (2.0 * k) * std::log(std::abs(ratio));
      }
      case RelationCase::RadialPositive:
      case RelationCase::RadialCritical:
      case RelationCase::RadialNegative: {
        const double B2 = A * A;
        const double num = y * y + B2;
        const double den = y * y - y + B2;
        if (num == 0.0 || den == 0.0) throw DomainError("Psi: logarithm argument vanishes");
        const double head = 0.5 * std::log(std::abs(num / den));
        if (case_ == RelationCase::RadialPositive) {
          const double k = std::sqrt(B2 - 0.25);
          return head - 0.5 / k * std::atan((y - 0.5) / k);
        }
        if (case_ == RelationCase::RadialCritical) return head + 0.5 / (y - 0.5);
        const double k = std::sqrt(0.25 - B2);
        return head - 0.25 / k * std::log(std::abs((y - 0.5 - k) / (y - 0.5 + k)));
      }
      case RelationCase::CartesianPositive: {
        const double q = std::sqrt(A);
        return -0.5 / q * std::atan(y / q) + y / (2.0 * (A + y * y));
      }
    }
    return 0.0;
  }

  /// Open y-intervals on which Psi is strictly monotone. The first entry is
  /// the preferred branch (the one that spans all t when such a branch exists).
  std::vector<std::pair<double, double>> branches() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double A = coef_;
    switch (case_) {
      case RelationCase::AngularPositive:
      case RelationCase::AngularOne:
      case RelationCase::RadialPositive:
      case RelationCase::CartesianPositive: return {{-inf, inf}};
      case RelationCase::AngularZero:
      case RelationCase::CartesianZero: return {{0.0, inf}, {-inf, 0.0}};
      case RelationCase::AngularNegative: {
        const double k = std::sqrt(A - A * A);
        return {{-k, k}, {k, inf}, {-inf, -k}};
      }
      case RelationCase::RadialCritical: return {{-inf, 0.5}, {0.5, inf}};
      case RelationCase::RadialNegative: {
        const double k = std::sqrt(0.25 - A * A);
        return {{0.5 - k, 0.5 + k}, {0.5 + k, inf}, {-inf, 0.5 - k}};
      }
    }
    return {};
  }

 private:
  static int case_family(RelationCase c) {
    switch (c) {
      case RelationCase::AngularPositive:
      case RelationCase::AngularZero:
      case RelationCase::AngularOne:
      case RelationCase::AngularNegative: return 0;
      case RelationCase::RadialPositive:
      case RelationCase::RadialCritical:
      case RelationCase::RadialNegative: return 1;
      default: return 2;
    }
  }

  static RelationCase case_from(int family, double v) {
    if (family == 0) {
      if (std::abs(v) <= kCaseTol) return RelationCase::AngularZero;
      if (std::abs(v - 1.0) <= kCaseTol) return RelationCase::AngularOne;
      return v * v - v > 0.0 ? RelationCase::AngularPositive : RelationCase::AngularNegative;
    }
    if (family == 1) {
      const double d = v * v - 0.25;
      if (std::abs(d) <= kCaseTol) return RelationCase::RadialCritical;
      return d > 0.0 ? RelationCase::RadialPositive : RelationCase::RadialNegative;
    }
    return v <= kCaseTol ? RelationCase::CartesianZero : RelationCase::CartesianPositive;
  }

  RelationCase case_;
  double coef_;
  double c_;
};

/// t + c - Psi(y); zero on exact trajectories.
inline double implicit_residual(const ImplicitRelation& rel, double t, double y) {
  return t + rel.c() - rel.psi(y);
}

inline constexpr int kMonotoneProbes = 16;

/// Solves t + c = Psi(y) for y in [lo, hi] with a safeguarded secant /
/// bisection iteration.
inline double invert_implicit(const ImplicitRelation& rel, double t, std::pair<double, double> bracket) {
  auto [lo, hi] = bracket;
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw BracketError("invert_implicit: need finite lo < hi");
  const auto f = [&](double y) { return t + rel.c() - rel.psi(y); };

  // Monotonicity probe.
  int dir = 0;
  double prev = rel.psi(lo);
  for (int i = 1; i < kMonotoneProbes; ++i) {
    const double y = lo + (hi - lo) * i / (kMonotoneProbes - 1);
    const double cur = rel.psi(y);
    const double slack = 1e-14 * std::max({1.0, std::abs(prev), std::abs(cur)});
    if (cur > prev + slack) {
      if (dir < 0) throw NonMonotoneError("invert_implicit: Psi is not monotone on the bracket");
      dir = 1;
    } else if (cur < prev - slack) {
      if (dir > 0) throw NonMonotoneError("invert_implicit: Psi is not monotone on the bracket");
      dir = -1;
    }
    prev = cur;
  }

  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw BracketError("invert_implicit: bracket does not straddle t + c");

  double best = std::abs(flo) < std::abs(fhi) ? lo : hi;
  double fbest = std::min(std::abs(flo), std::abs(fhi));
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    double y = hi - fhi * (hi - lo) / (fhi - flo);
    // Fall back to bisection when the secant point is outside or hugs an end.
    const double w = hi - lo;
    if (!(y > lo + 0.01 * w && y < hi - 0.01 * w) || it % 4 == 3) y = mid;
    if (y <= lo || y >= hi) break;
    const double fy = f(y);
    if (std::abs(fy) < fbest) {
      fbest = std::abs(fy);
      best = y;
    }
    if (fy == 0.0 || fbest <= 1e-13) return best;
    if ((fy > 0.0) == (flo > 0.0)) {
      lo = y;
      flo = fy;
    } else {
      hi = y;
      fhi = fy;
    }
  }
  return best;
}

/// Solves t + c = Psi(y) on a monotone branch, expanding a finite bracket
/// toward the branch ends. Throws BracketError when t + c is outside the
/// branch image.
inline double solve_on_branch(const ImplicitRelation& rel, double t, std::pair<double, double> branch) {
  const auto [blo, bhi] = branch;
  const double target = t + rel.c();
  // Interior seed.
  double seed;
  if (std::isfinite(blo) && std::isfinite(bhi)) seed = 0.5 * (blo + bhi);
  else if (std::isfinite(blo)) seed = blo + 1.0;
  else if (std::isfinite(bhi)) seed = bhi - 1.0;
  else seed = 0.0;
  if (seed == 0.0 && (rel.case_tag() == RelationCase::AngularZero || rel.case_tag() == RelationCase::CartesianZero))
    seed = std::isfinite(blo) ? 1.0 : -1.0;

  const auto toward = [&](double end, int k) {
    if (std::isfinite(end)) return end + (seed - end) * std::ldexp(1.0, -k);
    return seed + std::copysign(std::ldexp(1.0, k - 4), end);
  };
  const auto value = [&](double y) {
    try {
      return rel.psi(y);
    } catch (const DomainError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  const double ps = value(seed);
  if (ps == target) return seed;
  double lo = seed, hi = seed;
  // Psi moves monotonically away from seed toward each end; pick the side.
  for (int k = 1; k <= 60; ++k) {
    const double ylo = toward(blo, k), yhi = toward(bhi, k);
    const double vlo = value(ylo), vhi = value(yhi);
    if (std::isfinite(vlo) && ((vlo - target) > 0.0) != ((ps - target) > 0.0)) {
      lo = ylo;
      hi = seed;
      break;
    }
    if (std::isfinite(vhi) && ((vhi - target) > 0.0) != ((ps - target) > 0.0)) {
      lo = seed;
      hi = yhi;
      break;
    }
  }
  if (lo == hi) throw BracketError("solve_on_branch: t + c outside the branch image");
  return invert_implicit(rel, t, {lo, hi});
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// Real odd-root power sign(x) |x|^p.
inline double odd_pow(double x, double p) { return std::copysign(std::pow(std::abs(x), p), x); }

/// Closed-form angular ratio G = g'/g of the Aronsson solution (A = 4/3).
inline double aronsson_G(double t, double c = 0.0) {
  const double x = t + c;
  const double cs = std::cos(x);
  if (std::abs(cs) <= 1e-15) throw PoleError("aronsson_G: cos(t + c) = 0");
  const double T = std::tan(x);
  const double den = 1.0 - T * T;
  if (std::abs(den) <= 1e-12) throw PoleError("aronsson_G: tan^2(t + c) = 1");
  const double r = std::cbrt(T);
  const double r5 = r * r * r * r * r;
  return -4.0 / 3.0 * (r + r5 + T) / den;
}

/// Constant of the first integral of the spherical polar-angle ODE
///   |A^2 - A + B^2/sin^2 t + H^2| = c (A^2 + B^2/sin^2 t + H^2) exp(-2A int 1/H),
/// solved for c. `int_inv_h` is int_{t0}^{t} 1/H along the trajectory.
inline double first_integral_thm4i(double A, double B, double t, double H, double int_inv_h) {
  const double sn = std::sin(t);
  if (sn == 0.0) throw DomainError("first_integral_thm4i: sin(t) = 0");
  const double b2 = B * B / (sn * sn);
  const double q = A * A + b2 + H * H;
  if (!(q > 0.0)) throw DomainError("first_integral_thm4i: A^2 + B^2/sin^2 t + H^2 must be positive");
  return std::abs(A * A - A + b2 + H * H) * std::exp(2.0 * A * int_inv_h) / q;
}

}  // namespace infharm
