#pragma once

// Finite-difference infinity-Laplacian operators in Cartesian, polar and
// spherical coordinates, residual reports and convergence-order estimates.
// These form the independent oracle for every solution builder.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "infharm/coords.hpp"
#include "infharm/errors.hpp"
#include "infharm/solutions.hpp"

namespace infharm {

using Evaluator = std::function<double(std::span<const double>)>;

inline constexpr double kNormalizationEps = 1e-14;
inline constexpr double kMaxNormalizedResidual = 1e-6;
inline constexpr double kMinOrder = 1.7;
inline constexpr double kMaxOrder = 2.3;

inline std::vector<double> default_h_ladder() { return {1e-2, 5e-3, 2.5e-3, 1.25e-3}; }

/// Central-difference gradient and Hessian in the evaluator's own coordinates.
struct FdStencil {
  std::vector<double> grad;
  std::vector<double> hess;  // row-major n x n
  double umax = 0.0;         // max |u| over the stencil

  double d2(std::size_t i, std::size_t j) const { return hess[i * grad.size() + j]; }
};

inline FdStencil fd_stencil(const Evaluator& u, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw DomainError("fd: step must be positive");
  const std::size_t n = x.size();
  std::vector<double> p(x.begin(), x.end());
  FdStencil st;
  st.grad.assign(n, 0.0);
  st.hess.assign(n * n, 0.0);
  const auto at = [&](std::span<const double> q) {
    const double v = u(q);
    if (!std::isfinite(v)) throw DomainError("fd: evaluator returned a non-finite value");
    st.umax = std::max(st.umax, std::abs(v));
    return v;
  };
  const double u0 = at(p);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = x[i] + h;
    const double up = at(p);
    p[i] = x[i] - h;
    const double um = at(p);
    p[i] = x[i];
    st.grad[i] = (up - um) / (2 * h);
    st.hess[i * n + i] = (up - 2 * u0 + um) / (h * h);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          p[i] = x[i] + si * h;
          p[j] = x[j] + sj * h;
          acc += si * sj * at(p);
        }
      }
      p[i] = x[i];
      p[j] = x[j];
      st.hess[i * n + j] = st.hess[j * n + i] = acc / (4 * h * h);
    }
  }
  return st;
}

/// One evaluation of the operator at one step size.
struct FdResult {
  double raw = 0.0;         // |Delta_inf u|
  double normalized = 0.0;  // raw / (|grad u|^2 ||D^2 u||_F + eps)
  double floor = 0.0;       // rounding-noise level of raw at this h
};

namespace detail {

inline double noise_unit(const FdStencil& st, double h) {
  return 4.0 * std::numeric_limits<double>::epsilon() * st.umax / (h * h);
}

/// Physical gradient g and orthonormal-frame Hessian H; returns the result.
inline FdResult finish(const std::vector<double>& g, const std::vector<double>& H, double raw, double noise) {
  const std::size_t n = g.size();
  double g2 = 0.0, hf = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g2 += g[i] * g[i];
    for (std::size_t j = 0; j < n; ++j) hf += H[i * n + j] * H[i * n + j];
  }
  const double a = std::abs(raw);
  return {a, a / (g2 * std::sqrt(hf) + kNormalizationEps), 8.0 * noise};
}

}  // namespace detail

inline FdResult fd_infty_cartesian_full(const Evaluator& u, std::span<const double> x, double h) {
  const auto st = fd_stencil(u, x, h);
  const std::size_t n = x.size();
  double raw = 0.0, mag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      raw += st.grad[i] * st.grad[j] * st.d2(i, j);
      mag += std::abs(st.grad[i] * st.grad[j]);
    }
  return detail::finish(st.grad, st.hess, raw, mag * detail::noise_unit(st, h));
}

/// sum_ij D_i u D_j u D_ij u with second-order central differences.
inline double fd_infty_cartesian(const Evaluator& u, std::span<const double> x, double h) {
  const auto st = fd_stencil(u, x, h);
  double raw = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) raw += st.grad[i] * st.grad[j] * st.d2(i, j);
  return raw;
}

/// Polar operator for u(r, theta):
///   u_r^2 u_rr + 2/r^2 u_r u_t u_rt + 1/r^4 u_t^2 u_tt - 1/r^3 u_r u_t^2.
inline FdResult fd_infty_polar_full(const Evaluator& u, double r, double theta, double h) {
  if (!(r - h > 0.0)) throw DomainError("fd_infty_polar: stencil crosses r = 0");
  const double x[2] = {r, theta};
  const auto st = fd_stencil(u, x, h);
  const double ur = st.grad[0], ut = st.grad[1];
  const double urr = st.d2(0, 0), urt = st.d2(0, 1), utt = st.d2(1, 1);
  const double r2 = r * r, r3 = r2 * r, r4 = r2 * r2;
  const double raw = ur * ur * urr + 2.0 / r2 * ur * ut * urt + 1.0 / r4 * ut * ut * utt - 1.0 / r3 * ur * ut * ut;
  const double mag = ur * ur + 2.0 / r2 * std::abs(ur * ut) + ut * ut / r4;
  const std::vector<double> g{ur, ut / r};
  const double hrt = (urt - ut / r) / r;
  const std::vector<double> H{urr, hrt, hrt, utt / r2 + ur / r};
  return detail::finish(g, H, raw, mag * detail::noise_unit(st, h));
}

inline double fd_infty_polar(const Evaluator& u, double r, double theta, double h) {
  if (!(r - h > 0.0)) throw DomainError("fd_infty_polar: stencil crosses r = 0");
  const double x[2] = {r, theta};
  const auto st = fd_stencil(u, x, h);
  const double ur = st.grad[0], ut = st.grad[1];
  const double r2 = r * r;
  return ur * ur * st.d2(0, 0) + 2.0 / r2 * ur * ut * st.d2(0, 1) + 1.0 / (r2 * r2) * ut * ut * st.d2(1, 1) -
         1.0 / (r2 * r) * ur * ut * ut;
}

namespace detail {

inline double spherical_nine_terms(const FdStencil& st, double r, double alpha) {
  const double ur = st.grad[0], ut = st.grad[1], ua = st.grad[2];
  const double urr = st.d2(0, 0), urt = st.d2(0, 1), ura = st.d2(0, 2);
  const double utt = st.d2(1, 1), uta = st.d2(1, 2), uaa = st.d2(2, 2);
  const double s = std::sin(alpha), c = std::cos(alpha);
  const double r2 = r * r, r3 = r2 * r, r4 = r2 * r2, s2 = s * s;
  return ur * ur * urr + 2.0 / (r2 * s2) * ur * ut * urt + 1.0 / (r4 * s2 * s2) * ut * ut * utt -
         1.0 / (r3 * s2) * ur * ut * ut + 2.0 / r2 * ur * ua * ura + 1.0 / r4 * ua * ua * uaa -
         1.0 / r3 * ur * ua * ua + 2.0 / (r4 * s2) * ut * ua * uta - c / (r4 * s2 * s) * ua * ut * ut;
}

}  // namespace detail

/// Spherical operator for u(r, theta, alpha); theta azimuthal, alpha polar.
inline FdResult fd_infty_spherical_full(const Evaluator& u, double r, double theta, double alpha, double h) {
  if (!(r - h > 0.0)) throw DomainError("fd_infty_spherical: stencil crosses r = 0");
  if (!(alpha - h > 0.0 && alpha + h < std::numbers::pi))
    throw DomainError("fd_infty_spherical: stencil leaves alpha in (0, pi)");
  const double x[3] = {r, theta, alpha};
  const auto st = fd_stencil(u, x, h);
  const double raw = detail::spherical_nine_terms(st, r, alpha);
  const double ur = st.grad[0], ut = st.grad[1], ua = st.grad[2];
  const double s = std::sin(alpha), ct = std::cos(alpha) / s;
  // Orthonormal frame (e_r, e_theta, e_alpha).
  const std::vector<double> g{ur, ut / (r * s), ua / r};
  const double Hrr = st.d2(0, 0);
  const double Hrt = (st.d2(0, 1) - ut / r) / (r * s);
  const double Hra = (st.d2(0, 2) - ua / r) / r;
  const double Htt = st.d2(1, 1) / (r * r * s * s) + ur / r + ct * ua / (r * r);
  const double Hta = (st.d2(1, 2) - ct * ut) / (r * r * s);
  const double Haa = st.d2(2, 2) / (r * r) + ur / r;
  const std::vector<double> H{Hrr, Hrt, Hra, Hrt, Htt, Hta, Hra, Hta, Haa};
  double mag = 0.0;
  for (double gi : g)
    for (double gj : g) mag += std::abs(gi * gj);
  const double metric = std::max({1.0, 1.0 / (r * r), 1.0 / (r * r * s * s)});
  return detail::finish(g, H, raw, mag * metric * detail::noise_unit(st, h));
}

inline double fd_infty_spherical(const Evaluator& u, double r, double theta, double alpha, double h) {
  if (!(r - h > 0.0)) throw DomainError("fd_infty_spherical: stencil crosses r = 0");
  if (!(alpha - h > 0.0 && alpha + h < std::numbers::pi))
    throw DomainError("fd_infty_spherical: stencil leaves alpha in (0, pi)");
  const double x[3] = {r, theta, alpha};
  return detail::spherical_nine_terms(fd_stencil(u, x, h), r, alpha);
}

/// Least-squares slope of log(residual) against log(h). Returns +inf when any
/// residual is exactly zero (exact to machine precision).
inline double observed_order(std::span<const double> h, std::span<const double> res) {
  if (h.size() != res.size() || h.size() < 2) throw DomainError("observed_order: need >= 2 (h, residual) pairs");
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (res[i] == 0.0) return std::numeric_limits<double>::infinity();
    if (!(h[i] > 0.0) || !(res[i] > 0.0)) throw DomainError("observed_order: steps and residuals must be positive");
  }
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    mx += std::log(h[i]);
    my += std::log(res[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double dx = std::log(h[i]) - mx;
    sxy += dx * (std::log(res[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Solution-level verification
// ---------------------------------------------------------------------------

/// Evaluator in the solution's native coordinates.
inline Evaluator native_evaluator(const SeparatedSolution& sol) {
  return [&sol](std::span<const double> p) { return evaluate(sol, p); };
}

/// u composed with the Cartesian -> native map; angles are unwrapped around
/// the reference point so that stencils near it stay on one branch.
inline Evaluator cartesian_evaluator(const SeparatedSolution& sol, std::span<const double> ref) {
  const double theta_ref = sol.system() == CoordinateSystem::CartesianND ? 0.0 : ref[1];
  return [&sol, theta_ref](std::span<const double> x) {
    const auto unwrap = [&](double a) { return theta_ref + std::remainder(a - theta_ref, 2.0 * std::numbers::pi); };
    switch (sol.system()) {
      case CoordinateSystem::Polar2D: {
        const double p[2] = {std::hypot(x[0], x[1]), unwrap(std::atan2(x[1], x[0]))};
        return evaluate(sol, p);
      }
      case CoordinateSystem::Spherical3D: {
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        const double p[3] = {r, unwrap(std::atan2(x[1], x[0])), std::acos(std::clamp(x[2] / r, -1.0, 1.0))};
        return evaluate(sol, p);
      }
      case CoordinateSystem::CartesianND: break;
    }
    return evaluate(sol, x);
  };
}

inline FdResult fd_native(const SeparatedSolution& sol, const Evaluator& u, std::span<const double> p, double h) {
  switch (sol.system()) {
    case CoordinateSystem::Polar2D: return fd_infty_polar_full(u, p[0], p[1], h);
    case CoordinateSystem::Spherical3D: return fd_infty_spherical_full(u, p[0], p[1], p[2], h);
    case CoordinateSystem::CartesianND: break;
  }
  return fd_infty_cartesian_full(u, p, h);
}

struct ResidualReport {
  std::vector<double> point;
  std::vector<double> steps;
  std::vector<double> raw;
  std::vector<double> normalized;
  std::vector<double> floor;
  /// Normalized residual of u composed with the Cartesian map (curvilinear systems only).
  std::vector<double> cartesian_normalized;
  double observed_order = 0.0;
  /// Every raw residual is at or below its rounding floor.
  bool exact = false;
};

struct VerifySummary {
  double max_normalized = 0.0;  // at the smallest step, over non-exact points
  double median_order = 0.0;    // over non-exact points; +inf if all exact
  double max_coordinate_mismatch = 0.0;
  std::size_t exact_points = 0;
  bool all_exact = false;
  /// max_normalized <= 1e-6 and median order in [1.7, 2.3], or all exact.
  bool passes = false;
};

struct VerifyResult {
  std::vector<ResidualReport> reports;
  VerifySummary summary;
};

inline ResidualReport residual_report(const SeparatedSolution& sol, std::span<const double> point,
                                      std::span<const double> steps) {
  if (steps.size() < 3) throw DomainError("residual_report: need at least three steps");
  for (std::size_t i = 1; i < steps.size(); ++i)
    if (!(steps[i] < steps[i - 1])) throw DomainError("residual_report: steps must be strictly decreasing");
  ResidualReport rep;
  rep.point.assign(point.begin(), point.end());
  rep.steps.assign(steps.begin(), steps.end());
  const auto u = native_evaluator(sol);
  const bool curvilinear = sol.system() != CoordinateSystem::CartesianND;
  const auto uc = curvilinear ? cartesian_evaluator(sol, point) : Evaluator{};
  const auto xc = to_cartesian(sol.system(), point);
  // A point is exact when the residual sits at rounding level at every step,
  // in either the native or the Cartesian operator. The Cartesian one is
  // needed for linear functions, which curvilinear stencils do not reproduce.
  bool native_exact = true, cartesian_exact = curvilinear;
  for (double h : steps) {
    const auto res = fd_native(sol, u, point, h);
    rep.raw.push_back(res.raw);
    rep.normalized.push_back(res.normalized);
    rep.floor.push_back(res.floor);
    if (res.raw > res.floor) native_exact = false;
    if (curvilinear) {
      const auto cres = fd_infty_cartesian_full(uc, xc, h);
      rep.cartesian_normalized.push_back(cres.normalized);
      if (cres.raw > cres.floor) cartesian_exact = false;
    }
  }
  rep.exact = native_exact || cartesian_exact;
  rep.observed_order = rep.exact ? std::numeric_limits<double>::infinity() : observed_order(rep.steps, rep.raw);
  return rep;
}

inline VerifyResult verify_solution(const SeparatedSolution& sol, const std::vector<std::vector<double>>& samples,
                                    std::span<const double> steps) {
  VerifyResult out;
  std::vector<double> orders;
  for (const auto& p : samples) {
    auto rep = residual_report(sol, p, steps);
    auto& s = out.summary;
    // Exact points carry rounding noise over a vanishing denominator.
    if (!rep.exact) s.max_normalized = std::max(s.max_normalized, rep.normalized.back());
    if (!rep.exact && !rep.cartesian_normalized.empty())
      s.max_coordinate_mismatch =
          std::max(s.max_coordinate_mismatch, std::abs(rep.normalized.back() - rep.cartesian_normalized.back()));
    if (rep.exact) ++s.exact_points;
    else orders.push_back(rep.observed_order);
    out.reports.push_back(std::move(rep));
  }
  auto& s = out.summary;
  s.all_exact = !samples.empty() && s.exact_points == samples.size();
  if (orders.empty()) {
    s.median_order = std::numeric_limits<double>::infinity();
  } else {
    std::sort(orders.begin(), orders.end());
    const std::size_t m = orders.size();
    s.median_order = m % 2 ? orders[m / 2] : 0.5 * (orders[m / 2 - 1] + orders[m / 2]);
  }
  s.passes = s.all_exact || (s.max_normalized <= kMaxNormalizedResidual && s.median_order >= kMinOrder &&
                             s.median_order <= kMaxOrder);
  return out;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Deterministic uniform doubles in [0, 1) from a 64-bit Mersenne twister.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : rng_(seed) {}
  double next() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double in(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 rng_;
};

struct SampleBox {
  double r_lo = 0.5, r_hi = 2.0;
  double theta_lo = -1.0, theta_hi = 1.0;
  double alpha_lo = 0.3, alpha_hi = std::numbers::pi - 0.3;
  double x_lo = -1.0, x_hi = 1.0;
  /// Distance kept from factor interval ends and known singular sets.
  double margin = 0.05;
  /// Largest |d log|f| / dt| accepted (profile ratio for tabulated factors).
  double ratio_cap = 2.5;
  /// Distance kept from zero crossings of a tabulated ratio. The ratio
  /// behaves like a cube root there and u is only C^{1,1/3}.
  double crossing_margin = 0.3;
  /// Angular distance kept from the non-smooth axes of Aronsson-type closed forms.
  double axis_margin = 0.25;
  /// Distance kept from the square-root branch points closing the thm4.iii h-interval.
  double branch_margin = 0.3;
};

namespace detail {

/// Abscissae where a table's ratio changes sign.
inline std::vector<double> ratio_crossings(const ProfileTable& tab) {
  std::vector<double> out;
  const auto t = tab.nodes();
  const auto y = tab.values();
  for (std::size_t k = 0; k + 1 < t.size(); ++k)
    if ((y[k] < 0) != (y[k + 1] < 0) || y[k] == 0.0) out.push_back(y[k] == 0.0 ? t[k] : t[k] - y[k] * (t[k + 1] - t[k]) / (y[k + 1] - y[k]));
  return out;
}

inline bool regular_coordinate(const Profile& f, double t, const std::vector<double>& crossings,
                               const SampleBox& box) {
  if (!(t >= f.lo() + box.margin && t <= f.hi() - box.margin)) return false;
  if (const auto* tab = f.table()) {
    const double s = f.table_abscissa(t);
    if (!(std::abs(tab->value(s)) <= box.ratio_cap)) return false;
    for (double sc : crossings)
      if (std::abs(s - sc) < box.crossing_margin) return false;
    return true;
  }
  if (const auto* cf = std::get_if<Profile::ClosedForm>(&f.form())) {
    const double v = t + cf->c;
    const double quarter = std::numbers::pi / 2;
    if (cf->tag == ClosedFormTag::AronssonAngular &&
        std::abs(v - quarter * std::round(v / quarter)) < box.axis_margin)
      return false;
    if (cf->tag == ClosedFormTag::AronssonNegAngular &&
        std::abs(v - std::numbers::pi * std::round(v / std::numbers::pi)) < box.axis_margin)
      return false;
    if (cf->tag == ClosedFormTag::Thm4Case3H && !(t >= f.lo() + box.branch_margin && t <= f.hi() - box.branch_margin))
      return false;
  }
  // Log-derivative cap for analytic factors, by central difference.
  const double d = 1e-6;
  if (t - d >= f.lo() && t + d <= f.hi() && f.sign(t - d) != 0 && f.sign(t + d) != 0) {
    const double ratio = (f.log_abs(t + d) - f.log_abs(t - d)) / (2 * d);
    if (!(std::abs(ratio) <= box.ratio_cap)) return false;
  }
  return true;
}

}  // namespace detail

/// Draws `count` points inside the box where every factor is smooth and its
/// profile ratio is moderate. Throws EmptyDomainError if too few are found.
inline std::vector<std::vector<double>> sample_points(const SeparatedSolution& sol, std::size_t count,
                                                      std::uint64_t seed, const SampleBox& box = {}) {
  UniformStream rng(seed);
  const auto n = sol.dimension();
  std::vector<std::pair<double, double>> ranges(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (sol.system()) {
      case CoordinateSystem::Polar2D:
        ranges[i] = i == 0 ? std::pair{box.r_lo, box.r_hi} : std::pair{box.theta_lo, box.theta_hi};
        break;
      case CoordinateSystem::Spherical3D:
        ranges[i] = i == 0   ? std::pair{box.r_lo, box.r_hi}
                    : i == 1 ? std::pair{box.theta_lo, box.theta_hi}
                             : std::pair{box.alpha_lo, box.alpha_hi};
        break;
      case CoordinateSystem::CartesianND: ranges[i] = {box.x_lo, box.x_hi}; break;
    }
    const auto& f = sol.factor(i);
    ranges[i].first = std::max(ranges[i].first, f.lo() + box.margin);
    ranges[i].second = std::min(ranges[i].second, f.hi() - box.margin);
    if (!(ranges[i].first < ranges[i].second))
      throw EmptyDomainError("sample_points: sampling box misses the domain of coordinate " + std::to_string(i));
  }
  std::vector<std::vector<double>> crossings(n);
  for (std::size_t i = 0; i < n; ++i)
    if (const auto* tab = sol.factor(i).table()) crossings[i] = detail::ratio_crossings(*tab);
  std::vector<std::vector<double>> pts;
  for (std::size_t tries = 0; tries < 200000 && pts.size() < count; ++tries) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = rng.in(ranges[i].first, ranges[i].second);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) ok = detail::regular_coordinate(sol.factor(i), p[i], crossings[i], box);
    if (ok) pts.push_back(std::move(p));
  }
  if (pts.size() < count) throw EmptyDomainError("sample_points: not enough regular sample points");
  return pts;
}

// ---------------------------------------------------------------------------
// Degenerate Cartesian branch (S = 0)
// ---------------------------------------------------------------------------

struct DegenerateResolution {
  int accepted_sign = 0;  // +1, -1, or 0 if neither / both pass
  VerifySummary plus;
  VerifySummary minus;
  std::string accepted_name;
};

/// Checks both sign candidates F_j = +-1/(x_j + c) with the FD oracle.
inline DegenerateResolution resolve_thm3_degenerate(int n, int j, double c = 0.0, std::uint64_t seed = 0,
                                                    std::size_t samples = 20) {
  DegenerateResolution out;
  const auto steps = default_h_ladder();
  for (int sign : {1, -1}) {
    const auto sol = thm3_degenerate_candidate(n, j, c, sign);
    const auto pts = sample_points(sol, samples, seed);
    (sign > 0 ? out.plus : out.minus) = verify_solution(sol, pts, steps).summary;
  }
  if (out.plus.passes != out.minus.passes) {
    out.accepted_sign = out.plus.passes ? 1 : -1;
    out.accepted_name = out.plus.passes ? "F_j = +1/(x_j + c), f_j = |x_j + c|" : "F_j = -1/(x_j + c), f_j = 1/|x_j + c|";
  }
  return out;
}

}  // namespace infharm
