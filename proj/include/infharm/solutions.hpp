#pragma once

// Separated solutions u = prod f_i(x_i) for every case of the polar,
// spherical and Cartesian families, plus the closed-form catalogue.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "infharm/errors.hpp"
#include "infharm/profiles.hpp"

namespace infharm {

enum class CoordinateSystem { Polar2D, Spherical3D, CartesianND };

inline const char* to_string(CoordinateSystem s) {
  switch (s) {
    case CoordinateSystem::Polar2D: return "polar";
    case CoordinateSystem::Spherical3D: return "spherical";
    case CoordinateSystem::CartesianND: return "cartesian";
  }
  return "?";
}

/// Coordinate names in evaluation order.
inline std::vector<std::string> coordinate_names(CoordinateSystem s, std::size_t dim) {
  switch (s) {
    case CoordinateSystem::Polar2D: return {"r", "theta"};
    case CoordinateSystem::Spherical3D: return {"r", "theta", "alpha"};
    case CoordinateSystem::CartesianND: break;
  }
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= dim; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

/// Margin excluded at tabulated interval endpoints, where log_integral -> -inf.
inline constexpr double kDomainPad = 1e-6;

/// (cbrt x)^n: the real value of x^{n/3}. Even n gives |x|^{n/3}.
inline double real_pow_third(double x, int n) {
  const double r = std::cbrt(x);
  double v = 1.0;
  for (int i = 0; i < n; ++i) v *= r;
  return v;
}

inline bool validate_case_i(double A, double B) { return std::abs(A * A - A + B * B) <= 1e-9; }

inline double closed_aronsson(double x, double y) {
  return std::pow(std::abs(x), 4.0 / 3.0) - std::pow(std::abs(y), 4.0 / 3.0);
}

inline double closed_aronsson_negexp(double r, double theta, double c = 0.0) {
  if (!(r > 0.0)) throw DomainError("closed_aronsson_negexp: r must be positive");
  const double half = 0.5 * (theta + c);
  return std::pow(r, -1.0 / 3.0) * (real_pow_third(std::cos(half), 4) - real_pow_third(std::sin(half), 4));
}

namespace detail {

inline double thm4_case3_exponent(double alpha, double B, double C) {
  const double sn = std::sin(alpha);
  const double ct = std::cos(alpha) / sn;
  const double rad = C * C - B * B / (sn * sn);
  if (!(C * C > B * B)) throw DomainError("thm4_case3_h: requires C^2 > B^2");
  if (!(rad > 0.0) || sn == 0.0) throw DomainError("thm4_case3_h: requires |sin alpha| > |B|/|C|");
  const double arg = B * ct / std::sqrt(C * C - B * B);
  return B * std::asin(std::clamp(arg, -1.0, 1.0)) - C * std::atan(C * ct / std::sqrt(rad));
}

}  // namespace detail

/// Polar-angle factor of the spherical case iii, normalized to 1 at alpha0.
/// sign = +1 has log-derivative +sqrt(C^2 - B^2/sin^2 alpha).
inline double thm4_case3_h(double alpha, double B, double C, int sign, double alpha0 = std::numbers::pi / 2) {
  if (sign != 1 && sign != -1) throw DomainError("thm4_case3_h: sign must be +1 or -1");
  return std::exp(sign * (detail::thm4_case3_exponent(alpha, B, C) - detail::thm4_case3_exponent(alpha0, B, C)));
}

// ---------------------------------------------------------------------------
// Profile
// ---------------------------------------------------------------------------

enum class ClosedFormTag { Constant, Cosine, AronssonAngular, AronssonNegAngular, Thm4Case3H };

/// One factor f_i of a separated solution.
class Profile {
 public:
  struct Power {
    double exponent;
    bool of_sine = false;  // |sin t|^A instead of t^A
  };
  struct Exponential {
    double rate;
  };
  /// |t + offset|^exponent on the side of -offset holding the anchor.
  struct AffinePower {
    double offset;
    double exponent;
  };
  struct Tabulated {
    std::shared_ptr<const ProfileTable> table;
    int sign = 1;
    bool log_abscissa = false;  // table is indexed by ln t
  };
  struct ClosedForm {
    ClosedFormTag tag;
    double c = 0.0;
    double B = 0.0;
    double C = 0.0;
    int sign = 1;
  };
  using Form = std::variant<Power, Exponential, AffinePower, Tabulated, ClosedForm>;

  Profile(Form form, double anchor_t, double anchor_value = 1.0)
      : form_(std::move(form)), anchor_t_(anchor_t), anchor_value_(anchor_value) {
    if (anchor_value == 0.0 || !std::isfinite(anchor_value)) throw DomainError("Profile: anchor value must be nonzero");
    set_interval();
    if (!contains(anchor_t)) throw DomainError("Profile: anchor outside the factor's domain");
    anchor_log_ = raw_log(anchor_t);
    anchor_sign_ = raw_sign(anchor_t);
    if (!std::isfinite(anchor_log_) || anchor_sign_ == 0) throw DomainError("Profile: factor vanishes at its anchor");
  }

  const Form& form() const { return form_; }
  double anchor_t() const { return anchor_t_; }
  double anchor_value() const { return anchor_value_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool contains(double t) const { return t >= lo_ && t <= hi_; }

  /// log |f(t)| (may be -inf at zeros of closed forms).
  double log_abs(double t) const {
    check(t);
    return std::log(std::abs(anchor_value_)) + raw_log(t) - anchor_log_;
  }
  int sign(double t) const {
    check(t);
    const int s = raw_sign(t) * anchor_sign_;
    return anchor_value_ < 0 ? -s : s;
  }
  double value(double t) const {
    const int s = sign(t);
    return s == 0 ? 0.0 : s * std::exp(log_abs(t));
  }

  /// The table behind a tabulated factor, or nullptr.
  const ProfileTable* table() const {
    if (auto* tb = std::get_if<Tabulated>(&form_)) return tb->table.get();
    return nullptr;
  }
  /// Table abscissa for coordinate t.
  double table_abscissa(double t) const {
    const auto* tb = std::get_if<Tabulated>(&form_);
    return (tb && tb->log_abscissa) ? std::log(t) : t;
  }

 private:
  void check(double t) const {
    if (!contains(t))
      throw DomainError("Profile: coordinate " + std::to_string(t) + " outside [" + std::to_string(lo_) + ", " +
                        std::to_string(hi_) + "]");
  }

  void set_interval() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    lo_ = -inf;
    hi_ = inf;
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Power>) {
            lo_ = 0.0;
            hi_ = f.of_sine ? std::numbers::pi : inf;
            // open interval
            lo_ = std::nextafter(lo_, inf);
            if (f.of_sine) hi_ = std::nextafter(hi_, 0.0);
          } else if constexpr (std::is_same_v<T, AffinePower>) {
            if (anchor_t_ + f.offset > 0) lo_ = std::nextafter(-f.offset, inf);
            else hi_ = std::nextafter(-f.offset, -inf);
          } else if constexpr (std::is_same_v<T, Tabulated>) {
            if (!f.table) throw DomainError("Profile: missing table");
            if (f.sign != 1 && f.sign != -1) throw DomainError("Profile: table sign must be +1 or -1");
            double a = f.table->t_min() + kDomainPad, b = f.table->t_max() - kDomainPad;
            if (f.log_abscissa) {
              a = std::exp(a);
              b = std::exp(b);
            }
            lo_ = a;
            hi_ = b;
          } else if constexpr (std::is_same_v<T, ClosedForm>) {
            if (f.tag == ClosedFormTag::Thm4Case3H) {
              if (!(f.C * f.C > f.B * f.B)) throw ConstraintError("thm4.iii requires C^2 > B^2");
              const double a = std::asin(std::abs(f.B) / std::abs(f.C));
              lo_ = std::nextafter(a, inf);
              hi_ = std::nextafter(std::numbers::pi - a, 0.0);
            }
          }
        },
        form_);
    if (!(lo_ < hi_)) throw DomainError("Profile: empty validity interval");
  }

  double raw_log(double t) const {
    return std::visit(
        [&](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Power>) {
            return f.exponent * std::log(f.of_sine ? std::sin(t) : t);
          } else if constexpr (std::is_same_v<T, Exponential>) {
            return f.rate * t;
          } else if constexpr (std::is_same_v<T, AffinePower>) {
            return f.exponent * std::log(std::abs(t + f.offset));
          } else if constexpr (std::is_same_v<T, Tabulated>) {
            return f.table->log_integral(f.log_abscissa ? std::log(t) : t);
          } else {
            return std::log(std::abs(closed_value(f, t)));
          }
        },
        form_);
  }

  int raw_sign(double t) const {
    if (const auto* tb = std::get_if<Tabulated>(&form_)) return tb->sign;
    if (const auto* cf = std::get_if<ClosedForm>(&form_)) {
      const double v = closed_value(*cf, t);
      return v > 0 ? 1 : (v < 0 ? -1 : 0);
    }
    return 1;
  }

  static double closed_value(const ClosedForm& f, double t) {
    switch (f.tag) {
      case ClosedFormTag::Constant: return 1.0;
      case ClosedFormTag::Cosine: return std::cos(t + f.c);
      case ClosedFormTag::AronssonAngular:
        return real_pow_third(std::cos(t + f.c), 4) - real_pow_third(std::sin(t + f.c), 4);
      case ClosedFormTag::AronssonNegAngular: {
        const double half = 0.5 * (t + f.c);
        return real_pow_third(std::cos(half), 4) - real_pow_third(std::sin(half), 4);
      }
      case ClosedFormTag::Thm4Case3H:
        return std::exp(f.sign * detail::thm4_case3_exponent(t, f.B, f.C));
    }
    return 0.0;
  }

  Form form_;
  double anchor_t_;
  double anchor_value_;
  double anchor_log_ = 0.0;
  int anchor_sign_ = 1;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

// ---------------------------------------------------------------------------
// SeparatedSolution
// ---------------------------------------------------------------------------

struct SolutionMeta {
  std::string case_id;
  std::vector<std::pair<std::string, double>> params;
  /// Human-readable notes (branch choices, anchor shifts).
  std::vector<std::string> notes;

  double param(const std::string& key, double fallback = 0.0) const {
    for (const auto& [k, v] : params)
      if (k == key) return v;
    return fallback;
  }
};

class SeparatedSolution {
 public:
  SeparatedSolution(CoordinateSystem system, std::vector<Profile> factors, SolutionMeta meta)
      : system_(system), factors_(std::move(factors)), meta_(std::move(meta)) {
    const std::size_t want = system == CoordinateSystem::Polar2D       ? 2
                             : system == CoordinateSystem::Spherical3D ? 3
                                                                       : factors_.size();
    if (factors_.size() != want || factors_.empty())
      throw DomainError("SeparatedSolution: factor count does not match the coordinate system");
  }

  CoordinateSystem system() const { return system_; }
  std::size_t dimension() const { return factors_.size(); }
  const std::vector<Profile>& factors() const { return factors_; }
  const Profile& factor(std::size_t i) const { return factors_.at(i); }
  const SolutionMeta& meta() const { return meta_; }
  std::vector<std::string> coordinates() const { return coordinate_names(system_, dimension()); }

  bool in_domain(std::span<const double> p) const {
    if (p.size() != factors_.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (!factors_[i].contains(p[i])) return false;
    return true;
  }

 private:
  CoordinateSystem system_;
  std::vector<Profile> factors_;
  SolutionMeta meta_;
};

/// Product of factor values, accumulated as sign * exp(sum log|f_i|).
inline double evaluate(const SeparatedSolution& sol, std::span<const double> point) {
  if (point.size() != sol.dimension()) throw DomainError("evaluate: point has wrong dimension");
  double log_sum = 0.0;
  int sign = 1;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const auto& f = sol.factor(i);
    if (!f.contains(point[i])) throw DomainError("evaluate: point outside the solution domain");
    const int s = f.sign(point[i]);
    if (s == 0) return 0.0;
    sign *= s;
    log_sum += f.log_abs(point[i]);
  }
  return sign * std::exp(log_sum);
}

inline double evaluate(const SeparatedSolution& sol, std::initializer_list<double> point) {
  return evaluate(sol, std::span<const double>(point.begin(), point.size()));
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

struct Anchors {
  double r0 = 1.0;
  double theta0 = 0.0;
  double alpha0 = std::numbers::pi / 2;
  double x0 = 0.0;
  double value = 1.0;
};

/// Half-widths of the integration windows around the anchor.
struct TableSpans {
  double angular = 2.0 * std::numbers::pi;
  double log_radial = 6.0;
  double cartesian = 8.0;
  /// Distance kept from sin(alpha) = 0 for the spherical polar-angle ODE.
  double polar_edge = 1e-3;
};

namespace detail {

struct TabulatedFactor {
  Profile profile;
  std::string note;
};

/// Integrates the ODE through the point nearest `t_anchor` where the implicit
/// relation has a moderate solution, then normalizes at `t_anchor` if the
/// trajectory reaches it.
inline TabulatedFactor tabulated_from_relation(const OdeSpec& spec, double t_anchor, double c, double half_span,
                                               bool log_abscissa, double anchor_value) {
  const auto rel = ImplicitRelation::for_ode(spec, c);
  double ta = t_anchor, ya = 0.0;
  bool found = false;
  for (int k = 0; k <= 80 && !found; ++k) {
    const double off = 0.05 * ((k + 1) / 2) * (k % 2 == 1 ? 1.0 : -1.0);
    const double t = t_anchor + off;
    for (const auto& br : rel.branches()) {
      try {
        const double y = solve_on_branch(rel, t, br);
        if (std::abs(y) >= 1e-2 && std::abs(y) <= 1e4) {
          ta = t;
          ya = y;
          found = true;
          break;
        }
      } catch (const Error&) {
      }
    }
  }
  if (!found) throw ConstraintError("no pole-free anchor found near the requested anchor point");

  IntegrationOptions opt;
  opt.t_lo = t_anchor - half_span;
  opt.t_hi = t_anchor + half_span;
  auto table = std::make_shared<const ProfileTable>(integrate_profile_both(spec, {ta, ya}, opt));

  const double pad = 10 * kDomainPad;
  const double norm_t = table->contains(t_anchor, pad) ? t_anchor : ta;
  std::string note = std::string(to_string(rel.case_tag())) + " branch through (" + std::to_string(ta) + ", " +
                     std::to_string(ya) + ")";
  if (norm_t != t_anchor) note += "; normalized at shifted anchor";
  const double coord = log_abscissa ? std::exp(norm_t) : norm_t;
  return {Profile(Profile::Tabulated{table, 1, log_abscissa}, coord, anchor_value), note};
}

}  // namespace detail

inline SeparatedSolution build_thm1_i(double A, double B, const Anchors& an = {}) {
  if (!std::isfinite(A) || !std::isfinite(B)) throw ConstraintError("thm1.i: parameters must be finite");
  if (!validate_case_i(A, B)) throw ConstraintError("thm1.i requires A^2 - A + B^2 = 0");
  std::vector<Profile> fs{Profile(Profile::Power{A}, an.r0, an.value), Profile(Profile::Exponential{B}, an.theta0)};
  return {CoordinateSystem::Polar2D, std::move(fs), {"thm1.i", {{"A", A}, {"B", B}}, {}}};
}

/// r^A e^{B theta} without the circle constraint (negative controls).
inline SeparatedSolution polar_power_exp_unchecked(double A, double B, const Anchors& an = {}) {
  std::vector<Profile> fs{Profile(Profile::Power{A}, an.r0, an.value), Profile(Profile::Exponential{B}, an.theta0)};
  return {CoordinateSystem::Polar2D, std::move(fs), {"polar-power-exp", {{"A", A}, {"B", B}}, {}}};
}

inline Profile angular_profile(double A, double c, const Anchors& an, const TableSpans& spans, std::string* note) {
  if (std::abs(A - 1.0) <= kCaseTol) {
    // G = -tan(theta + c) integrates to cos(theta + c); a table would only add interpolation noise.
    double t0 = an.theta0;
    if (std::abs(std::cos(t0 + c)) < 1e-2) t0 += std::numbers::pi / 4;
    if (note) *note = std::string("thm1ii:A=1 closed form cos(theta + c)") + (t0 != an.theta0 ? "; normalized at shifted anchor" : "");
    return Profile(Profile::ClosedForm{ClosedFormTag::Cosine, c}, t0, 1.0);
  }
  auto tf = detail::tabulated_from_relation(OdeSpec::polar_angular(A), an.theta0, c, spans.angular, false, 1.0);
  if (note) *note = tf.note;
  return tf.profile;
}

inline SeparatedSolution build_thm1_ii(double A, double c = 0.0, const Anchors& an = {}, const TableSpans& spans = {}) {
  if (!std::isfinite(A) || !std::isfinite(c)) throw ConstraintError("thm1.ii: parameters must be finite");
  std::string note;
  auto g = angular_profile(A, c, an, spans, &note);
  std::vector<Profile> fs{Profile(Profile::Power{A}, an.r0, an.value), std::move(g)};
  return {CoordinateSystem::Polar2D, std::move(fs), {"thm1.ii", {{"A", A}, {"c", c}}, {note}}};
}

inline SeparatedSolution build_thm1_iii(double B, double c = 0.0, const Anchors& an = {},
                                        const TableSpans& spans = {}) {
  if (!std::isfinite(B) || !std::isfinite(c)) throw ConstraintError("thm1.iii: parameters must be finite");
  if (!(an.r0 > 0.0)) throw ConstraintError("thm1.iii: anchor radius must be positive");
  auto tf = detail::tabulated_from_relation(OdeSpec::polar_radial(B), std::log(an.r0), c, spans.log_radial, true,
                                            an.value);
  std::vector<Profile> fs{std::move(tf.profile), Profile(Profile::Exponential{B}, an.theta0)};
  return {CoordinateSystem::Polar2D, std::move(fs), {"thm1.iii", {{"B", B}, {"c", c}}, {tf.note}}};
}

enum class Thm1Case { I, II, III };

/// Polar family dispatcher; case i uses (A, B), case ii uses A, case iii uses B.
inline SeparatedSolution build_thm1(Thm1Case which, double A, double B, double c = 0.0, const Anchors& an = {}) {
  switch (which) {
    case Thm1Case::I: return build_thm1_i(A, B, an);
    case Thm1Case::II: return build_thm1_ii(A, c, an);
    case Thm1Case::III: return build_thm1_iii(B, c, an);
  }
  throw ConstraintError("build_thm1: unknown case");
}

/// Cartesian n-dimensional family: exponential factors e^{A_i x_i} for i != j
/// and a tabulated factor for coordinate j (1-based) from F' = -(S + F^2)^2/F^2.
inline SeparatedSolution build_thm3(const std::vector<double>& A, int j, double c = 0.0, const Anchors& an = {},
                                    const TableSpans& spans = {}) {
  const std::size_t n = A.size() + 1;
  if (n < 2) throw ConstraintError("thm3 requires n >= 2");
  if (j < 1 || static_cast<std::size_t>(j) > n) throw ConstraintError("thm3: j must lie in [1, n]");
  double S = 0.0;
  for (double a : A) {
    if (!std::isfinite(a)) throw ConstraintError("thm3: coefficients must be finite");
    S += a * a;
  }
  auto tf = detail::tabulated_from_relation(OdeSpec::cartesian(S), an.x0, c, spans.cartesian, false, an.value);
  std::vector<Profile> fs;
  SolutionMeta meta{"thm3", {{"n", static_cast<double>(n)}, {"j", static_cast<double>(j)}, {"c", c}, {"S", S}},
                    {tf.note}};
  std::size_t ai = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (static_cast<int>(i) == j) {
      fs.push_back(tf.profile);
    } else {
      meta.params.emplace_back("A" + std::to_string(i), A[ai]);
      fs.emplace_back(Profile::Exponential{A[ai++]}, an.x0);
    }
  }
  return {CoordinateSystem::CartesianND, std::move(fs), std::move(meta)};
}

/// Closed-form candidate f_j = |x_j + c|^{sign} for the S = 0 branch, all other
/// factors constant. sign = +1 corresponds to F_j = 1/(x_j + c), sign = -1 to
/// F_j = -1/(x_j + c).
inline SeparatedSolution thm3_degenerate_candidate(int n, int j, double c, int sign, const Anchors& an = {}) {
  if (n < 2 || j < 1 || j > n) throw ConstraintError("thm3 degenerate: need n >= 2 and j in [1, n]");
  if (sign != 1 && sign != -1) throw ConstraintError("thm3 degenerate: sign must be +1 or -1");
  double x0 = an.x0;
  if (x0 + c == 0.0) x0 += 1.0;  // keep the anchor off the pole
  std::vector<Profile> fs;
  for (int i = 1; i <= n; ++i) {
    if (i == j) fs.emplace_back(Profile::AffinePower{c, static_cast<double>(sign)}, x0, an.value);
    else fs.emplace_back(Profile::ClosedForm{ClosedFormTag::Constant}, an.x0);
  }
  return {CoordinateSystem::CartesianND,
          std::move(fs),
          {"thm3.degenerate", {{"n", double(n)}, {"j", double(j)}, {"c", c}, {"sign", double(sign)}}, {}}};
}

/// u = const: the branch where every F_i vanishes.
inline SeparatedSolution build_constant(int n, double value = 1.0) {
  if (n < 1) throw ConstraintError("constant solution needs n >= 1");
  std::vector<Profile> fs;
  for (int i = 0; i < n; ++i) fs.emplace_back(Profile::ClosedForm{ClosedFormTag::Constant}, 0.0, i == 0 ? value : 1.0);
  return {CoordinateSystem::CartesianND, std::move(fs), {"constant", {{"n", double(n)}, {"value", value}}, {}}};
}

enum class Thm2Case { I, II };

/// Two-dimensional Cartesian family: case i is f(x) = e^{A x}, g tabulated;
/// case ii mirrors it with the roles of x and y swapped.
inline SeparatedSolution build_thm2(Thm2Case which, double coef, double c = 0.0, const Anchors& an = {}) {
  auto sol = build_thm3({coef}, which == Thm2Case::I ? 2 : 1, c, an);
  SolutionMeta meta{which == Thm2Case::I ? "thm2.i" : "thm2.ii",
                    {{which == Thm2Case::I ? "A" : "B", coef}, {"c", c}},
                    sol.meta().notes};
  return {CoordinateSystem::CartesianND, sol.factors(), std::move(meta)};
}

enum class Thm4Case { I, II, III };

struct Thm4Params {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double c = 0.0;
  int sign = 1;     // case iii h-branch
  double H0 = 1.0;  // case i: H at alpha0
};

inline SeparatedSolution build_thm4(Thm4Case which, const Thm4Params& p, const Anchors& an = {},
                                    const TableSpans& spans = {}) {
  if (!std::isfinite(p.A) || !std::isfinite(p.B) || !std::isfinite(p.C) || !std::isfinite(p.c))
    throw ConstraintError("thm4: parameters must be finite");
  switch (which) {
    case Thm4Case::I: {
      if (p.H0 == 0.0 || !std::isfinite(p.H0)) throw ConstraintError("thm4.i: H anchor must be finite and nonzero");
      IntegrationOptions opt;
      opt.t_lo = spans.polar_edge;
      opt.t_hi = std::numbers::pi - spans.polar_edge;
      auto table = std::make_shared<const ProfileTable>(
          integrate_profile_both(OdeSpec::spherical_polar(p.A, p.B), {an.alpha0, p.H0}, opt));
      std::vector<Profile> fs{Profile(Profile::Power{p.A}, an.r0, an.value),
                              Profile(Profile::Exponential{p.B}, an.theta0),
                              Profile(Profile::Tabulated{table, 1, false}, an.alpha0)};
      return {CoordinateSystem::Spherical3D,
              std::move(fs),
              {"thm4.i", {{"A", p.A}, {"B", p.B}, {"H0", p.H0}}, {}}};
    }
    case Thm4Case::II: {
      std::string note;
      auto g = angular_profile(p.A, p.c, an, spans, &note);
      std::vector<Profile> fs{Profile(Profile::Power{p.A}, an.r0, an.value), std::move(g),
                              Profile(Profile::Power{p.A, true}, an.alpha0)};
      return {CoordinateSystem::Spherical3D, std::move(fs), {"thm4.ii", {{"A", p.A}, {"c", p.c}}, {note}}};
    }
    case Thm4Case::III: {
      if (!(p.C * p.C > p.B * p.B)) throw ConstraintError("thm4.iii requires C^2 > B^2");
      if (p.sign != 1 && p.sign != -1) throw ConstraintError("thm4.iii: sign must be +1 or -1");
      if (!(std::abs(std::sin(an.alpha0)) > std::abs(p.B) / std::abs(p.C)))
        throw ConstraintError("thm4.iii: alpha0 outside |sin alpha| > |B|/|C|");
      auto tf = detail::tabulated_from_relation(OdeSpec::polar_radial(p.C), std::log(an.r0), p.c, spans.log_radial,
                                                true, an.value);
      std::vector<Profile> fs{std::move(tf.profile), Profile(Profile::Exponential{p.B}, an.theta0),
                              Profile(Profile::ClosedForm{ClosedFormTag::Thm4Case3H, 0.0, p.B, p.C, p.sign},
                                      an.alpha0)};
      return {CoordinateSystem::Spherical3D,
              std::move(fs),
              {"thm4.iii", {{"B", p.B}, {"C", p.C}, {"c", p.c}, {"sign", double(p.sign)}}, {tf.note}}};
    }
  }
  throw ConstraintError("build_thm4: unknown case");
}

/// |x|^{4/3} - |y|^{4/3} written as r^{4/3} (cos^{4/3} - sin^{4/3}).
inline SeparatedSolution build_aronsson(double c = 0.0) {
  std::vector<Profile> fs{Profile(Profile::Power{4.0 / 3.0}, 1.0),
                          Profile(Profile::ClosedForm{ClosedFormTag::AronssonAngular, c}, -c)};
  return {CoordinateSystem::Polar2D, std::move(fs), {"aronsson", {{"c", c}}, {}}};
}

/// r^{-1/3} (cos^{4/3}((theta + c)/2) - sin^{4/3}((theta + c)/2)).
inline SeparatedSolution build_aronsson_negexp(double c = 0.0) {
  std::vector<Profile> fs{Profile(Profile::Power{-1.0 / 3.0}, 1.0),
                          Profile(Profile::ClosedForm{ClosedFormTag::AronssonNegAngular, c}, -c)};
  return {CoordinateSystem::Polar2D, std::move(fs), {"aronsson-neg", {{"c", c}}, {}}};
}

}  // namespace infharm
