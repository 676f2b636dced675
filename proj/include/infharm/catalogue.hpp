#pragma once

// Named cases with default parameters, and the figure parameter sets.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "infharm/errors.hpp"
#include "infharm/gridio.hpp"
#include "infharm/solutions.hpp"
#include "infharm/verify.hpp"

namespace infharm {

/// Parameters as given by the user; unset fields take the case defaults.
struct CaseParams {
  std::optional<std::vector<double>> A;  // thm3 takes n-1 values, every other case one
  std::optional<double> B, C, c, H0;
  std::optional<int> n, j, sign;
};

struct CatalogueEntry {
  std::string id;
  CoordinateSystem system;
  std::string summary;
  std::string constraint;
  std::vector<std::string> params;  // accepted flags
  std::string defaults;             // human-readable defaults
};

inline const std::vector<CatalogueEntry>& catalogue() {
  using CS = CoordinateSystem;
  static const std::vector<CatalogueEntry> entries{
      {"thm1.i", CS::Polar2D, "u = r^A e^{B theta}", "requires A^2 - A + B^2 = 0", {"A", "B"}, "A=0.5 B=0.5"},
      {"thm1.ii", CS::Polar2D, "u = r^A g(theta), g'/g = G from G' = -(A^2+G^2)(A^2-A+G^2)/G^2",
       "A real; c selects the branch", {"A", "c"}, "A=4/3 c=0"},
      {"thm1.iii", CS::Polar2D, "u = f(r) e^{B theta}, r f'/f = Phi from Phi' = -(Phi^2+B^2)(Phi^2-Phi+B^2)/Phi^2 in ln r",
       "B real; c selects the branch", {"B", "c"}, "B=0.5 c=0"},
      {"thm2.i", CS::CartesianND, "u = e^{A x} g(y), g'/g = F from F' = -(A^2+F^2)^2/F^2", "A real", {"A", "c"},
       "A=0.25 c=0"},
      {"thm2.ii", CS::CartesianND, "u = f(x) e^{B y}, the mirror of thm2.i", "B real", {"B", "c"}, "B=0.25 c=0"},
      {"thm3", CS::CartesianND,
       "u = f_j(x_j) prod_{i != j} e^{A_i x_i}, F_j' = -(S+F_j^2)^2/F_j^2 with S = sum A_i^2",
       "n >= 2, 1 <= j <= n, n-1 coefficients A (comma list)", {"A", "n", "j", "c"}, "n=3 j=1 A=0.3,0.4 c=0"},
      {"thm3.degenerate", CS::CartesianND, "S = 0 branch: u = |x_j + c| (sign resolved by the residual oracle)",
       "n >= 2, 1 <= j <= n", {"n", "j", "c"}, "n=3 j=1 c=0"},
      {"thm4.i", CS::Spherical3D,
       "u = r^A e^{B theta} h(alpha), H = h'/h from the first-order ODE in alpha", "A, B real; H0 = H(pi/2) nonzero",
       {"A", "B", "H0"}, "A=1 B=0.5 H0=1"},
      {"thm4.ii", CS::Spherical3D, "u = (r sin alpha)^A g(theta) with g from thm1.ii", "A real; c selects the branch",
       {"A", "c"}, "A=0.5 c=0"},
      {"thm4.iii", CS::Spherical3D,
       "u = f(r) e^{B theta} h(alpha), f from thm1.iii with C, h'/h = sign sqrt(C^2 - B^2/sin^2 alpha)",
       "requires C^2 > B^2", {"B", "C", "c", "sign"}, "B=0.2 C=0.5 c=0 sign=1"},
      {"aronsson", CS::Polar2D, "u = |x|^{4/3} - |y|^{4/3}", "c rotates the angular profile", {"c"}, "c=0"},
      {"aronsson-neg", CS::Polar2D, "u = r^{-1/3} (cos^{4/3}(theta/2) - sin^{4/3}(theta/2))",
       "c shifts the angle", {"c"}, "c=0"},
  };
  return entries;
}

inline const CatalogueEntry& catalogue_entry(const std::string& id) {
  for (const auto& e : catalogue())
    if (e.id == id) return e;
  throw ConstraintError("unknown case '" + id + "' (see catalogue)");
}

namespace detail {

inline double scalar_A(const CaseParams& p, double fallback) {
  if (!p.A) return fallback;
  if (p.A->size() != 1) throw ConstraintError("this case takes a single A");
  return p.A->front();
}

}  // namespace detail

/// Builds a catalogue case. Parameters the case does not accept are errors.
inline SeparatedSolution build_case(const std::string& id, const CaseParams& p) {
  const auto& e = catalogue_entry(id);
  const auto reject = [&](bool given, const char* name) {
    if (given && std::find(e.params.begin(), e.params.end(), name) == e.params.end())
      throw ConstraintError(id + " does not take --" + name);
  };
  reject(p.A.has_value(), "A");
  reject(p.B.has_value(), "B");
  reject(p.C.has_value(), "C");
  reject(p.c.has_value(), "c");
  reject(p.H0.has_value(), "H0");
  reject(p.n.has_value(), "n");
  reject(p.j.has_value(), "j");
  reject(p.sign.has_value(), "sign");
  const double c = p.c.value_or(0.0);

  if (id == "thm1.i") {
    const double A = detail::scalar_A(p, 0.5), B = p.B.value_or(0.5);
    return build_thm1_i(A, B);
  }
  if (id == "thm1.ii") return build_thm1_ii(detail::scalar_A(p, 4.0 / 3.0), c);
  if (id == "thm1.iii") return build_thm1_iii(p.B.value_or(0.5), c);
  if (id == "thm2.i") return build_thm2(Thm2Case::I, detail::scalar_A(p, 0.25), c);
  if (id == "thm2.ii") return build_thm2(Thm2Case::II, p.B.value_or(0.25), c);
  if (id == "thm3") {
    const int n = p.n.value_or(3);
    std::vector<double> A = p.A.value_or(std::vector<double>{});
    if (!p.A) {
      const std::vector<double> base{0.3, 0.4, 0.2, 0.1, 0.25, 0.15, 0.35, 0.05};
      if (n < 2 || n - 1 > static_cast<int>(base.size())) throw ConstraintError("thm3: give --A for this n");
      A.assign(base.begin(), base.begin() + (n - 1));
    }
    if (static_cast<int>(A.size()) != n - 1)
      throw ConstraintError("thm3: expected n-1 = " + std::to_string(n - 1) + " coefficients, got " +
                            std::to_string(A.size()));
    return build_thm3(A, p.j.value_or(1), c);
  }
  if (id == "thm3.degenerate") {
    const int n = p.n.value_or(3), j = p.j.value_or(1);
    const auto res = resolve_thm3_degenerate(n, j, c);
    if (res.accepted_sign == 0) throw ConstraintError("thm3.degenerate: no unique sign candidate passed");
    return thm3_degenerate_candidate(n, j, c, res.accepted_sign);
  }
  if (id == "thm4.i") {
    Thm4Params q;
    q.A = detail::scalar_A(p, 1.0);
    q.B = p.B.value_or(0.5);
    q.H0 = p.H0.value_or(1.0);
    return build_thm4(Thm4Case::I, q);
  }
  if (id == "thm4.ii") {
    Thm4Params q;
    q.A = detail::scalar_A(p, 0.5);
    q.c = c;
    return build_thm4(Thm4Case::II, q);
  }
  if (id == "thm4.iii") {
    Thm4Params q;
    q.B = p.B.value_or(0.2);
    q.C = p.C.value_or(0.5);
    q.c = c;
    q.sign = p.sign.value_or(1);
    return build_thm4(Thm4Case::III, q);
  }
  if (id == "aronsson") return build_aronsson(c);
  if (id == "aronsson-neg") return build_aronsson_negexp(c);
  throw ConstraintError("unknown case '" + id + "'");
}

/// Default lattice for grids of a given system and dimension.
inline std::vector<AxisSpec> default_axes(CoordinateSystem sys, std::size_t dim) {
  const double pi = std::numbers::pi;
  switch (sys) {
    case CoordinateSystem::Polar2D: return {{0.05, 2.0, 40}, {-pi, pi, 129}};
    case CoordinateSystem::Spherical3D: return {{0.05, 2.0, 40}, {-pi, pi, 65}, {0.05, pi - 0.05, 33}};
    case CoordinateSystem::CartesianND: break;
  }
  return std::vector<AxisSpec>(dim, AxisSpec{-2.0, 2.0, 81});
}

struct FigureSet {
  std::string case_id;
  CaseParams params;
};

/// One entry per parameter set quoted in the figure captions. Caption values
/// 0.433 are the exact circle points sqrt(3)/4.
inline std::vector<FigureSet> figure_sets(double c = 0.0) {
  std::vector<FigureSet> out;
  const double q = std::sqrt(3.0) / 4.0;
  for (auto [A, B] : {std::pair{0.25, q}, {0.25, -q}, {0.5, 0.5}, {0.5, -0.5}, {0.75, q}, {0.75, -q}}) {
    CaseParams p;
    p.A = std::vector{A};
    p.B = B;
    out.push_back({"thm1.i", p});
  }
  for (double A : {4.0 / 3.0, 1.15, 1.0, 1.0 / 3.0, 0.15, 0.0, -0.15, -0.05}) {
    CaseParams p;
    p.A = std::vector{A};
    p.c = c;
    out.push_back({"thm1.ii", p});
  }
  for (double B : {-1.0 / 3.0, -0.5, 0.0, 1.0 / 3.0, 0.5, 1.0}) {
    CaseParams p;
    p.B = B;
    p.c = c;
    out.push_back({"thm1.iii", p});
  }
  for (double A : {-0.5, -0.25, -0.05, 0.0, 0.05, 0.25}) {
    CaseParams p;
    p.A = std::vector{A};
    p.c = c;
    out.push_back({"thm2.i", p});
  }
  return out;
}

}  // namespace infharm
