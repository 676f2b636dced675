#pragma once

// Polar and spherical maps: theta azimuthal, alpha polar.

#include <cmath>
#include <span>
#include <vector>

#include "infharm/errors.hpp"
#include "infharm/solutions.hpp"

namespace infharm {

inline std::vector<double> to_cartesian(CoordinateSystem sys, std::span<const double> p) {
  switch (sys) {
    case CoordinateSystem::Polar2D:
      if (p.size() != 2) throw DomainError("to_cartesian: polar point needs 2 coordinates");
      return {p[0] * std::cos(p[1]), p[0] * std::sin(p[1])};
    case CoordinateSystem::Spherical3D:
      if (p.size() != 3) throw DomainError("to_cartesian: spherical point needs 3 coordinates");
      return {p[0] * std::sin(p[2]) * std::cos(p[1]), p[0] * std::sin(p[2]) * std::sin(p[1]), p[0] * std::cos(p[2])};
    case CoordinateSystem::CartesianND: break;
  }
  return {p.begin(), p.end()};
}

/// Inverse map with theta in (-pi, pi] and alpha in [0, pi].
inline std::vector<double> from_cartesian(CoordinateSystem sys, std::span<const double> x) {
  switch (sys) {
    case CoordinateSystem::Polar2D: {
      if (x.size() != 2) throw DomainError("from_cartesian: polar point needs 2 coordinates");
      const double r = std::hypot(x[0], x[1]);
      if (r == 0.0) throw DomainError("from_cartesian: angle undefined at r = 0");
      return {r, std::atan2(x[1], x[0])};
    }
    case CoordinateSystem::Spherical3D: {
      if (x.size() != 3) throw DomainError("from_cartesian: spherical point needs 3 coordinates");
      const double rho = std::hypot(x[0], x[1]);
      const double r = std::hypot(rho, x[2]);
      if (r == 0.0) throw DomainError("from_cartesian: angles undefined at r = 0");
      return {r, std::atan2(x[1], x[0]), std::atan2(rho, x[2])};
    }
    case CoordinateSystem::CartesianND: break;
  }
  return {x.begin(), x.end()};
}

}  // namespace infharm
