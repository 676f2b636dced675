#pragma once

// Coordinate transforms, lattice sampling and bit-exact CSV / JSON export.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "infharm/coords.hpp"
#include "infharm/errors.hpp"
#include "infharm/solutions.hpp"

namespace infharm {

struct AxisSpec {
  double min = 0.0;
  double max = 1.0;
  std::size_t count = 2;

  double node(std::size_t k) const {
    if (k + 1 == count) return max;
    return min + (max - min) * static_cast<double>(k) / static_cast<double>(count - 1);
  }

  void validate() const {
    if (count < 2) throw SpecError("axis needs count >= 2");
    if (!std::isfinite(min) || !std::isfinite(max) || !(min < max)) throw SpecError("axis needs finite min < max");
  }

  /// Parses "min:max:count".
  static AxisSpec parse(std::string_view text) {
    const auto a = text.find(':');
    const auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
    if (b == std::string_view::npos || text.find(':', b + 1) != std::string_view::npos)
      throw SpecError("axis must look like min:max:count, got '" + std::string(text) + "'");
    AxisSpec ax;
    const auto num = [&](std::string_view s, auto& out) {
      const auto* end = s.data() + s.size();
      auto [p, ec] = std::from_chars(s.data(), end, out);
      if (ec != std::errc() || p != end) throw SpecError("bad number '" + std::string(s) + "' in axis spec");
    };
    num(text.substr(0, a), ax.min);
    num(text.substr(a + 1, b - a - 1), ax.max);
    num(text.substr(b + 1), ax.count);
    ax.validate();
    return ax;
  }
};

struct Grid {
  CoordinateSystem system = CoordinateSystem::Polar2D;
  std::vector<std::string> names;
  std::vector<AxisSpec> axes;
  std::vector<double> values;  // last axis fastest; NaN outside the domain
  std::size_t in_domain_failures = 0;  // in-domain points whose evaluation was not finite
  nlohmann::json meta = nlohmann::json::object();

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.count;
    return n;
  }

  /// Lattice point for flat index i.
  std::vector<double> point(std::size_t i) const {
    std::vector<double> p(axes.size());
    for (std::size_t d = axes.size(); d-- > 0;) {
      p[d] = axes[d].node(i % axes[d].count);
      i /= axes[d].count;
    }
    return p;
  }
};

inline nlohmann::json meta_json(const SolutionMeta& m) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : m.params) params[k] = v;
  return {{"case", m.case_id}, {"params", params}, {"notes", m.notes}};
}

/// Evaluates sol on the lattice. Points outside the domain, or where the
/// evaluator reports a domain error, become NaN.
inline Grid sample_grid(const SeparatedSolution& sol, const std::vector<AxisSpec>& axes,
                        const nlohmann::json& settings = nlohmann::json::object()) {
  if (axes.size() != sol.dimension())
    throw SpecError("sample_grid: " + std::to_string(sol.dimension()) + " axes required, got " +
                    std::to_string(axes.size()));
  for (const auto& a : axes) a.validate();
  Grid g;
  g.system = sol.system();
  g.names = sol.coordinates();
  g.axes = axes;
  const std::size_t n = g.size();
  g.values.assign(n, std::numeric_limits<double>::quiet_NaN());
  std::size_t finite = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = g.point(i);
    if (!sol.in_domain(p)) continue;
    try {
      const double v = evaluate(sol, p);
      if (std::isfinite(v)) {
        g.values[i] = v;
        ++finite;
        continue;
      }
    } catch (const DomainError&) {
    }
    ++g.in_domain_failures;
  }
  if (finite == 0) throw EmptyDomainError("sample_grid: no lattice point lies in the solution domain");
  g.meta = meta_json(sol.meta());
  g.meta["system"] = to_string(sol.system());
  g.meta["settings"] = settings;
  return g;
}

/// Shortest round-trip decimal; NaN renders as "nan".
inline void append_number(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw IoError("number formatting failed");
  out.append(buf, p);
}

inline std::string export_csv(const Grid& g) {
  if (g.names.size() != g.axes.size() || g.values.size() != g.size()) throw IoError("export_csv: malformed grid");
  std::string out;
  for (const auto& n : g.names) out += n + ',';
  out += "u\n";
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    for (double c : g.point(i)) {
      append_number(out, c);
      out += ',';
    }
    append_number(out, g.values[i]);
    out += '\n';
  }
  return out;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 15];
  return s;
}

inline std::string export_json_meta(const Grid& g, std::string_view csv) {
  nlohmann::json axes = nlohmann::json::array();
  for (std::size_t d = 0; d < g.axes.size(); ++d)
    axes.push_back({{"name", g.names[d]}, {"min", g.axes[d].min}, {"max", g.axes[d].max}, {"count", g.axes[d].count}});
  std::size_t nan_count = 0;
  for (double v : g.values) nan_count += std::isnan(v) ? 1 : 0;
  const nlohmann::json j = {{"meta", g.meta},
                            {"axes", axes},
                            {"rows", g.values.size()},
                            {"nan_rows", nan_count},
                            {"in_domain_failures", g.in_domain_failures},
                            {"csv_hash", "fnv1a64:" + hex64(fnv1a64(csv))}};
  return j.dump(2) + "\n";
}

inline std::string export_json_meta(const Grid& g) { return export_json_meta(g, export_csv(g)); }

/// `<case>_<params>_<NxM>`, e.g. thm1.ii_A=1.3333333333333333_c=0_64x128.
inline std::string grid_file_stem(const Grid& g) {
  std::string s = g.meta.value("case", std::string("grid"));
  if (g.meta.contains("params"))
    for (const auto& [k, v] : g.meta["params"].items()) {
      s += '_' + k + '=';
      append_number(s, v.get<double>());
    }
  s += '_';
  for (std::size_t d = 0; d < g.axes.size(); ++d) {
    if (d) s += 'x';
    s += std::to_string(g.axes[d].count);
  }
  return s;
}

struct WrittenGrid {
  std::filesystem::path csv;
  std::filesystem::path json;
  std::string csv_hash;
};

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

inline WrittenGrid write_grid(const Grid& g, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto stem = grid_file_stem(g);
  const auto csv = export_csv(g);
  WrittenGrid w{dir / (stem + ".csv"), dir / (stem + ".json"), "fnv1a64:" + hex64(fnv1a64(csv))};
  write_file(w.csv, csv);
  write_file(w.json, export_json_meta(g, csv));
  return w;
}

}  // namespace infharm
