// Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion.
// Usage: acceptance <path-to-infharm-cli> <scratch-dir>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "infharm.hpp"

using namespace infharm;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome aronsson_reconstruction() {
  const auto sol = build_thm1_ii(4.0 / 3.0, 0.0);
  double g_err = 0.0;
  const double end = pi / 4 - 0.05;
  for (int k = 0; k <= 200; ++k) {
    const double t = end * k / 200;
    const double g = real_pow_third(std::cos(t), 4) - real_pow_third(std::sin(t), 4);
    g_err = std::max(g_err, std::abs(evaluate(sol, {1.0, t}) - g));
  }
  double rel = 0.0;
  for (double r : {0.5, 1.0, 1.7, 2.5})
    for (int k = 0; k <= 50; ++k) {
      const double t = end * k / 50;
      const double p[2] = {r, t};
      const auto x = to_cartesian(CoordinateSystem::Polar2D, p);
      const auto q = from_cartesian(CoordinateSystem::Polar2D, x);
      const double exact = closed_aronsson(x[0], x[1]);
      rel = std::max(rel, std::abs(evaluate(sol, q) - exact) / std::abs(exact));
    }
  return {g_err <= 1e-6 && rel <= 1e-6, "g max-abs " + fmt(g_err) + ", cartesian max-rel " + fmt(rel)};
}

Outcome residual_suite() {
  struct Inst {
    std::string name;
    std::function<SeparatedSolution()> make;
  };
  const double q = std::sqrt(3.0) / 4;
  Thm4Params t4i{.A = 1.0, .B = 0.5, .H0 = 1.0};
  Thm4Params t4ii{.A = 0.5};
  Thm4Params t4iii{.B = 0.2, .C = 0.5};
  const std::vector<Inst> inst{
      {"thm1.i(0.5,0.5)", [] { return build_thm1_i(0.5, 0.5); }},
      {"thm1.i(0.25,+q)", [q] { return build_thm1_i(0.25, q); }},
      {"thm1.i(0.75,-q)", [q] { return build_thm1_i(0.75, -q); }},
      {"thm1.ii(4/3)", [] { return build_thm1_ii(4.0 / 3.0); }},
      {"thm1.ii(-1/3)", [] { return build_thm1_ii(-1.0 / 3.0); }},
      {"thm1.ii(0)", [] { return build_thm1_ii(0.0); }},
      {"thm1.ii(1)", [] { return build_thm1_ii(1.0); }},
      {"thm1.iii(1/3)", [] { return build_thm1_iii(1.0 / 3.0); }},
      {"thm1.iii(0.5)", [] { return build_thm1_iii(0.5); }},
      {"thm1.iii(1)", [] { return build_thm1_iii(1.0); }},
      {"thm2.i(0)", [] { return build_thm2(Thm2Case::I, 0.0); }},
      {"thm2.i(0.25)", [] { return build_thm2(Thm2Case::I, 0.25); }},
      {"thm3(n=3)", [] { return build_thm3({0.3, 0.4}, 1); }},
      {"thm4.i", [t4i] { return build_thm4(Thm4Case::I, t4i); }},
      {"thm4.ii(0.5)", [t4ii] { return build_thm4(Thm4Case::II, t4ii); }},
      {"thm4.iii(0.2,0.5)", [t4iii] { return build_thm4(Thm4Case::III, t4iii); }},
  };
  const auto steps = default_h_ladder();
  std::size_t passed = 0;
  double worst = 0.0;
  std::string failed;
  for (const auto& i : inst) {
    try {
      const auto sol = i.make();
      const auto s = verify_solution(sol, sample_points(sol, 20, 0), steps).summary;
      const bool ok = s.passes;
      worst = std::max(worst, s.max_normalized);
      if (ok) ++passed;
      else failed += " " + i.name + "(max " + fmt(s.max_normalized) + ", order " + fmt(s.median_order) + ")";
    } catch (const std::exception& e) {
      failed += " " + i.name + "(" + e.what() + ")";
    }
  }
  return {passed == inst.size() && inst.size() >= 12,
          std::to_string(passed) + "/" + std::to_string(inst.size()) + " instances, worst max " + fmt(worst) +
              (failed.empty() ? "" : "; failed:" + failed)};
}

Outcome negative_control() {
  const auto bad = polar_power_exp_unchecked(0.5, 0.6);
  const auto good = build_thm1_i(0.5, 0.5);
  const auto pts = sample_points(bad, 20, 0);
  const std::vector<double> h{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  double bad_min = INFINITY, good_max = 0.0;
  for (const auto& p : pts) {
    bad_min = std::min(bad_min, residual_report(bad, p, h).normalized.back());
    good_max = std::max(good_max, residual_report(good, p, h).normalized.back());
  }
  return {bad_min >= 1e-2 && bad_min >= 1e4 * good_max,
          "perturbed min " + fmt(bad_min) + ", matched max " + fmt(good_max) + ", ratio " + fmt(bad_min / good_max)};
}

Outcome reductions() {
  UniformStream rng(2024);
  const auto a = build_thm3({0.25}, 2);
  const auto b = build_thm2(Thm2Case::I, 0.25);
  double e1 = 0.0, e2 = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double x = rng.in(-1, 1), y = rng.in(-1, 1);
    e1 = std::max(e1, std::abs(evaluate(a, {x, y}) - evaluate(b, {x, y})));
  }
  Thm4Params p{.A = 4.0 / 3.0};
  const auto s4 = build_thm4(Thm4Case::II, p);
  const auto s1 = build_thm1_ii(4.0 / 3.0);
  for (int k = 0; k < 100; ++k) {
    const double r = rng.in(0.5, 2), t = rng.in(-0.7, 0.7), al = rng.in(0.3, pi - 0.3);
    e2 = std::max(e2, std::abs(evaluate(s4, {r, t, al}) - evaluate(s1, {r * std::sin(al), t})));
  }
  return {e1 <= 1e-12 && e2 <= 1e-12, "n=2 vs planar " + fmt(e1) + ", spherical lift " + fmt(e2)};
}

Outcome first_integral() {
  bool ok = true;
  std::string detail;
  for (auto [A, B] : {std::pair{0.5, 0.2}, {1.0, 0.3}, {-0.5, 0.1}}) {
    IntegrationOptions opt;
    opt.t_lo = 0.05;
    opt.t_hi = pi - 0.05;
    const auto tab = integrate_profile_both(OdeSpec::spherical_polar(A, B), {pi / 2, 1.0}, opt);
    const auto t = tab.nodes();
    const auto y = tab.values();
    const auto I = tab.inverse_integrals();
    const double c0 = first_integral_thm4i(A, B, pi / 2, 1.0, 0.0);
    double drift = 0.0, lo = INFINITY, hi = -INFINITY;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k] < 0.4 || t[k] > pi - 0.4) continue;
      lo = std::min(lo, t[k]);
      hi = std::max(hi, t[k]);
      drift = std::max(drift, std::abs(first_integral_thm4i(A, B, t[k], y[k], I[k]) / c0 - 1.0));
    }
    ok = ok && drift <= 1e-6;
    detail += (detail.empty() ? "" : "; ") + std::string("(") + fmt(A) + "," + fmt(B) + ") drift " + fmt(drift) +
              " on [" + fmt(lo) + "," + fmt(hi) + "]";
    if (tab.t_min() > 0.4) detail += std::string(" (trajectory ends at ") + fmt(tab.t_min()) + ": " + to_string(tab.stop_low()) + ")";
  }
  return {ok, detail};
}

Outcome h_branch() {
  const double B = 0.2, C = 0.5, d = 1e-5;
  double worst = 0.0;
  for (int sign : {1, -1})
    for (int k = 0; k <= 200; ++k) {
      const double a = 1.0 + (pi - 2.0) * k / 200;
      const double fd =
          (std::log(thm4_case3_h(a + d, B, C, sign)) - std::log(thm4_case3_h(a - d, B, C, sign))) / (2 * d);
      const double s = std::sin(a);
      worst = std::max(worst, std::abs(fd - sign * std::sqrt(C * C - B * B / (s * s))));
    }
  return {worst <= 1e-6, "max deviation " + fmt(worst) + " (both signs, 201 points)"};
}

Outcome implicit_crosscheck() {
  double worst = 0.0;
  std::size_t nodes = 0, skipped = 0;
  const auto check = [&](const Profile& f) {
    const auto* tab = f.table();
    if (!tab) throw std::runtime_error("factor is not tabulated");
    const auto rel0 = ImplicitRelation::for_ode(tab->spec());
    const auto rel = rel0.with_c(rel0.psi(tab->anchor_y()) - tab->anchor_t());
    const auto t = tab->nodes();
    const auto y = tab->values();
    for (std::size_t k = 0; k < t.size(); ++k) {
      try {
        worst = std::max(worst, std::abs(implicit_residual(rel, t[k], y[k])));
        ++nodes;
      } catch (const DomainError&) {
        ++skipped;  // y exactly at a singular value of Psi
      }
    }
  };
  for (double A : {4.0 / 3.0, 1.15, 0.15, -0.15}) check(build_thm1_ii(A).factor(1));
  for (double B : {1.0 / 3.0, 0.5, 1.0}) check(build_thm1_iii(B).factor(0));
  return {worst <= 1e-6, "max |residual| " + fmt(worst) + " over " + std::to_string(nodes) + " nodes (" +
                             std::to_string(skipped) + " singular nodes skipped)"};
}

int run(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<double> parse_csv_values(const std::string& text, std::size_t& rows, std::vector<std::vector<double>>& coords) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> u;
  while (std::getline(in, line)) {
    std::vector<double> c;
    std::size_t pos = 0;
    for (;;) {
      const auto comma = line.find(',', pos);
      const auto cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      c.push_back(cell == "nan" ? NAN : std::stod(cell));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    u.push_back(c.back());
    c.pop_back();
    coords.push_back(std::move(c));
  }
  rows = u.size();
  return u;
}

Outcome figures(const std::string& cli, const fs::path& scratch) {
  const fs::path d1 = scratch / "run1", d2 = scratch / "run2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  const int rc1 = run("\"" + cli + "\" reproduce-figures --out \"" + d1.string() + "\" > /dev/null");
  const int rc2 = run("\"" + cli + "\" reproduce-figures --out \"" + d2.string() + "\" > /dev/null");
  if (rc1 != 0 || rc2 != 0) return {false, "exit codes " + std::to_string(rc1) + ", " + std::to_string(rc2)};

  std::size_t csv = 0, json = 0, identical = 0, files = 0, nonfinite = 0, scaling_checks = 0;
  double scaling = 0.0;
  for (const auto& e : fs::directory_iterator(d1)) {
    const auto name = e.path().filename();
    ++files;
    const auto a = slurp(e.path()), b = slurp(d2 / name);
    if (a == b) ++identical;
    if (e.path().extension() == ".json" && name != "manifest.json") {
      ++json;
      const auto j = nlohmann::json::parse(a);
      nonfinite += j["in_domain_failures"].get<std::size_t>();
    }
    if (e.path().extension() != ".csv") continue;
    ++csv;
    auto stem = e.path();
    stem.replace_extension(".json");
    const auto meta = nlohmann::json::parse(slurp(stem))["meta"];
    if (meta["case"] != "thm1.i") continue;
    const double A = meta["params"]["A"].get<double>();
    std::size_t rows = 0;
    std::vector<std::vector<double>> pts;
    const auto u = parse_csv_values(a, rows, pts);
    // r nodes are 0.05 (k+1): node 2k+1 sits at twice node k
    std::map<std::pair<long, long>, double> at;
    for (std::size_t i = 0; i < rows; ++i) at[{std::lround(pts[i][0] / 0.05), std::lround(pts[i][1] * 1e9)}] = u[i];
    for (const auto& [key, v] : at) {
      const auto it = at.find({2 * key.first, key.second});
      if (it == at.end() || v == 0.0) continue;
      scaling = std::max(scaling, std::abs(it->second / (std::pow(2.0, A) * v) - 1.0));
      ++scaling_checks;
    }
  }
  const bool ok = csv == 26 && json == 26 && identical == files && nonfinite == 0 && scaling <= 1e-12 &&
                  scaling_checks > 0;
  return {ok, std::to_string(csv) + " csv + " + std::to_string(json) + " json, " + std::to_string(identical) + "/" +
                  std::to_string(files) + " files byte-identical, " + std::to_string(nonfinite) +
                  " non-finite on-domain values, scaling max-rel " + fmt(scaling) + " over " +
                  std::to_string(scaling_checks) + " pairs"};
}

Outcome degenerate() {
  const auto res = resolve_thm3_degenerate(3, 1);
  const int passing = int(res.plus.passes) + int(res.minus.passes);
  return {passing == 1 && !res.accepted_name.empty(),
          std::to_string(passing) + " candidate passes: " + (res.accepted_name.empty() ? "none" : res.accepted_name) +
              " (rejected candidate max " + fmt(res.accepted_sign > 0 ? res.minus.max_normalized : res.plus.max_normalized) +
              ")"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <infharm-cli> <scratch-dir>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path scratch = argv[2];
  fs::create_directories(scratch);

  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0 = no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "Aronsson reconstruction", 2.0, aronsson_reconstruction},
      {2, "Residual suite", 30.0, residual_suite},
      {3, "Negative control", 0.0, negative_control},
      {4, "Reductions", 0.0, reductions},
      {5, "First integral", 0.0, first_integral},
      {6, "Case iii h-branch", 0.0, h_branch},
      {7, "Implicit/ODE cross-check", 0.0, implicit_crosscheck},
      {8, "Figure reproduction", 0.0, [&] { return figures(cli, scratch); }},
      {9, "Degenerate branch resolution", 0.0, degenerate},
  };
  int failures = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += "; over runtime budget";
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
              << fmt(secs) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
