// Command-line frontend: catalogue, build, eval, verify, grid, sweep and
// reproduce-figures.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "infharm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace infharm;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConstraint = 2, kVerification = 3, kIo = 4, kPartial = 5 };

constexpr int kMaxX = 9;

struct Options {
  std::string case_id;
  std::optional<std::string> A;
  std::optional<std::string> B, C, c;  // strings so that sweep can take lists
  std::optional<double> H0;
  std::optional<int> n, j, sign;
  std::optional<std::string> r, theta, alpha;
  std::optional<std::string> x[kMaxX];
  std::optional<std::string> h_ladder;
  std::size_t samples = 20;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  bool json_out = false;
  std::optional<std::string> only;
  std::string config;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used == 0 || used != item.size()) throw SpecError(std::string("bad number '") + item + "' for --" + what);
    v.push_back(d);
  }
  if (v.empty()) throw SpecError(std::string("empty value for --") + what);
  return v;
}

double parse_scalar(const std::string& text, const char* what) {
  const auto v = parse_list(text, what);
  if (v.size() != 1) throw SpecError(std::string("--") + what + " takes a single number here");
  return v.front();
}

CaseParams case_params(const Options& o) {
  CaseParams p;
  if (o.A) p.A = parse_list(*o.A, "A");
  if (o.B) p.B = parse_scalar(*o.B, "B");
  if (o.C) p.C = parse_scalar(*o.C, "C");
  if (o.c) p.c = parse_scalar(*o.c, "c");
  p.H0 = o.H0;
  p.n = o.n;
  p.j = o.j;
  p.sign = o.sign;
  return p;
}

fs::path out_dir(const Options& o) {
  if (o.out) return *o.out;
  if (const char* env = std::getenv("INFHARM_OUT"); env && *env) return env;
  return "out";
}

std::string shortest(double v) {
  std::string s;
  append_number(s, v);
  return s;
}

std::string params_stem(const SolutionMeta& m) {
  std::string s = m.case_id;
  for (const auto& [k, v] : m.params) s += '_' + k + '=' + shortest(v);
  return s;
}

const std::string& require_case(const Options& o) {
  if (o.case_id.empty()) throw ConstraintError("no case given (positional or --case); see catalogue");
  return o.case_id;
}

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  write_file(path, text);
}

json summary_json(const VerifySummary& s) {
  const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "nan"); };
  return {{"max_normalized", s.max_normalized},
          {"median_order", num(s.median_order)},
          {"max_coordinate_mismatch", s.max_coordinate_mismatch},
          {"exact_points", s.exact_points},
          {"all_exact", s.all_exact},
          {"passes", s.passes}};
}

std::vector<double> steps_of(const Options& o) {
  return o.h_ladder ? parse_list(*o.h_ladder, "h-ladder") : default_h_ladder();
}

VerifyResult run_verify(const SeparatedSolution& sol, const Options& o) {
  const auto pts = sample_points(sol, o.samples, o.seed);
  const auto steps = steps_of(o);
  return verify_solution(sol, pts, steps);
}

// ---------------------------------------------------------------------------

int cmd_catalogue(const Options& o) {
  if (o.json_out) {
    json arr = json::array();
    for (const auto& e : catalogue())
      arr.push_back({{"id", e.id},
                     {"system", to_string(e.system)},
                     {"summary", e.summary},
                     {"constraint", e.constraint},
                     {"params", e.params},
                     {"defaults", e.defaults}});
    std::cout << arr.dump(2) << "\n";
    return kOk;
  }
  for (const auto& e : catalogue()) {
    std::cout << e.id << "  [" << to_string(e.system) << "]  " << e.summary << "\n"
              << "    " << e.id << ": " << e.constraint << "\n"
              << "    defaults: " << e.defaults << "\n";
  }
  return kOk;
}

int cmd_build(const Options& o) {
  const auto sol = build_case(require_case(o), case_params(o));
  json factors = json::array();
  const auto names = sol.coordinates();
  for (std::size_t i = 0; i < sol.dimension(); ++i) {
    const auto& f = sol.factor(i);
    factors.push_back({{"coordinate", names[i]}, {"lo", f.lo()}, {"hi", f.hi()}, {"tabulated", f.table() != nullptr}});
  }
  json j = meta_json(sol.meta());
  j["system"] = to_string(sol.system());
  j["factors"] = factors;
  if (o.json_out) {
    std::cout << j.dump(2) << "\n";
    return kOk;
  }
  std::cout << sol.meta().case_id << " (" << to_string(sol.system()) << ")\n";
  for (const auto& [k, v] : sol.meta().params) std::cout << "  " << k << " = " << shortest(v) << "\n";
  for (const auto& f : factors)
    std::cout << "  " << f["coordinate"].get<std::string>() << " in [" << shortest(f["lo"].get<double>()) << ", "
              << shortest(f["hi"].get<double>()) << "]" << (f["tabulated"].get<bool>() ? " (tabulated)" : "") << "\n";
  for (const auto& n : sol.meta().notes)
    if (!n.empty()) std::cout << "  note: " << n << "\n";
  return kOk;
}

std::vector<double> eval_point(const SeparatedSolution& sol, const Options& o) {
  std::vector<std::pair<std::string, const std::optional<std::string>*>> want;
  switch (sol.system()) {
    case CoordinateSystem::Polar2D: want = {{"r", &o.r}, {"theta", &o.theta}}; break;
    case CoordinateSystem::Spherical3D: want = {{"r", &o.r}, {"theta", &o.theta}, {"alpha", &o.alpha}}; break;
    case CoordinateSystem::CartesianND:
      if (sol.dimension() > kMaxX) throw ConstraintError("eval supports at most 9 Cartesian coordinates");
      for (std::size_t i = 0; i < sol.dimension(); ++i) want.emplace_back("x" + std::to_string(i + 1), &o.x[i]);
      break;
  }
  std::vector<double> p;
  for (const auto& [name, val] : want) {
    if (!*val) throw ConstraintError("eval needs --" + name);
    p.push_back(parse_scalar(**val, name.c_str()));
  }
  return p;
}

int cmd_eval(const Options& o) {
  const auto sol = build_case(require_case(o), case_params(o));
  const auto p = eval_point(sol, o);
  const double u = evaluate(sol, p);
  if (o.json_out) std::cout << json{{"case", sol.meta().case_id}, {"point", p}, {"u", u}}.dump() << "\n";
  else std::cout << shortest(u) << "\n";
  return kOk;
}

int cmd_verify(const Options& o) {
  const auto sol = build_case(require_case(o), case_params(o));
  const auto res = run_verify(sol, o);
  json reports = json::array();
  for (const auto& r : res.reports) {
    json rj = {{"point", r.point}, {"steps", r.steps}, {"raw", r.raw}, {"normalized", r.normalized},
               {"exact", r.exact}};
    rj["observed_order"] = std::isfinite(r.observed_order) ? json(r.observed_order) : json("inf");
    if (!r.cartesian_normalized.empty()) rj["cartesian_normalized"] = r.cartesian_normalized;
    reports.push_back(std::move(rj));
  }
  json j = meta_json(sol.meta());
  j["system"] = to_string(sol.system());
  j["samples"] = o.samples;
  j["seed"] = o.seed;
  j["summary"] = summary_json(res.summary);
  j["reports"] = reports;
  const auto path = out_dir(o) / ("verify_" + params_stem(sol.meta()) + ".json");
  write_text(path, j.dump(2) + "\n");
  if (o.json_out) {
    std::cout << json{{"report", path.string()}, {"summary", j["summary"]}}.dump(2) << "\n";
  } else {
    const auto& s = res.summary;
    std::cout << sol.meta().case_id << ": max normalized residual " << shortest(s.max_normalized) << " at h = "
              << shortest(res.reports.front().steps.back()) << ", median order "
              << (std::isfinite(s.median_order) ? shortest(s.median_order) : std::string("inf (exact)")) << ", "
              << (s.passes ? "PASS" : "FAIL") << "\n"
              << "report: " << path.string() << "\n";
  }
  return res.summary.passes ? kOk : kVerification;
}

std::vector<AxisSpec> grid_axes(const SeparatedSolution& sol, const Options& o, json& settings) {
  auto axes = default_axes(sol.system(), sol.dimension());
  const auto names = sol.coordinates();
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const std::optional<std::string>* flag = nullptr;
    if (sol.system() == CoordinateSystem::CartesianND) {
      if (i < kMaxX) flag = &o.x[i];
    } else {
      flag = i == 0 ? &o.r : i == 1 ? &o.theta : &o.alpha;
    }
    if (flag && *flag) axes[i] = AxisSpec::parse(**flag);
    settings["axes"][names[i]] = shortest(axes[i].min) + ":" + shortest(axes[i].max) + ":" +
                                 std::to_string(axes[i].count);
  }
  return axes;
}

int cmd_grid(const Options& o) {
  const auto sol = build_case(require_case(o), case_params(o));
  json settings = {{"command", "grid"}};
  const auto axes = grid_axes(sol, o, settings);
  const auto g = sample_grid(sol, axes, settings);
  const auto w = write_grid(g, out_dir(o));
  if (o.json_out) std::cout << json{{"csv", w.csv.string()}, {"json", w.json.string()}, {"csv_hash", w.csv_hash}}.dump(2) << "\n";
  else std::cout << w.csv.string() << "\n" << w.json.string() << "\n";
  return kOk;
}

int cmd_sweep(const Options& o) {
  const auto& id = require_case(o);
  // Every scalar parameter may be a comma list; the sweep runs the product.
  const auto list = [](const std::optional<std::string>& s, const char* what) {
    return s ? std::optional(parse_list(*s, what)) : std::nullopt;
  };
  const bool vector_A = id == "thm3";
  const auto As = vector_A ? std::nullopt : list(o.A, "A");
  const auto Bs = list(o.B, "B"), Cs = list(o.C, "C"), cs = list(o.c, "c");
  const auto values = [](const std::optional<std::vector<double>>& v) {
    return v ? std::vector<std::optional<double>>(v->begin(), v->end()) : std::vector<std::optional<double>>{std::nullopt};
  };
  json rows = json::array();
  bool any_fail = false, any_constraint = false;
  for (auto a : values(As))
    for (auto b : values(Bs))
      for (auto cc : values(Cs))
        for (auto k : values(cs)) {
          CaseParams p;
          if (vector_A && o.A) p.A = parse_list(*o.A, "A");
          if (a) p.A = std::vector{*a};
          p.B = b;
          p.C = cc;
          p.c = k;
          p.H0 = o.H0;
          p.n = o.n;
          p.j = o.j;
          p.sign = o.sign;
          json row;
          try {
            const auto sol = build_case(id, p);
            const auto res = run_verify(sol, o);
            row = meta_json(sol.meta());
            row["status"] = res.summary.passes ? "pass" : "fail";
            row["summary"] = summary_json(res.summary);
            any_fail |= !res.summary.passes;
          } catch (const ConstraintError& e) {
            row = {{"case", id}, {"status", "constraint"}, {"error", e.what()}};
            if (a) row["A"] = *a;
            if (b) row["B"] = *b;
            if (cc) row["C"] = *cc;
            if (k) row["c"] = *k;
            any_constraint = true;
          }
          if (!o.json_out) {
            std::cout << row["status"].get<std::string>();
            if (row.contains("params"))
              for (const auto& [key, v] : row["params"].items()) std::cout << " " << key << "=" << shortest(v.get<double>());
            if (row.contains("summary"))
              std::cout << " max_normalized=" << shortest(row["summary"]["max_normalized"].get<double>());
            if (row.contains("error")) std::cout << " (" << row["error"].get<std::string>() << ")";
            std::cout << "\n";
          }
          rows.push_back(std::move(row));
        }
  const auto path = out_dir(o) / ("sweep_" + id + ".json");
  write_text(path, json{{"case", id}, {"samples", o.samples}, {"seed", o.seed}, {"runs", rows}}.dump(2) + "\n");
  if (o.json_out) std::cout << json{{"report", path.string()}, {"runs", rows}}.dump(2) << "\n";
  else std::cout << "report: " << path.string() << "\n";
  return any_fail ? kVerification : any_constraint ? kConstraint : kOk;
}

int cmd_reproduce(const Options& o) {
  const double c = o.c ? parse_scalar(*o.c, "c") : 0.0;
  const auto dir = out_dir(o);
  json entries = json::array();
  bool partial = false;
  std::size_t written = 0;
  for (const auto& set : figure_sets(c)) {
    if (o.only && set.case_id != *o.only) continue;
    json e = {{"case", set.case_id}};
    try {
      const auto sol = build_case(set.case_id, set.params);
      e["params"] = meta_json(sol.meta())["params"];
      const json settings = {{"command", "reproduce-figures"}};
      const auto g = sample_grid(sol, default_axes(sol.system(), sol.dimension()), settings);
      const auto w = write_grid(g, dir);
      e["csv"] = w.csv.filename().string();
      e["json"] = w.json.filename().string();
      e["csv_hash"] = w.csv_hash;
      e["in_domain_failures"] = g.in_domain_failures;
      e["status"] = g.in_domain_failures == 0 ? "ok" : "nonfinite";
      partial |= g.in_domain_failures != 0;
      ++written;
      if (!o.json_out) std::cout << w.csv.string() << "\n";
    } catch (const IoError&) {
      throw;
    } catch (const Error& ex) {
      e["status"] = "failed";
      e["error"] = ex.what();
      partial = true;
      std::cerr << set.case_id << ": " << ex.what() << "\n";
    }
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw ConstraintError("--only matched no figure set");
  const auto manifest = dir / "manifest.json";
  write_text(manifest, json{{"c", c}, {"grids", written}, {"entries", entries}}.dump(2) + "\n");
  if (o.json_out) std::cout << json{{"manifest", manifest.string()}, {"grids", written}}.dump(2) << "\n";
  else std::cout << manifest.string() << "\n";
  return partial ? kPartial : kOk;
}

// ---------------------------------------------------------------------------

using Setters = std::map<std::string, std::function<void(const json&)>>;

std::string json_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + json_text(x);
    return s;
  }
  if (v.is_number()) return shortest(v.get<double>());
  throw SpecError("config value must be a number, string or list");
}

struct Registered {
  Setters setters;
  std::map<std::string, CLI::Option*> options;
};

Registered add_common(CLI::App* sub, Options& o) {
  Registered reg;
  const auto str = [&](const std::string& key, std::optional<std::string>& dst, const std::string& help) {
    reg.options[key] = sub->add_option("--" + key, dst, help);
    reg.setters[key] = [&dst](const json& v) { dst = json_text(v); };
  };
  const auto integer = [&](const std::string& key, std::optional<int>& dst, const std::string& help) {
    reg.options[key] = sub->add_option("--" + key, dst, help);
    reg.setters[key] = [&dst](const json& v) {
      if (!v.is_number_integer()) throw SpecError("config key must be an integer");
      dst = v.get<int>();
    };
  };
  reg.options["case"] = sub->add_option("case,--case", o.case_id, "catalogue case id");
  reg.setters["case"] = [&o](const json& v) { o.case_id = v.get<std::string>(); };
  str("A", o.A, "exponent A (thm3: comma list of n-1 coefficients)");
  str("B", o.B, "rate B");
  str("C", o.C, "radial parameter C (thm4.iii)");
  str("c", o.c, "integration constant c");
  reg.options["H0"] = sub->add_option("--H0", o.H0, "thm4.i: H at alpha = pi/2");
  reg.setters["H0"] = [&o](const json& v) { o.H0 = v.get<double>(); };
  integer("n", o.n, "dimension (thm3)");
  integer("j", o.j, "tabulated coordinate, 1-based (thm3)");
  integer("sign", o.sign, "branch sign (thm4.iii)");
  str("r", o.r, "radius, or min:max:count for grid");
  str("theta", o.theta, "azimuth in radians, or min:max:count");
  str("alpha", o.alpha, "polar angle in radians, or min:max:count");
  for (int i = 0; i < kMaxX; ++i) str("x" + std::to_string(i + 1), o.x[i], "Cartesian coordinate or min:max:count");
  str("h-ladder", o.h_ladder, "comma list of decreasing FD steps");
  reg.options["samples"] = sub->add_option("--samples", o.samples, "sample points for verify");
  reg.setters["samples"] = [&o](const json& v) { o.samples = v.get<std::size_t>(); };
  reg.options["seed"] = sub->add_option("--seed", o.seed, "RNG seed for sample sets");
  reg.setters["seed"] = [&o](const json& v) { o.seed = v.get<std::uint64_t>(); };
  str("out", o.out, "output directory (default $INFHARM_OUT or ./out)");
  reg.options["json"] = sub->add_flag("--json", o.json_out, "machine-readable output");
  reg.setters["json"] = [&o](const json& v) { o.json_out = v.get<bool>(); };
  str("only", o.only, "reproduce-figures: restrict to one case id");
  sub->add_option("--config", o.config, "JSON file with the same keys as the flags");
  return reg;
}

void apply_config(const Options& o, Registered& reg) {
  if (o.config.empty()) return;
  std::ifstream f(o.config);
  if (!f) throw IoError("cannot read config " + o.config);
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const json::exception& e) {
    throw SpecError("config " + o.config + ": " + e.what());
  }
  if (!cfg.is_object()) throw SpecError("config must be a JSON object");
  for (const auto& [key, v] : cfg.items()) {
    auto it = reg.setters.find(key);
    if (it == reg.setters.end()) throw SpecError("unknown config key '" + key + "'");
    if (reg.options.at(key)->count() > 0) continue;  // flags win
    try {
      it->second(v);
    } catch (const json::exception& e) {
      throw SpecError("config key '" + key + "': " + e.what());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separated infinity-harmonic functions: build, evaluate, verify and export"};
  app.require_subcommand(1);
  Options o;
  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Cmd cmds[] = {
      {"catalogue", "list buildable cases and their constraints", cmd_catalogue},
      {"build", "build a case and describe its factors", cmd_build},
      {"eval", "evaluate a case at one point", cmd_eval},
      {"verify", "finite-difference residual check", cmd_verify},
      {"grid", "sample a case on a lattice and write CSV + JSON", cmd_grid},
      {"sweep", "verify over comma-separated parameter lists", cmd_sweep},
      {"reproduce-figures", "write the grids behind the figures", cmd_reproduce},
  };
  std::vector<std::pair<CLI::App*, Registered>> subs;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    subs.emplace_back(sub, add_common(sub, o));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConstraint;
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i].first->parsed()) continue;
    try {
      apply_config(o, subs[i].second);
      return cmds[i].run(o);
    } catch (const IoError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kIo;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kConstraint;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kFailure;
    }
  }
  return kFailure;
}
