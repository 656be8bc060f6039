#pragma once

// JSON problem description -> validated ProblemSpec. Schema (see README):
//
// {
//   "grid":   {"nx": 65, "ny": 65, "lx": 1.0, "ly": 1.0, "origin": [0, 0]},   // or "h" instead of lx/ly
//   "metric": {"family": "weighted_euclidean", "k": <field>}
//           | {"family": "riemannian", "A": [[a11, a12], [a21, a22]] | {"csv": "A.csv"}}
//           | {"family": "polytope", "vertices": [[x, y], ...]}
//           | {"family": "shifted", "b": [bx, by] | {"csv": "b.csv"}},
//   "rho": <field>, "phi": <field>, "psi": <field>,
//   "p_ladder": [2, 4, 8, 16, 32, 64],
//   "solver": {"tolerance": 1e-8, "max_iterations": 5000, "epsilon_first": 1e-2, "epsilon_last": 1e-6,
//              "optimizer": "projected_newton", "stencil": 16, "nonstrict_offset_n": 16,
//              "polytope_smoothing": 64},
//   "checks": {"duality_gap": 0.05, ...}
// }
//
// <field> is a number, {"constant": c, "overrides": [[node, value], ...]},
// {"affine": [c0, cx, cy]} (c0 + cx x + cy y) or {"csv": "relative/path.csv"}.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finsler_hj/error.hpp"
#include "finsler_hj/io.hpp"
#include "finsler_hj/solver.hpp"

namespace finsler_hj {

// Optional thresholds for the report; unset entries use the defaults.
struct CheckThresholds {
  double duality_gap = 0.05;         // |KR - B| / (1 + |KR|)
  double potential_gap = 0.05;
  double oracle_gap = 0.05;          // sup |u_limit - v|
  double complementarity = 0.02;     // leak fraction per sign
  double mk_residual = 0.1;          // r1 and r2
  double weak_duality = 1e-6;        // KR <= B + weak_duality (1 + |B|)
  double mass_balance_factor = 10.0; // |sum theta + int rho| <= factor * tol
  double estimate_ratio = 10.0;      // max/min across the ladder
};

struct LoadedProblem {
  ProblemSpec spec;
  Admissibility admissibility;
  CheckThresholds checks;
  std::filesystem::path source;
};

struct LoadOverrides {
  std::optional<int> grid;     // nodes per axis, extents kept
  std::optional<double> p_max; // truncate the ladder
};

namespace detail {

// 1-based line of the first occurrence of "key" in the text, 0 if absent.
inline std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Loader {
 public:
  Loader(std::string text, std::filesystem::path base) : text_(std::move(text)), base_(std::move(base)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    const std::size_t line = line_of_key(text_, field.substr(field.rfind('.') + 1));
    throw ParseError("field '" + field + "'" + (line > 0 ? " (line " + std::to_string(line) + ")" : "") + ": " + message,
                     field, line);
  }

  const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object() || !obj.contains(key)) fail(path + "." + key, "required");
    return obj.at(key);
  }

  double number(const nlohmann::json& j, const std::string& field) const {
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
  }

  int integer(const nlohmann::json& j, const std::string& field) const {
    if (!j.is_number_integer()) fail(field, "expected an integer");
    return j.get<int>();
  }

  Vec2 vec2(const nlohmann::json& j, const std::string& field) const {
    if (!j.is_array() || j.size() != 2) fail(field, "expected [x, y]");
    return {number(j[0], field), number(j[1], field)};
  }

  std::filesystem::path csv_path(const nlohmann::json& j, const std::string& field) const {
    if (!j.at("csv").is_string()) fail(field, "csv entry must be a path string");
    auto p = std::filesystem::path(j.at("csv").get<std::string>());
    if (p.is_relative()) p = base_ / p;
    if (!std::filesystem::exists(p)) fail(field, "referenced file does not exist: " + p.string());
    return p;
  }

  Grid grid(const nlohmann::json& root, const LoadOverrides& ov) const {
    const auto& g = require(root, "grid", "");
    const Vec2 origin = g.contains("origin") ? vec2(g.at("origin"), "grid.origin") : Vec2{};
    int nx = integer(require(g, "nx", "grid"), "grid.nx");
    int ny = g.contains("ny") ? integer(g.at("ny"), "grid.ny") : nx;
    double lx = 0.0;
    double ly = 0.0;
    if (g.contains("h")) {
      const double h = number(g.at("h"), "grid.h");
      lx = (nx - 1) * h;
      ly = (ny - 1) * h;
    } else {
      lx = g.contains("lx") ? number(g.at("lx"), "grid.lx") : 1.0;
      ly = g.contains("ly") ? number(g.at("ly"), "grid.ly") : lx;
    }
    if (ov.grid) {
      if (has_csv_reference(root)) {
        throw ValidationError("grid override: not allowed when fields are read from CSV files");
      }
      nx = *ov.grid;
    }
    if (nx < 3) fail("grid.nx", "nx >= 3 required");
    if (!(lx > 0.0) || !(ly > 0.0)) fail("grid", "extents must be positive");
    if (g.contains("ny") && !ov.grid) {
      const double h = lx / (nx - 1);
      if (std::abs((ny - 1) * h - ly) > 1e-9 * ly) fail("grid.ny", "ny inconsistent with lx, ly and nx (square cells)");
      return Grid(nx, ny, h, origin);
    }
    try {
      return Grid::covering(lx, ly, nx, origin);
    } catch (const ValidationError& e) {
      fail("grid", e.what());
    }
  }

  ScalarField field(const nlohmann::json& j, const std::string& field, const Grid& grid, const std::string& units) const {
    if (j.is_number()) return ScalarField::constant(grid, j.get<double>(), units);
    if (!j.is_object()) fail(field, "expected a number or an object");
    if (j.contains("csv")) {
      auto f = io::read_scalar_field(csv_path(j, field));
      if (!f.grid().same_as(grid)) throw GridMismatch("field '" + field + "': CSV grid does not match the problem grid");
      return {grid, std::vector<double>(f.values().begin(), f.values().end()), units};
    }
    if (j.contains("affine")) {
      const auto& a = j.at("affine");
      if (!a.is_array() || a.size() != 3) fail(field, "affine expects [c0, cx, cy]");
      const double c0 = number(a[0], field);
      const double cx = number(a[1], field);
      const double cy = number(a[2], field);
      return ScalarField::sample(grid, [&](Vec2 x) { return c0 + cx * x.x + cy * x.y; }, units);
    }
    if (j.contains("constant")) {
      std::vector<double> v(static_cast<std::size_t>(grid.node_count()), number(j.at("constant"), field));
      if (j.contains("overrides")) {
        for (const auto& o : j.at("overrides")) {
          if (!o.is_array() || o.size() != 2) fail(field, "overrides expects [[node, value], ...]");
          const int n = integer(o[0], field);
          if (n < 0 || n >= grid.node_count()) fail(field, "override node " + std::to_string(n) + " out of range");
          v[static_cast<std::size_t>(n)] = number(o[1], field);
        }
      }
      return {grid, std::move(v), units};
    }
    fail(field, "expected one of constant, affine, csv");
  }

  FinslerMetric metric(const nlohmann::json& root, const Grid& grid) const {
    const auto& m = require(root, "metric", "");
    const auto& fam = require(m, "family", "metric");
    if (!fam.is_string()) fail("metric.family", "expected a string");
    const std::string family = fam.get<std::string>();
    if (family == "weighted_euclidean") {
      const ScalarField k = m.contains("k") ? field(m.at("k"), "metric.k", grid, "") : ScalarField::constant(grid, 1.0);
      if (std::all_of(k.values().begin(), k.values().end(), [&](double v) { return v == k[0]; })) {
        return FinslerMetric::weighted_euclidean(k[0]);
      }
      return FinslerMetric::weighted_euclidean(NodalParameter<double>(grid, {k.values().begin(), k.values().end()}));
    }
    if (family == "riemannian") {
      const auto& a = require(m, "A", "metric");
      if (a.is_object() && a.contains("csv")) {
        auto [g, rows] = io::read_node_table(csv_path(a, "metric.A"), 4);
        if (!g.same_as(grid)) throw GridMismatch("metric.A: CSV grid does not match the problem grid");
        std::vector<Mat2> v;
        for (const auto& r : rows) v.push_back({r[0], r[1], r[2], r[3]});
        return FinslerMetric::riemannian(NodalParameter<Mat2>(grid, std::move(v)));
      }
      if (!a.is_array() || a.size() != 2) fail("metric.A", "expected [[a11, a12], [a21, a22]] or {\"csv\": ...}");
      const Vec2 r0 = vec2(a[0], "metric.A");
      const Vec2 r1 = vec2(a[1], "metric.A");
      return FinslerMetric::riemannian(Mat2{r0.x, r0.y, r1.x, r1.y});
    }
    if (family == "polytope") {
      const auto& vs = require(m, "vertices", "metric");
      if (!vs.is_array() || vs.size() < 3) fail("metric.vertices", "expected at least three [x, y] vertices");
      Polygon poly;
      for (const auto& v : vs) poly.push_back(vec2(v, "metric.vertices"));
      return FinslerMetric::polytope(poly);
    }
    if (family == "shifted") {
      const auto& b = require(m, "b", "metric");
      if (b.is_object() && b.contains("csv")) {
        auto [g, rows] = io::read_node_table(csv_path(b, "metric.b"), 2);
        if (!g.same_as(grid)) throw GridMismatch("metric.b: CSV grid does not match the problem grid");
        std::vector<Vec2> v;
        for (const auto& r : rows) v.push_back({r[0], r[1]});
        return FinslerMetric::shifted(NodalParameter<Vec2>(grid, std::move(v)));
      }
      return FinslerMetric::shifted(vec2(b, "metric.b"));
    }
    fail("metric.family", "unknown family '" + family + "' (weighted_euclidean, riemannian, polytope, shifted)");
  }

  SolverOptions solver(const nlohmann::json& root) const {
    SolverOptions o;
    if (!root.contains("solver")) return o;
    const auto& s = root.at("solver");
    if (!s.is_object()) fail("solver", "expected an object");
    static const std::set<std::string> known{"tolerance",   "max_iterations", "epsilon_first",      "epsilon_last",
                                             "optimizer",   "stencil",        "nonstrict_offset_n", "polytope_smoothing"};
    for (const auto& [key, _] : s.items()) {
      if (!known.contains(key)) fail("solver." + key, "unknown solver option");
    }
    if (s.contains("tolerance")) o.tolerance = number(s.at("tolerance"), "solver.tolerance");
    if (s.contains("max_iterations")) o.max_iterations = integer(s.at("max_iterations"), "solver.max_iterations");
    if (s.contains("epsilon_first")) o.epsilon_first = number(s.at("epsilon_first"), "solver.epsilon_first");
    if (s.contains("epsilon_last")) o.epsilon_last = number(s.at("epsilon_last"), "solver.epsilon_last");
    if (s.contains("nonstrict_offset_n")) o.nonstrict_offset_n = integer(s.at("nonstrict_offset_n"), "solver.nonstrict_offset_n");
    if (s.contains("polytope_smoothing")) o.polytope_smoothing = number(s.at("polytope_smoothing"), "solver.polytope_smoothing");
    if (s.contains("optimizer")) {
      const auto name = s.at("optimizer").is_string() ? s.at("optimizer").get<std::string>() : std::string();
      if (name == "projected_newton") {
        o.optimizer = OptimizerKind::ProjectedNewton;
      } else if (name == "projected_lbfgs") {
        o.optimizer = OptimizerKind::ProjectedLbfgs;
      } else {
        fail("solver.optimizer", "expected projected_newton or projected_lbfgs");
      }
    }
    if (s.contains("stencil")) {
      const int st = integer(s.at("stencil"), "solver.stencil");
      if (st != 8 && st != 16 && st != 32) fail("solver.stencil", "expected 8, 16 or 32");
      o.stencil = static_cast<Stencil>(st);
    }
    if (!(o.tolerance > 0.0)) fail("solver.tolerance", "must be positive");
    if (o.max_iterations < 1) fail("solver.max_iterations", "must be >= 1");
    if (o.nonstrict_offset_n < 1) fail("solver.nonstrict_offset_n", "must be >= 1");
    if (!(o.polytope_smoothing >= 3.0)) fail("solver.polytope_smoothing", "must be >= 3");
    return o;
  }

  CheckThresholds checks(const nlohmann::json& root) const {
    CheckThresholds c;
    if (!root.contains("checks")) return c;
    const auto& j = root.at("checks");
    const std::map<std::string, double*> slots{{"duality_gap", &c.duality_gap},
                                               {"potential_gap", &c.potential_gap},
                                               {"oracle_gap", &c.oracle_gap},
                                               {"complementarity", &c.complementarity},
                                               {"mk_residual", &c.mk_residual},
                                               {"weak_duality", &c.weak_duality},
                                               {"mass_balance_factor", &c.mass_balance_factor},
                                               {"estimate_ratio", &c.estimate_ratio}};
    for (const auto& [key, value] : j.items()) {
      const auto it = slots.find(key);
      if (it == slots.end()) fail("checks." + key, "unknown check");
      *it->second = number(value, "checks." + key);
    }
    return c;
  }

  std::vector<double> ladder(const nlohmann::json& root, const LoadOverrides& ov) const {
    std::vector<double> p{2, 4, 8, 16, 32, 64};
    if (root.contains("p_ladder")) {
      const auto& l = root.at("p_ladder");
      if (!l.is_array() || l.empty()) fail("p_ladder", "expected a non-empty array");
      p.clear();
      for (const auto& v : l) p.push_back(number(v, "p_ladder"));
    }
    if (ov.p_max) {
      std::erase_if(p, [&](double v) { return v > *ov.p_max; });
      if (p.empty()) throw ValidationError("p_ladder: --p-max removes every exponent");
    }
    return p;
  }

 private:
  bool has_csv_reference(const nlohmann::json& j) const {
    if (j.is_object()) {
      if (j.contains("csv")) return true;
      for (const auto& [k, v] : j.items()) {
        if (has_csv_reference(v)) return true;
      }
    } else if (j.is_array()) {
      for (const auto& v : j) {
        if (has_csv_reference(v)) return true;
      }
    }
    return false;
  }

  std::string text_;
  std::filesystem::path base_;
};

}  // namespace detail

// Parses and validates. Relative CSV references resolve against `base`.
inline LoadedProblem parse_problem(const std::string& text, const std::filesystem::path& base,
                                   const LoadOverrides& overrides = {}) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = std::min(e.byte, text.size());
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
    throw ParseError("malformed JSON (line " + std::to_string(line) + "): " + e.what(), "", line);
  }
  if (!root.is_object()) throw ParseError("problem must be a JSON object", "", 1);
  const detail::Loader L(text, base);
  static const std::set<std::string> known{"grid", "metric", "rho", "phi", "psi", "p_ladder", "solver", "checks",
                                           "description"};
  for (const auto& [key, _] : root.items()) {
    if (!known.contains(key)) L.fail(key, "unknown top-level key");
  }
  const Grid grid = L.grid(root, overrides);
  const FinslerMetric metric = L.metric(root, grid);
  ScalarField rho = L.field(L.require(root, "rho", ""), "rho", grid, "density");
  ScalarField phi = L.field(L.require(root, "phi", ""), "phi", grid, "length");
  ScalarField psi = L.field(L.require(root, "psi", ""), "psi", grid, "length");
  LoadedProblem out{ProblemSpec{grid, metric, std::move(rho), std::move(phi), std::move(psi), L.ladder(root, overrides),
                                L.solver(root)},
                    {},
                    L.checks(root),
                    {}};
  out.admissibility = validate(out.spec);
  return out;
}

inline LoadedProblem load_problem(const std::filesystem::path& path, const LoadOverrides& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read problem file " + path.string(), "", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  auto out = parse_problem(ss.str(), path.parent_path(), overrides);
  out.source = path;
  return out;
}

}  // namespace finsler_hj
