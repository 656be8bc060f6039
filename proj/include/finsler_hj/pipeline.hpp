#pragma once

// solve -> oracle -> report orchestration behind the command line tool.
//
//   solve   runs the p-ladder and writes u_p<p>.csv, flux_p<p>.csv,
//           theta_p<p>.csv and ladder.json
//   oracle  writes the distance envelopes oracle_v.csv (+ .json sidecar) and
//           oracle_w.csv
//   report  re-reads those artifacts and evaluates every check
//
// report.json is always derived from the files on disk, so `solve` and a
// later `report` on the same directory produce identical output. Exit codes:
// 0 all checks pass, 1 a check failed, 2 invalid input or missing artifacts.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finsler_hj/distance.hpp"
#include "finsler_hj/io.hpp"
#include "finsler_hj/plot.hpp"
#include "finsler_hj/problem.hpp"
#include "finsler_hj/solver.hpp"
#include "finsler_hj/transport.hpp"

namespace finsler_hj {

enum class Command { Solve, Oracle, Report };

struct RunConfig {
  std::filesystem::path config;
  std::vector<Command> commands;
  std::filesystem::path out = "out";
  bool plots = false;
  std::uint64_t seed = 0;
  LoadOverrides overrides;
};

struct RunOutcome {
  int exit_code = 0;
  nlohmann::json report;
};

inline std::string p_label(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

namespace detail {

struct CheckList {
  nlohmann::json checks = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();

  // passed = value <= threshold
  void add(const std::string& invariant, double value, double threshold, const std::string& note = {}) {
    const bool passed = value <= threshold;
    nlohmann::json c{{"invariant", invariant}, {"value", value}, {"threshold", threshold}, {"passed", passed}};
    if (!note.empty()) c["note"] = note;
    checks.push_back(c);
    if (!passed) failures.push_back({{"invariant", invariant}, {"value", value}, {"threshold", threshold}});
  }
  void add_flag(const std::string& invariant, bool passed, const std::string& note = {}) {
    nlohmann::json c{{"invariant", invariant}, {"passed", passed}};
    if (!note.empty()) c["note"] = note;
    checks.push_back(c);
    if (!passed) failures.push_back({{"invariant", invariant}, {"detail", note}});
  }
};

inline std::filesystem::path rung_file(const std::filesystem::path& dir, const char* stem, double p) {
  return dir / (std::string(stem) + "_p" + p_label(p) + ".csv");
}

inline nlohmann::json ladder_json(const LoadedProblem& prob, const LadderResult& lad) {
  nlohmann::json rungs = nlohmann::json::array();
  for (const PSolution& r : lad.rungs) {
    rungs.push_back({{"p", r.p},
                     {"epsilon", r.epsilon},
                     {"energy", r.energy},
                     {"iterations", r.iterations},
                     {"grad_norm", r.grad_norm},
                     {"tolerance", r.tolerance},
                     {"converged", r.converged},
                     {"stop_reason", r.stop_reason},
                     {"energy_history", r.energy_history}});
  }
  const auto& c = lad.admissibility.compatibility;
  return {{"rungs", rungs},
          {"sup_differences", lad.sup_differences},
          {"all_converged", lad.all_converged},
          {"phi_offset", lad.admissibility.phi_offset},
          {"compatibility",
           {{"status", to_string(c.status)},
            {"margin", c.margin},
            {"tolerance", c.tolerance},
            {"witness", {c.x_node, c.y_node}}}},
          {"optimizer", to_string(prob.spec.options.optimizer)}};
}

inline void run_solve(const LoadedProblem& prob, const RunConfig& cfg, std::ostream& log) {
  const LadderResult lad = solve_ladder(prob.spec);
  for (const PSolution& r : lad.rungs) {
    io::write_csv(rung_file(cfg.out, "u", r.p), r.u);
    io::write_csv(rung_file(cfg.out, "flux", r.p), r.flux);
    io::write_csv(rung_file(cfg.out, "theta", r.p), r.theta);
    log << "  p=" << p_label(r.p) << "  iterations=" << r.iterations << "  projected-gradient=" << r.grad_norm
        << (r.converged ? "" : "  NOT CONVERGED (" + r.stop_reason + ")") << "\n";
  }
  io::write_json(cfg.out / "ladder.json", ladder_json(prob, lad));
  if (cfg.plots) {
    const PSolution& last = lad.rungs.back();
    plot::scalar_field(last.u, cfg.out / ("u_p" + p_label(last.p) + ".ppm"));
    plot::flux_magnitude(last.flux, cfg.out / ("flux_p" + p_label(last.p) + ".ppm"));
    plot::boundary_measure(last.theta, cfg.out / ("theta_p" + p_label(last.p) + ".ppm"));
  }
}

inline void run_oracle(const LoadedProblem& prob, const RunConfig& cfg) {
  const auto& spec = prob.spec;
  const auto boundary = spec.grid.boundary_nodes();
  const ScalarField v = maximal_subsolution_oracle(spec.metric, spec.grid, spec.phi, spec.psi, spec.options.stencil);
  DistanceField d{std::vector<int>(boundary.begin(), boundary.end()), v, {}, spec.options.stencil, Direction::FromSource};
  io::write_distance_field(cfg.out / "oracle_v.csv", d);
  io::write_csv(cfg.out / "oracle_w.csv", lower_envelope_w(spec.metric, spec.grid, spec.phi, spec.options.stencil));
  if (cfg.plots) plot::scalar_field(v, cfg.out / "oracle_v.ppm");
}

// Exponents p with a u_p<p>.csv in dir.
inline std::vector<double> rungs_on_disk(const std::filesystem::path& dir) {
  std::vector<double> ps;
  if (!std::filesystem::is_directory(dir)) return ps;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.size() > 6 && name.rfind("u_p", 0) == 0 && name.ends_with(".csv")) {
      try {
        std::size_t used = 0;
        const std::string num = name.substr(3, name.size() - 7);
        const double p = std::stod(num, &used);
        if (used == num.size()) ps.push_back(p);
      } catch (const std::exception&) {
      }
    }
  }
  std::sort(ps.begin(), ps.end());
  return ps;
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("missing artifact " + path.filename().string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), path.filename().string(), 0);
  }
}

inline void report_ladder(const LoadedProblem& prob, const RunConfig& cfg, nlohmann::json& report, CheckList& checks) {
  const auto& spec = prob.spec;
  const auto& th = prob.checks;
  if (rungs_on_disk(cfg.out).empty()) throw MissingArtifact("missing artifact u_p*.csv in " + cfg.out.string());
  // ladder.json names the rungs of the last solve; stray files are ignored.
  const nlohmann::json ladder = read_json(cfg.out / "ladder.json");
  std::map<double, nlohmann::json> records;
  std::vector<double> ps;
  for (const auto& r : ladder.at("rungs")) {
    ps.push_back(r.at("p").get<double>());
    records[ps.back()] = r;
  }
  if (ps.empty()) throw MissingArtifact("missing artifact: ladder.json lists no rungs");

  const ScalarField& phi_eff = prob.admissibility.phi_effective;
  std::vector<PSolution> sols;
  for (double p : ps) {
    PSolution s;
    s.p = p;
    s.u = io::read_scalar_field(rung_file(cfg.out, "u", p));
    s.flux = io::read_vector_field(rung_file(cfg.out, "flux", p));
    s.theta = io::read_boundary_measure(rung_file(cfg.out, "theta", p));
    require_same_grid(spec.grid, s.u.grid(), "report artifacts");
    const auto rec = records.find(p);
    if (rec == records.end()) throw MissingArtifact("missing artifact ladder.json entry for p=" + p_label(p));
    s.epsilon = rec->second.at("epsilon").get<double>();
    s.energy = rec->second.at("energy").get<double>();
    s.iterations = rec->second.at("iterations").get<int>();
    s.grad_norm = rec->second.at("grad_norm").get<double>();
    s.tolerance = rec->second.at("tolerance").get<double>();
    s.converged = rec->second.at("converged").get<bool>();
    s.stop_reason = rec->second.at("stop_reason").get<std::string>();
    s.energy_history = rec->second.at("energy_history").get<std::vector<double>>();
    s.residual = divergence_residual(s.flux, spec.rho);
    sols.push_back(std::move(s));
  }

  const double rho_mass = integrate(spec.rho);
  nlohmann::json rung_report = nlohmann::json::array();
  bool all_converged = true;
  double worst_mass = 0.0;
  double worst_box = 0.0;
  double worst_interior = 0.0;  // ||r_interior||_2 / rung threshold
  double worst_euler = 0.0;
  double worst_monotone = 0.0;
  for (const PSolution& s : sols) {
    double box = 0.0;
    for (int n : spec.grid.boundary_nodes()) {
      box = std::max({box, phi_eff[n] - s.u[n], s.u[n] - spec.psi[n]});
    }
    double interior = 0.0;
    for (int n : spec.grid.interior_nodes()) interior += s.residual[n] * s.residual[n];
    interior = std::sqrt(interior);
    double rise = 0.0;
    for (std::size_t k = 1; k < s.energy_history.size(); ++k) {
      const double f0 = s.energy_history[k - 1];
      rise = std::max(rise, (s.energy_history[k] - f0) / (1.0 + std::abs(f0)));
    }
    const double mass = std::abs(s.theta.total() + rho_mass);
    const double euler = flux_energy_gap(spec, s);
    rung_report.push_back({{"p", s.p},
                           {"converged", s.converged},
                           {"iterations", s.iterations},
                           {"mass_balance", mass},
                           {"box_violation", box},
                           {"interior_residual", interior},
                           {"flux_energy_gap", euler},
                           {"theta_plus", s.theta.positive_mass()},
                           {"theta_minus", s.theta.negative_mass()},
                           {"checkerboard", checkerboard_indicator(s.u)}});
    all_converged = all_converged && s.converged;
    if (s.converged) {
      worst_mass = std::max(worst_mass, mass);
      worst_interior = std::max(worst_interior, interior / s.tolerance);
      worst_euler = std::max(worst_euler, euler);
    }
    worst_box = std::max(worst_box, box);
    worst_monotone = std::max(worst_monotone, rise);
  }
  report["rungs"] = rung_report;
  report["sup_differences"] = ladder.at("sup_differences");
  checks.add_flag("solver.converged", all_converged, all_converged ? "" : "at least one rung stopped early");
  checks.add("solver.mass_balance", worst_mass, th.mass_balance_factor * spec.options.tolerance,
             "|sum theta + int rho| over converged rungs");
  checks.add("solver.box_feasibility", worst_box, 0.0, "phi <= u <= psi on boundary nodes");
  checks.add("solver.interior_residual", worst_interior, 1.0, "||r_interior||_2 relative to the stopping threshold");
  checks.add("solver.flux_energy_identity", worst_euler, 1e-8, "Euler identity, relative");
  checks.add("solver.energy_monotone", worst_monotone, 16.0 * std::numeric_limits<double>::epsilon(),
             "relative energy increase along optimizer iterations");

  const EstimateReport est = estimate_diagnostics(sols);
  nlohmann::json est_rungs = nlohmann::json::array();
  for (const auto& e : est.rungs) {
    est_rungs.push_back({{"p", e.p},
                         {"holder_quotient", e.holder_quotient},
                         {"theta_plus", e.theta_plus},
                         {"theta_minus", e.theta_minus},
                         {"flux_l1", e.flux_l1}});
  }
  report["estimates"] = {{"holder_exponent", est.holder_exponent}, {"rungs", est_rungs}};
  checks.add_flag("solver.estimates_bounded",
                  est.holder_bounded && est.theta_plus_bounded && est.theta_minus_bounded && est.flux_bounded,
                  "Holder quotient, theta+/- masses and int|Theta| within a factor 10 across the ladder");

  // Transport checks at the largest rung.
  const PSolution& last = sols.back();
  const DualityReport d = duality_report(spec, last, phi_eff, cfg.seed);
  const double floor = th.mass_balance_factor * spec.options.tolerance;
  report["duality"] = {{"p", last.p},
                       {"kr", d.kr_value},
                       {"kr_max_dual_gradient", d.kr_max_dual_grad},
                       {"beckmann", d.beckmann_value},
                       {"gap_abs", d.gap_abs},
                       {"gap_rel", d.gap_rel},
                       {"complementarity",
                        {{"delta", d.leak.delta},
                         {"theta_plus_leak", d.leak.plus_leak},
                         {"theta_plus_total", d.leak.plus_total},
                         {"theta_minus_leak", d.leak.minus_leak},
                         {"theta_minus_total", d.leak.minus_total}}},
                       {"lipschitz", {{"violation", d.lipschitz.violation}, {"tolerance", d.lipschitz.tolerance}, {"pairs", d.lipschitz.pairs}}},
                       {"mk_residuals", {{"r1", d.mk.r1}, {"r2", d.mk.r2}}},
                       {"potential_identity", {{"lhs", d.potential.lhs}, {"rhs", d.potential.rhs}, {"gap", d.potential.gap}}}};
  checks.add("transport.weak_duality", d.kr_value - d.beckmann_value, th.weak_duality * (1.0 + std::abs(d.beckmann_value)),
             "KR - Beckmann");
  checks.add("transport.duality_gap", d.gap_rel, th.duality_gap, "|KR - Beckmann| / (1 + |KR|)");
  checks.add("transport.potential_identity", d.potential.gap, th.potential_gap);
  checks.add("transport.complementarity_plus", d.leak.plus_total > floor ? d.leak.plus_fraction() : 0.0,
             th.complementarity,
             d.leak.plus_total > floor ? "theta+ mass off {u = phi} / total" : "theta+ empty at this rung");
  checks.add("transport.complementarity_minus", d.leak.minus_total > floor ? d.leak.minus_fraction() : 0.0,
             th.complementarity,
             d.leak.minus_total > floor ? "theta- mass off {u = psi} / total" : "theta- empty at this rung");
  checks.add("transport.lipschitz", d.lipschitz.violation, d.lipschitz.tolerance, "max u(x) - u(y) - d_H(y,x), sampled");
  checks.add("transport.mk_residual_r1", d.mk.r1, th.mk_residual);
  checks.add("transport.mk_residual_r2", d.mk.r2, th.mk_residual);
}

inline void report_oracle(const LoadedProblem& prob, const RunConfig& cfg, nlohmann::json& report, CheckList& checks) {
  const auto& spec = prob.spec;
  const ScalarField v = io::read_scalar_field(cfg.out / "oracle_v.csv");
  const ScalarField w = io::read_scalar_field(cfg.out / "oracle_w.csv");
  require_same_grid(spec.grid, v.grid(), "oracle_v.csv");
  require_same_grid(spec.grid, w.grid(), "oracle_w.csv");
  double order = 0.0;
  for (int n = 0; n < spec.grid.node_count(); ++n) order = std::max(order, w[n] - v[n]);
  nlohmann::json o{{"w_minus_v_max", order}};
  checks.add("distance.envelope_order", order, compatibility_tolerance(spec.metric, spec.grid, spec.options.stencil),
             "w <= v");
  std::vector<double> ps;
  if (std::filesystem::exists(cfg.out / "ladder.json")) {
    for (const auto& r : read_json(cfg.out / "ladder.json").at("rungs")) ps.push_back(r.at("p").get<double>());
  }
  if (!ps.empty()) {
    const ScalarField u = io::read_scalar_field(rung_file(cfg.out, "u", ps.back()));
    require_same_grid(spec.grid, u.grid(), "oracle comparison");
    const double gap = sup_distance(u, v);
    const bool positive_source =
        std::all_of(spec.rho.values().begin(), spec.rho.values().end(), [](double r) { return r > 0.0; });
    o["p"] = ps.back();
    o["sup_gap"] = gap;
    o["asserted"] = positive_source;
    // With rho > 0 the limit is the maximal subsolution; otherwise u is only
    // bounded by v and the gap is informational.
    if (positive_source) checks.add("oracle.sup_gap", gap, prob.checks.oracle_gap, "sup |u_limit - v|");
  }
  report["oracle"] = o;
}

inline nlohmann::json problem_json(const LoadedProblem& prob, const RunConfig& cfg) {
  const auto& s = prob.spec;
  const auto& c = prob.admissibility.compatibility;
  return {{"config", cfg.config.filename().string()},
          {"family", to_string(s.metric.family())},
          {"grid", {{"nx", s.grid.nx()}, {"ny", s.grid.ny()}, {"h", s.grid.h()}}},
          {"p_ladder", s.p_ladder},
          {"stencil", static_cast<int>(s.options.stencil)},
          {"seed", cfg.seed},
          {"compatibility", {{"status", to_string(c.status)}, {"margin", c.margin}, {"witness", {c.x_node, c.y_node}}}},
          {"phi_offset", prob.admissibility.phi_offset}};
}

}  // namespace detail

inline RunOutcome run_pipeline(const RunConfig& cfg, std::ostream& log) {
  RunOutcome outcome;
  nlohmann::json& report = outcome.report;
  auto has = [&](Command c) { return std::find(cfg.commands.begin(), cfg.commands.end(), c) != cfg.commands.end(); };
  auto error_out = [&](const std::string& kind, const std::string& message) {
    report = {{"status", "error"}, {"failures", {{{"invariant", kind}, {"detail", message}}}}};
    outcome.exit_code = 2;
    log << "error: " << message << "\n";
    std::error_code ec;
    if (std::filesystem::is_directory(cfg.out, ec)) io::write_json(cfg.out / "report.json", report);
    return outcome;
  };
  try {
    std::filesystem::create_directories(cfg.out);
    const LoadedProblem prob = load_problem(cfg.config, cfg.overrides);
    log << "problem " << cfg.config.filename().string() << ": " << to_string(prob.spec.metric.family()) << " metric, "
        << prob.spec.grid.nx() << "x" << prob.spec.grid.ny() << " grid, compatibility "
        << to_string(prob.admissibility.compatibility.status) << "\n";
    if (has(Command::Solve)) {
      log << "solve\n";
      detail::run_solve(prob, cfg, log);
    }
    if (has(Command::Oracle)) {
      log << "oracle\n";
      detail::run_oracle(prob, cfg);
    }
    detail::CheckList checks;
    report = {{"problem", detail::problem_json(prob, cfg)}};
    if (has(Command::Solve) || has(Command::Report)) detail::report_ladder(prob, cfg, report, checks);
    if (has(Command::Oracle) || (has(Command::Report) && std::filesystem::exists(cfg.out / "oracle_v.csv"))) {
      detail::report_oracle(prob, cfg, report, checks);
    }
    report["checks"] = checks.checks;
    report["failures"] = checks.failures;
    report["status"] = checks.failures.empty() ? "pass" : "fail";
    io::write_json(cfg.out / "report.json", report);
    for (const auto& f : checks.failures) log << "FAILED " << f.at("invariant").get<std::string>() << "\n";
    log << (checks.failures.empty() ? "all checks passed" : "checks failed") << " (" << checks.checks.size()
        << " evaluated)\n";
    outcome.exit_code = checks.failures.empty() ? 0 : 1;
    return outcome;
  } catch (const MissingArtifact& e) {
    return error_out("cli.artifacts", e.what());
  } catch (const IncompatibleSpec& e) {
    return error_out("distance.compatibility", e.what());
  } catch (const ParseError& e) {
    return error_out("cli.parse", e.what());
  } catch (const Error& e) {
    return error_out("cli.validation", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return error_out("cli.filesystem", e.what());
  }
}

}  // namespace finsler_hj
