// End-to-end acceptance checks. One PASS/FAIL line per criterion; the exit
// code is the number of failures.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "finsler_hj/pipeline.hpp"
#include "support.hpp"

namespace fh = finsler_hj;
using fh::ScalarField;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Solved {
  fh::LoadedProblem prob;
  fh::LadderResult ladder;
  fh::DualityReport report;
  double seconds = 0.0;
};

Solved solve_config(const std::string& name, std::uint64_t seed = 0) {
  Solved s{fh::load_problem(fh::testing::config_dir() / (name + ".json")), {}, {}, 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  s.ladder = fh::solve_ladder(s.prob.spec);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.report = fh::duality_report(s.prob.spec, s.ladder.rungs.back(), s.ladder.admissibility.phi_effective, seed);
  return s;
}

const Solved& cached(const std::string& name) {
  static std::map<std::string, Solved> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, solve_config(name)).first;
  return it->second;
}

Outcome eikonal_limit() {
  const Solved& s = cached("eikonal");
  const auto& spec = s.prob.spec;
  const auto v = fh::maximal_subsolution_oracle(spec.metric, spec.grid, spec.phi, spec.psi, spec.options.stencil);
  const double gap = fh::sup_distance(s.ladder.u_limit, v);
  return {s.ladder.all_converged && gap <= 0.05 && s.seconds <= 60.0,
          fmt("65x65, p=64: sup|u - v| = %.4f (<= 0.05), ladder solved in %.2f s (<= 60)", gap, s.seconds)};
}

Outcome duality_chain() {
  const auto& e = cached("eikonal").report;
  const auto& w = cached("weighted").report;
  return {e.gap_rel <= 0.05 && w.gap_rel <= 0.05,
          fmt("|KR - B|/(1+|KR|): eikonal %.4f, weighted k=1+x1 %.4f (<= 0.05)", e.gap_rel, w.gap_rel)};
}

Outcome weak_duality() {
  const fh::Grid g = fh::testing::unit_square(17);
  std::mt19937_64 rng(20240601);
  const auto zoo = fh::testing::metric_zoo(g);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    const auto& m = zoo[static_cast<std::size_t>(k) % zoo.size()];
    const auto t = fh::testing::random_feasible_triple(g, m, rng);
    const double kr = fh::kr_objective(t.u, t.rho).value;
    const double b = fh::beckmann_objective(t.theta_cells, t.theta, t.phi, t.psi, m);
    worst = std::max(worst, kr - b);
  }
  return {worst <= 1e-6, fmt("100 random feasible triples on 17x17, four metric families: max(KR - B) = %.3e (<= 1e-6)", worst)};
}

Outcome mass_balance() {
  double worst = 0.0;
  int rungs = 0;
  bool all_converged = true;
  for (const char* name : {"eikonal", "weighted", "obstacle", "shifted", "hexagon"}) {
    const Solved& s = cached(name);
    const double tol = s.prob.spec.options.tolerance;
    for (const auto& r : s.ladder.rungs) {
      all_converged = all_converged && r.converged;
      if (!r.converged) continue;
      worst = std::max(worst, std::abs(r.theta.total() + fh::integrate(s.prob.spec.rho)) / tol);
      ++rungs;
    }
  }
  return {all_converged && worst <= 10.0,
          fmt("%g converged rungs over five configs: max |sum theta + int rho| = %.3f tol (<= 10 tol)", rungs, worst)};
}

Outcome complementarity() {
  const Solved& s = cached("obstacle");
  const auto& l = s.report.leak;
  const double floor = 10.0 * s.prob.spec.options.tolerance;
  // A sign with no mass has nothing to leak.
  const bool plus_ok = l.plus_total <= floor || l.plus_fraction() <= 0.02;
  const bool minus_ok = l.minus_total <= floor || l.minus_fraction() <= 0.02;
  return {plus_ok && minus_ok,
          fmt("obstacle p=64: theta+ leak %.4f of total %.3e, theta- leak %.4f of total %.4f (each <= 0.02)",
              l.plus_fraction(), l.plus_total, l.minus_fraction(), l.minus_total)};
}

Outcome metric_identities() {
  const fh::Grid g = fh::testing::unit_square(9);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  std::vector<fh::IdentitySample> samples(10000);
  for (auto& e : samples) e = {{pos(rng), pos(rng)}, {unif(rng), unif(rng)}, {unif(rng), unif(rng)}};
  auto zoo = fh::testing::metric_zoo(g);
  zoo.push_back(fh::FinslerMetric::riemannian(fh::Mat2::diagonal(1, 4)));
  zoo.push_back(fh::FinslerMetric::polytope(fh::testing::unit_square_polygon()));
  double closed = 0.0;
  double sampled = 0.0;
  for (const auto& m : zoo) {
    const double w = fh::check_identities(m, samples).worst();
    (m.closed_form_dual() ? closed : sampled) = std::max(m.closed_form_dual() ? closed : sampled, w);
  }
  return {closed <= 1e-9 && sampled <= 1e-3,
          fmt("1e4 samples: closed-form families %.2e (<= 1e-9), sampled-direction families %.2e (<= 1e-3)", closed, sampled)};
}

Outcome gradient_check() {
  const fh::Grid g = fh::testing::unit_square(9);
  double worst = 0.0;
  for (const auto& m : fh::testing::metric_zoo(g)) {
    const auto spec = fh::testing::make_spec(g, m, 1.0, 0.0, 0.0);
    for (double p : {2.0, 4.0, 8.0}) worst = std::max(worst, fh::testing::gradient_fd_error(spec, p, 50, 17));
  }
  return {worst <= 1e-6, fmt("9x9, p in {2,4,8}, 50 directions, four families: max relative error %.2e (<= 1e-6)", worst)};
}

Outcome asymmetric_metric() {
  const Solved& s = cached("shifted");
  const auto& grid = s.prob.spec.grid;
  const int a = grid.node(0, 0);
  const int b = grid.node(grid.nx() - 1, 0);
  const auto da = fh::finsler_dijkstra(s.prob.spec.metric, grid, std::vector<int>{a}).values[b];
  const auto db = fh::finsler_dijkstra(s.prob.spec.metric, grid, std::vector<int>{b}).values[a];
  const bool ok = std::abs(da - 1.5) <= 0.015 && std::abs(db - 0.5) <= 0.005 && s.ladder.all_converged &&
                  s.report.gap_rel <= 0.10;
  return {ok, fmt("b=(0.5,0): d((0,0)->(1,0)) = %.4f, d((1,0)->(0,0)) = %.4f, pipeline duality gap %.4f (<= 0.10)", da, db,
                  s.report.gap_rel)};
}

Outcome uniqueness() {
  const auto prob = fh::load_problem(fh::testing::config_dir() / "obstacle.json");
  const auto& spec = prob.spec;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int n : spec.grid.boundary_nodes()) {
    lo = std::min(lo, spec.phi[n]);
    hi = std::max(hi, spec.psi[n]);
  }
  const auto u0 = ScalarField::constant(spec.grid, lo);
  const auto u1 = ScalarField::constant(spec.grid, hi);
  const auto a = fh::solve_p(spec, 8.0, &u0);
  const auto b = fh::solve_p(spec, 8.0, &u1);
  const double d = fh::sup_distance(a.u, b.u);
  const double tol = spec.options.tolerance;
  return {a.converged && b.converged && d <= 100.0 * tol,
          fmt("obstacle p=8 from u=%g and u=%g: sup difference %.2e (<= 100 tol = %.0e)", lo, hi, d, 100.0 * tol)};
}

Outcome potential_identity() {
  const auto& e = cached("eikonal").report.potential;
  const auto& w = cached("weighted").report.potential;
  return {e.gap <= 0.05 && w.gap <= 0.05, fmt("gap: eikonal %.4f, weighted %.4f (<= 0.05)", e.gap, w.gap)};
}

Outcome compatibility_gate() {
  const auto out = std::filesystem::temp_directory_path() / "finsler_hj_acceptance_violated";
  std::filesystem::remove_all(out);
  fh::RunConfig cfg;
  cfg.config = fh::testing::config_dir() / "violated.json";
  cfg.commands = {fh::Command::Solve, fh::Command::Oracle, fh::Command::Report};
  cfg.out = out;
  std::ostringstream log;
  const auto r = fh::run_pipeline(cfg, log);
  const std::string detail = r.report.contains("failures") ? r.report.at("failures").at(0).at("detail").get<std::string>() : "";
  const bool witness = detail.find("boundary pair (0,0)") != std::string::npos;
  const bool no_solve = !std::filesystem::exists(out / "u_p2.csv") && !std::filesystem::exists(out / "ladder.json");
  return {r.exit_code == 2 && witness && no_solve,
          "exit " + std::to_string(r.exit_code) + ", " + (no_solve ? "no solver output" : "solver ran") + ": " + detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"eikonal limit", eikonal_limit},
      {"duality chain", duality_chain},
      {"weak duality", weak_duality},
      {"mass balance", mass_balance},
      {"boundary complementarity", complementarity},
      {"metric identities", metric_identities},
      {"gradient correctness", gradient_check},
      {"asymmetric metric", asymmetric_metric},
      {"uniqueness", uniqueness},
      {"potential identity", potential_identity},
      {"compatibility gate", compatibility_gate},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o{false, ""};
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
