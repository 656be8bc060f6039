#pragma once

// Values of the transport problems attached to a solved ladder:
//
//   KR        = max int u rho           over H*(x, grad u) <= 1, phi <= u <= psi on the boundary
//   Beckmann  = min int H(x, Theta) + int psi dtheta- - int phi dtheta+
//               over -div Theta = rho in Omega, Theta . n = theta on the boundary
//
// On the grid the constraint is "divergence residual = theta on the boundary,
// zero inside", so summation by parts plus H(x,p) H*(x,q) >= <p,q> gives
// KR <= Beckmann for every feasible pair, not only optimal ones.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "finsler_hj/distance.hpp"
#include "finsler_hj/geometry.hpp"
#include "finsler_hj/metric.hpp"
#include "finsler_hj/solver.hpp"

namespace finsler_hj {

struct KrValue {
  double value = 0.0;        // int u rho
  double max_dual_grad = 0.0;  // max_c H*(x_c, grad u_c); <= 1 for a feasible potential
};

inline KrValue kr_objective(const ScalarField& u, const ScalarField& rho, const FinslerMetric* metric = nullptr) {
  require_same_grid(u.grid(), rho.grid(), "kr_objective");
  const Grid& grid = u.grid();
  KrValue r;
  for (int n = 0; n < grid.node_count(); ++n) r.value += u[n] * rho[n] * grid.node_mass(n);
  if (metric != nullptr) {
    for (int c = 0; c < grid.cell_count(); ++c) {
      r.max_dual_grad = std::max(r.max_dual_grad, metric->dual(grid.cell_center(c), cell_gradient_at(grid, u.values(), c)));
    }
  }
  return r;
}

// sum_c H(x_c, Theta_c) h^2 + sum psi theta- - sum phi theta+
inline double beckmann_objective(const VectorField& theta_cells, const BoundaryMeasure& theta, const ScalarField& phi,
                                 const ScalarField& psi, const FinslerMetric& metric) {
  const Grid& grid = theta_cells.grid();
  require_same_grid(grid, theta.grid(), "beckmann_objective");
  require_same_grid(grid, phi.grid(), "beckmann_objective");
  require_same_grid(grid, psi.grid(), "beckmann_objective");
  const double h2 = grid.h() * grid.h();
  double v = 0.0;
  for (int c = 0; c < grid.cell_count(); ++c) {
    const Vec2 t = theta_cells[c];
    if (t.x != 0.0 || t.y != 0.0) v += metric.primal(grid.cell_center(c), t) * h2;
  }
  const auto nodes = grid.boundary_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double w = theta[k];
    if (w > 0.0) v -= phi[nodes[k]] * w;
    if (w < 0.0) v += psi[nodes[k]] * (-w);
  }
  return v;
}

struct MkResiduals {
  double r1 = 0.0;  // Theta = omega dH*(grad u), omega-weighted
  double r2 = 0.0;  // H*(grad u) = 1 where omega > 0, omega-weighted
  double omega_mass = 0.0;
};

// With polytope_smoothing > 0 a polytope dual is replaced by the same soft-max
// surrogate the solver minimizes; its gradient is single-valued where the
// exact gauge has kinks.
inline MkResiduals mk_residuals(const ScalarField& u, const VectorField& theta_cells, const FinslerMetric& metric,
                                double polytope_smoothing = 0.0) {
  require_same_grid(u.grid(), theta_cells.grid(), "mk_residuals");
  const Grid& grid = u.grid();
  constexpr double guard = 1e-300;
  MkResiduals r;
  double s1 = 0.0;
  double s2 = 0.0;
  for (int c = 0; c < grid.cell_count(); ++c) {
    const Vec2 x = grid.cell_center(c);
    const Vec2 t = theta_cells[c];
    const double omega = metric.primal(x, t);
    if (omega <= 0.0) continue;
    const Vec2 q = cell_gradient_at(grid, u.values(), c);
    auto d = metric.dual_derivatives(x, q, false);
    if (polytope_smoothing > 0.0) {
      if (const auto polar = metric.polar_vertices(x)) d = soft_max_dual(*polar, q, polytope_smoothing, false);
    }
    s1 += omega * norm(t - d.grad * omega) / (omega + guard);
    s2 += omega * std::abs(d.value - 1.0);
    r.omega_mass += omega;
  }
  if (r.omega_mass > 0.0) {
    r.r1 = s1 / r.omega_mass;
    r.r2 = s2 / r.omega_mass;
  }
  return r;
}

// int u rho + sum u theta  vs  sum_c H(x_c, Theta_c) h^2
struct PotentialIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;  // |lhs - rhs| / (1 + |rhs|)
};

inline PotentialIdentity potential_identity(const ScalarField& u, const ScalarField& rho, const VectorField& theta_cells,
                                            const BoundaryMeasure& theta, const FinslerMetric& metric) {
  const Grid& grid = u.grid();
  require_same_grid(grid, rho.grid(), "potential_identity");
  require_same_grid(grid, theta_cells.grid(), "potential_identity");
  require_same_grid(grid, theta.grid(), "potential_identity");
  PotentialIdentity r;
  r.lhs = kr_objective(u, rho).value;
  const auto nodes = grid.boundary_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) r.lhs += u[nodes[k]] * theta[k];
  const double h2 = grid.h() * grid.h();
  for (int c = 0; c < grid.cell_count(); ++c) r.rhs += metric.primal(grid.cell_center(c), theta_cells[c]) * h2;
  r.gap = std::abs(r.lhs - r.rhs) / (1.0 + std::abs(r.rhs));
  return r;
}

struct LipschitzCheck {
  double violation = 0.0;  // max sampled u(x) - u(y) - d_H(y, x)
  double tolerance = 0.0;  // metrication allowance
  int pairs = 0;
};

// Samples `sources` nodes y, one Dijkstra run each, and `targets` nodes x per y.
inline LipschitzCheck lipschitz_violation(const ScalarField& u, const FinslerMetric& metric, std::uint64_t seed,
                                          int sources = 100, int targets = 100, Stencil stencil = Stencil::Sixteen) {
  const Grid& grid = u.grid();
  const LatticeGraph graph(metric, grid, stencil);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, grid.node_count() - 1);
  std::vector<int> ys(static_cast<std::size_t>(sources));
  std::vector<std::vector<int>> xs(static_cast<std::size_t>(sources), std::vector<int>(static_cast<std::size_t>(targets)));
  for (int s = 0; s < sources; ++s) {
    ys[static_cast<std::size_t>(s)] = pick(rng);
    for (int& x : xs[static_cast<std::size_t>(s)]) x = pick(rng);
  }
  std::vector<double> worst(static_cast<std::size_t>(sources), -std::numeric_limits<double>::infinity());
  parallel_for(
      sources,
      [&](int s) {
        const int y = ys[static_cast<std::size_t>(s)];
        const auto d = graph.run(std::span<const int>(&y, 1), Direction::FromSource);
        for (int x : xs[static_cast<std::size_t>(s)]) {
          worst[static_cast<std::size_t>(s)] =
              std::max(worst[static_cast<std::size_t>(s)], u[x] - u[y] - d.distance[static_cast<std::size_t>(x)]);
        }
      },
      1);
  LipschitzCheck r;
  r.violation = *std::max_element(worst.begin(), worst.end());
  r.tolerance = compatibility_tolerance(metric, grid, stencil);
  r.pairs = sources * targets;
  return r;
}

struct ComplementarityLeak {
  double plus_leak = 0.0;    // theta+ mass where |u - phi| > delta
  double plus_total = 0.0;
  double minus_leak = 0.0;   // theta- mass where |u - psi| > delta
  double minus_total = 0.0;
  double delta = 0.0;

  double plus_fraction() const { return plus_total > 0.0 ? plus_leak / plus_total : 0.0; }
  double minus_fraction() const { return minus_total > 0.0 ? minus_leak / minus_total : 0.0; }
};

inline ComplementarityLeak complementarity_leak(const ScalarField& u, const BoundaryMeasure& theta, const ScalarField& phi,
                                                const ScalarField& psi, double delta) {
  const Grid& grid = u.grid();
  ComplementarityLeak r;
  r.delta = delta;
  const auto nodes = grid.boundary_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int n = nodes[k];
    const double w = theta[k];
    if (w > 0.0) {
      r.plus_total += w;
      if (std::abs(u[n] - phi[n]) > delta) r.plus_leak += w;
    } else if (w < 0.0) {
      r.minus_total -= w;
      if (std::abs(u[n] - psi[n]) > delta) r.minus_leak -= w;
    }
  }
  return r;
}

struct DualityReport {
  double kr_value = 0.0;
  double kr_max_dual_grad = 0.0;
  double beckmann_value = 0.0;
  double gap_abs = 0.0;
  double gap_rel = 0.0;  // |KR - B| / (1 + |KR|)
  ComplementarityLeak leak;
  LipschitzCheck lipschitz;
  MkResiduals mk;
  PotentialIdentity potential;
  double mass_balance = 0.0;  // |sum theta + int rho|
  std::optional<double> oracle_gap;  // sup |u - v| when an oracle comparison was run
};

// Diagnostics of one rung. phi_effective is the lower obstacle the rung was
// solved with (phi shifted down when compatibility is not strict).
inline DualityReport duality_report(const ProblemSpec& spec, const PSolution& sol, const ScalarField& phi_effective,
                                    std::uint64_t seed) {
  DualityReport r;
  const auto kr = kr_objective(sol.u, spec.rho, &spec.metric);
  r.kr_value = kr.value;
  r.kr_max_dual_grad = kr.max_dual_grad;
  r.beckmann_value = beckmann_objective(sol.flux, sol.theta, phi_effective, spec.psi, spec.metric);
  r.gap_abs = std::abs(r.kr_value - r.beckmann_value);
  r.gap_rel = r.gap_abs / (1.0 + std::abs(r.kr_value));
  r.leak = complementarity_leak(sol.u, sol.theta, phi_effective, spec.psi, contact_threshold(spec, spec.options.tolerance));
  r.lipschitz = lipschitz_violation(sol.u, spec.metric, seed, 100, 100, spec.options.stencil);
  r.mk = mk_residuals(sol.u, sol.flux, spec.metric, spec.options.polytope_smoothing);
  r.potential = potential_identity(sol.u, spec.rho, sol.flux, sol.theta, spec.metric);
  r.mass_balance = std::abs(sol.theta.total() + integrate(spec.rho));
  return r;
}

struct WeightedEuclideanRun {
  LadderResult ladder;
  ScalarField oracle;
  DualityReport report;
};

// Full pipeline with H(x,p) = k(x)|p|; the limit is compared with the weighted
// distance envelope min_y psi(y) + d_k(y, x).
inline WeightedEuclideanRun special_case_weighted_euclidean(const ScalarField& k, ProblemSpec spec,
                                                            std::uint64_t seed = 0) {
  require_same_grid(spec.grid, k.grid(), "special_case_weighted_euclidean");
  for (double v : k.values()) {
    if (!(v > 0.0)) throw NonpositiveWeight("weighted Euclidean: k must be positive at every node");
  }
  spec.metric = FinslerMetric::weighted_euclidean(NodalParameter<double>(k.grid(), std::vector<double>(k.values().begin(), k.values().end())));
  WeightedEuclideanRun out;
  out.ladder = solve_ladder(spec);
  const ScalarField& phi_eff = out.ladder.admissibility.phi_effective;
  out.oracle = maximal_subsolution_oracle(spec.metric, spec.grid, phi_eff, spec.psi, spec.options.stencil);
  out.report = duality_report(spec, out.ladder.rungs.back(), phi_eff, seed);
  out.report.oracle_gap = sup_distance(out.ladder.u_limit, out.oracle);
  return out;
}

}  // namespace finsler_hj
