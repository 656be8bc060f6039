#pragma once

// Builders shared by the unit tests and the acceptance binary.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <vector>

#include "finsler_hj/problem.hpp"
#include "finsler_hj/solver.hpp"
#include "finsler_hj/transport.hpp"

namespace finsler_hj::testing {

inline std::filesystem::path config_dir() { return std::filesystem::path(FINSLER_HJ_SOURCE_DIR) / "configs"; }

inline Grid unit_square(int n) { return Grid::covering(1.0, 1.0, n); }

inline ProblemSpec make_spec(const Grid& grid, FinslerMetric metric, double rho, double phi, double psi) {
  return ProblemSpec{grid, std::move(metric), ScalarField::constant(grid, rho), ScalarField::constant(grid, phi),
                     ScalarField::constant(grid, psi)};
}

inline ProblemSpec eikonal_spec(int n) {
  return make_spec(unit_square(n), FinslerMetric::weighted_euclidean(1.0), 1.0, 0.0, 0.0);
}

inline Polygon regular_hexagon() {
  Polygon p;
  for (int k = 0; k < 6; ++k) {
    const double t = std::numbers::pi * k / 3.0;
    p.push_back({std::cos(t), std::sin(t)});
  }
  return p;
}

inline Polygon unit_square_polygon() { return {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}; }

// One metric of every family; the polytope entry uses the sampled-direction
// dual.
inline std::vector<FinslerMetric> metric_zoo(const Grid& grid) {
  std::vector<double> k;
  for (int n = 0; n < grid.node_count(); ++n) k.push_back(1.0 + grid.node_position(n).x);
  return {FinslerMetric::weighted_euclidean(NodalParameter<double>(grid, k)),
          FinslerMetric::riemannian(Mat2{2.0, 1.0, 1.0, 2.0}),
          FinslerMetric::polytope(regular_hexagon()),
          FinslerMetric::shifted(Vec2{0.5, 0.0})};
}

struct FeasibleTriple {
  ScalarField u;
  ScalarField rho;
  ScalarField phi;
  ScalarField psi;
  VectorField theta_cells;
  BoundaryMeasure theta;
};

// Random u scaled to H*(x, grad u) <= 1 on every cell with a random box
// around it, and a random flux whose divergence fixes rho inside; rho on the
// boundary is free and theta is the induced normal trace.
inline FeasibleTriple random_feasible_triple(const Grid& grid, const FinslerMetric& metric, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> a(8);
  for (double& v : a) v = unif(rng);
  std::vector<double> u(static_cast<std::size_t>(grid.node_count()));
  for (int n = 0; n < grid.node_count(); ++n) {
    const Vec2 x = grid.node_position(n);
    u[static_cast<std::size_t>(n)] = a[0] * std::sin(3 * x.x + a[1]) + a[2] * std::cos(2 * x.y + a[3]) +
                                     a[4] * x.x * x.y + a[5] * x.x + a[6] * x.y + 0.1 * unif(rng);
  }
  double worst = 0.0;
  for (int c = 0; c < grid.cell_count(); ++c) worst = std::max(worst, metric.dual(grid.cell_center(c), cell_gradient_at(grid, u, c)));
  const double target = 0.2 + 0.8 * (0.5 * (unif(rng) + 1.0));
  for (double& v : u) v *= target / worst;
  ScalarField uf(grid, u);

  std::vector<double> phi(u), psi(u);
  for (int n : grid.boundary_nodes()) {
    phi[static_cast<std::size_t>(n)] -= 0.25 * (unif(rng) + 1.0);
    psi[static_cast<std::size_t>(n)] += 0.25 * (unif(rng) + 1.0);
  }

  std::vector<Vec2> flux(static_cast<std::size_t>(grid.cell_count()));
  for (Vec2& f : flux) f = {gauss(rng), gauss(rng)};
  std::vector<double> div(static_cast<std::size_t>(grid.node_count()), 0.0);
  add_gradient_transpose(grid, flux, div);
  std::vector<double> rho(div.size());
  for (int n = 0; n < grid.node_count(); ++n) {
    rho[static_cast<std::size_t>(n)] = grid.is_boundary(n) ? unif(rng) : div[static_cast<std::size_t>(n)] / grid.node_mass(n);
  }
  ScalarField rf(grid, rho);
  VectorField tf(grid, flux);
  BoundaryMeasure theta = boundary_part(divergence_residual(tf, rf));
  return {std::move(uf), std::move(rf), ScalarField(grid, phi), ScalarField(grid, psi), std::move(tf), std::move(theta)};
}

// Worst relative mismatch between the analytic directional derivative and a
// fourth-order five-point difference over `directions` random unit-scale
// directions.
inline double gradient_fd_error(const ProblemSpec& spec, double p, int directions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> u(static_cast<std::size_t>(spec.grid.node_count()));
  for (double& v : u) v = unif(rng);
  const PLaplaceEnergy energy(spec, p, spec.epsilon_for(p));
  std::vector<double> g(u.size()), scratch(u.size());
  energy.evaluate(u, g);
  double worst = 0.0;
  for (int k = 0; k < directions; ++k) {
    std::vector<double> d(u.size());
    for (double& v : d) v = 2.0 * unif(rng) - 1.0;
    double analytic = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) analytic += g[i] * d[i];
    const double t = 1e-4;
    const auto at = [&](double s) {
      std::vector<double> v(u);
      for (std::size_t i = 0; i < u.size(); ++i) v[i] += s * d[i];
      return energy.evaluate(v, scratch);
    };
    const double fd = (8.0 * (at(t) - at(-t)) - (at(2.0 * t) - at(-2.0 * t))) / (12.0 * t);
    worst = std::max(worst, std::abs(fd - analytic) / std::max(std::abs(analytic), 1e-12));
  }
  return worst;
}

}  // namespace finsler_hj::testing
