#include <gtest/gtest.h>

#include <random>

#include "finsler_hj/geometry.hpp"
#include "support.hpp"

namespace fh = finsler_hj;
using fh::Grid;
using fh::ScalarField;
using fh::Vec2;
using fh::VectorField;

TEST(Grid, TopologyAndMasses) {
  const Grid g = fh::testing::unit_square(5);
  EXPECT_DOUBLE_EQ(g.h(), 0.25);
  EXPECT_EQ(g.node_count(), 25);
  EXPECT_EQ(g.cell_count(), 16);
  EXPECT_EQ(g.boundary_nodes().size(), 16u);
  EXPECT_EQ(g.interior_nodes().size(), 9u);
  double mass = 0.0;
  for (int n = 0; n < g.node_count(); ++n) mass += g.node_mass(n);
  EXPECT_NEAR(mass, 1.0, 1e-15);
  for (std::size_t k = 0; k < g.boundary_nodes().size(); ++k) EXPECT_EQ(g.boundary_slot(g.boundary_nodes()[k]), static_cast<int>(k));
  EXPECT_THROW(Grid(2, 5, 0.1), fh::ValidationError);
  EXPECT_THROW(Grid(5, 5, 0.0), fh::ValidationError);
}

TEST(CellGradient, ExactOnAffineFields) {
  const Grid g = fh::testing::unit_square(5);
  const auto grad = fh::cell_gradient(ScalarField::sample(g, [](Vec2 x) { return x.x; }));
  for (const Vec2& v : grad.values()) {
    EXPECT_NEAR(v.x, 1.0, 1e-14);
    EXPECT_NEAR(v.y, 0.0, 1e-14);
  }
  const auto zero = fh::cell_gradient(ScalarField::constant(g, 3.0));
  for (const Vec2& v : zero.values()) EXPECT_EQ(v, (Vec2{0.0, 0.0}));
}

TEST(CellGradient, MidpointRuleOnQuadratic) {
  const Grid g = fh::testing::unit_square(5);
  const auto grad = fh::cell_gradient(ScalarField::sample(g, [](Vec2 x) { return x.x * x.x; }));
  for (int c = 0; c < g.cell_count(); ++c) EXPECT_NEAR(grad[c].x, 2.0 * g.cell_center(c).x, 1e-14);
}

TEST(DivergenceResidual, ZeroData) {
  const Grid g = fh::testing::unit_square(5);
  const auto r = fh::divergence_residual(VectorField::constant(g, {0, 0}), ScalarField::constant(g, 0.0));
  for (double v : r.values()) EXPECT_EQ(v, 0.0);
}

TEST(DivergenceResidual, UniformFluxThreeByThree) {
  const Grid g = fh::testing::unit_square(3);
  const auto r = fh::divergence_residual(VectorField::constant(g, {1, 0}), ScalarField::constant(g, 0.0));
  EXPECT_NEAR(r[g.node(1, 1)], 0.0, 1e-15);
  double sum = 0.0;
  for (int n : g.boundary_nodes()) {
    sum += r[n];
    const auto [i, j] = g.node_ij(n);
    // r = Theta . grad(hat): negative where the flux enters
    if (i == 0) {
      EXPECT_LT(r[n], 0.0);
    } else if (i == 2) {
      EXPECT_GT(r[n], 0.0);
    } else {
      EXPECT_NEAR(r[n], 0.0, 1e-15);
    }
  }
  EXPECT_NEAR(sum, 0.0, 1e-15);
  // h/2 per adjacent cell: corners touch one cell, edge midpoints two.
  EXPECT_NEAR(r[g.node(2, 0)], 0.25, 1e-15);
  EXPECT_NEAR(r[g.node(2, 1)], 0.5, 1e-15);
}

TEST(DivergenceResidual, TotalEqualsMinusIntegralOfRho) {
  const Grid g = fh::testing::unit_square(9);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  std::vector<Vec2> flux(static_cast<std::size_t>(g.cell_count()));
  for (Vec2& f : flux) f = {gauss(rng), gauss(rng)};
  const auto rho = ScalarField::sample(g, [](Vec2 x) { return 1.0 + x.x * x.y; });
  const auto r = fh::divergence_residual(VectorField(g, flux), rho);
  double sum = 0.0;
  for (double v : r.values()) sum += v;
  EXPECT_NEAR(sum, -fh::integrate(rho), 1e-13);
}

TEST(DivergenceResidual, SummationByParts) {
  const Grid g = fh::testing::unit_square(11);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> gauss;
  std::vector<Vec2> flux(static_cast<std::size_t>(g.cell_count()));
  for (Vec2& f : flux) f = {gauss(rng), gauss(rng)};
  std::vector<double> eta(static_cast<std::size_t>(g.node_count())), rho(eta.size());
  for (double& v : eta) v = gauss(rng);
  for (double& v : rho) v = gauss(rng);
  const VectorField tf(g, flux);
  const ScalarField rf(g, rho);
  const auto r = fh::divergence_residual(tf, rf);
  double lhs = 0.0;
  double rhs = 0.0;
  for (int n = 0; n < g.node_count(); ++n) {
    lhs += eta[static_cast<std::size_t>(n)] * r[n];
    rhs -= eta[static_cast<std::size_t>(n)] * rho[static_cast<std::size_t>(n)] * g.node_mass(n);
  }
  for (int c = 0; c < g.cell_count(); ++c) rhs += fh::dot(tf[c], fh::cell_gradient_at(g, eta, c)) * g.h() * g.h();
  EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(rhs)));
}

TEST(Integrate, Examples) {
  const Grid g = fh::testing::unit_square(17);
  EXPECT_NEAR(fh::integrate(ScalarField::constant(g, 1.0)), 1.0, 1e-14);
  EXPECT_NEAR(fh::integrate(ScalarField::sample(g, [](Vec2 x) { return x.x; })), 0.5, 1e-14);
  const Grid fine = fh::testing::unit_square(129);
  const auto pyramid = ScalarField::sample(fine, [](Vec2 x) { return std::min({x.x, x.y, 1.0 - x.x, 1.0 - x.y}); });
  EXPECT_NEAR(fh::integrate(pyramid), 1.0 / 6.0, 2e-3);
}

TEST(Fields, RejectMismatchedData) {
  const Grid g = fh::testing::unit_square(5);
  EXPECT_THROW(ScalarField(g, std::vector<double>(3)), fh::GridMismatch);
  EXPECT_THROW(VectorField(g, std::vector<Vec2>(25)), fh::GridMismatch);
  EXPECT_THROW(fh::BoundaryMeasure(g, std::vector<double>(5)), fh::GridMismatch);
  EXPECT_THROW(fh::sup_distance(ScalarField::constant(g, 0), ScalarField::constant(fh::testing::unit_square(7), 0)),
               fh::GridMismatch);
}
