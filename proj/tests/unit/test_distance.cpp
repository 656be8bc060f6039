#include <gtest/gtest.h>

#include "finsler_hj/distance.hpp"
#include "support.hpp"

namespace fh = finsler_hj;
using fh::FinslerMetric;
using fh::ScalarField;

namespace {

double point_distance(const FinslerMetric& m, const fh::Grid& g, int from, int to) {
  const std::vector<int> src{from};
  return fh::finsler_dijkstra(m, g, src).values[to];
}

}  // namespace

TEST(Dijkstra, AxisGeodesics) {
  const fh::Grid g = fh::testing::unit_square(33);
  const int o = g.node(0, 0);
  EXPECT_NEAR(point_distance(FinslerMetric::weighted_euclidean(1.0), g, o, g.node(32, 0)), 1.0, 1e-12);
  EXPECT_NEAR(point_distance(FinslerMetric::riemannian(fh::Mat2::diagonal(1, 4)), g, o, g.node(0, 32)), 2.0, 0.01);
}

TEST(Dijkstra, ShiftedMetricIsAsymmetric) {
  const fh::Grid g = fh::testing::unit_square(33);
  const auto m = FinslerMetric::shifted(fh::Vec2{0.5, 0.0});
  const int a = g.node(0, 0);
  const int b = g.node(32, 0);
  EXPECT_NEAR(point_distance(m, g, a, b), 1.5, 0.015);
  EXPECT_NEAR(point_distance(m, g, b, a), 0.5, 0.005);
  // ToSource measures d(x, source).
  const std::vector<int> src{a};
  EXPECT_NEAR(fh::finsler_dijkstra(m, g, src, fh::Direction::ToSource).values[b], 0.5, 0.005);
}

TEST(Dijkstra, DiagonalWithinStencilBound) {
  const fh::Grid g = fh::testing::unit_square(33);
  const double d = point_distance(FinslerMetric::weighted_euclidean(1.0), g, g.node(0, 0), g.node(32, 32));
  EXPECT_GE(d, std::sqrt(2.0) - 1e-12);
  EXPECT_LE(d, std::sqrt(2.0) * (1.0 + fh::stencil_consistency_bound(fh::Stencil::Sixteen)));
  // A generic direction is not on any stencil edge.
  const double e = point_distance(FinslerMetric::weighted_euclidean(1.0), g, g.node(0, 0), g.node(32, 7));
  const double exact = std::hypot(1.0, 7.0 / 32.0);
  EXPECT_LE(e, exact * (1.0 + fh::stencil_consistency_bound(fh::Stencil::Sixteen)));
  const double e32 = fh::finsler_dijkstra(FinslerMetric::weighted_euclidean(1.0), g, std::vector<int>{0},
                                          fh::Direction::FromSource, fh::Stencil::ThirtyTwo)
                         .values[g.node(32, 7)];
  EXPECT_LE(e32, e + 1e-12);
}

TEST(Dijkstra, EmptySourceRejected) {
  const fh::Grid g = fh::testing::unit_square(5);
  EXPECT_THROW(fh::finsler_dijkstra(FinslerMetric::weighted_euclidean(1.0), g, std::vector<int>{}), fh::EmptySource);
}

TEST(Compatibility, Statuses) {
  const fh::Grid g = fh::testing::unit_square(17);
  const auto m = FinslerMetric::weighted_euclidean(1.0);
  const auto zero = ScalarField::constant(g, 0.0);
  const auto strict = fh::check_compatibility(m, g, ScalarField::constant(g, -1.0), zero);
  EXPECT_EQ(strict.status, fh::CompatibilityStatus::Strict);
  EXPECT_GE(strict.margin, 1.0);
  EXPECT_EQ(fh::check_compatibility(m, g, zero, zero).status, fh::CompatibilityStatus::NonStrict);
  std::vector<double> spike(static_cast<std::size_t>(g.node_count()), 0.0);
  spike[0] = 2.0;
  const auto bad = fh::check_compatibility(m, g, ScalarField(g, spike), zero);
  EXPECT_EQ(bad.status, fh::CompatibilityStatus::Violated);
  EXPECT_EQ(bad.x_node, 0);
  EXPECT_EQ(bad.y_node, 0);
  EXPECT_NEAR(bad.margin, -2.0, 1e-12);
}

TEST(MaximalSubsolution, Examples) {
  const fh::Grid g = fh::testing::unit_square(33);
  const auto m = FinslerMetric::weighted_euclidean(1.0);
  const int center = g.node(16, 16);
  const auto zero = ScalarField::constant(g, 0.0);
  EXPECT_NEAR(fh::maximal_subsolution_oracle(m, g, zero, zero)[center], 0.5, 1e-12);
  EXPECT_NEAR(fh::maximal_subsolution_oracle(m, g, zero, ScalarField::constant(g, 10.0))[center], 10.5, 1e-12);
  const auto gx = ScalarField::sample(g, [](fh::Vec2 x) { return x.x; });
  EXPECT_NEAR(fh::maximal_subsolution_oracle(m, g, gx, gx)[center], 0.5, 1e-12);
}

TEST(MaximalSubsolution, RejectsIncompatibleData) {
  const fh::Grid g = fh::testing::unit_square(9);
  std::vector<double> spike(static_cast<std::size_t>(g.node_count()), 0.0);
  spike[0] = 2.0;
  EXPECT_THROW(fh::maximal_subsolution_oracle(FinslerMetric::weighted_euclidean(1.0), g, ScalarField(g, spike),
                                              ScalarField::constant(g, 0.0)),
               fh::IncompatibleData);
}

TEST(LowerEnvelope, Examples) {
  const fh::Grid g = fh::testing::unit_square(33);
  const auto m = FinslerMetric::weighted_euclidean(1.0);
  const int center = g.node(16, 16);
  const auto zero = ScalarField::constant(g, 0.0);
  const auto w = fh::lower_envelope_w(m, g, zero);
  EXPECT_NEAR(w[center], -0.5, 1e-12);
  EXPECT_NEAR(fh::lower_envelope_w(m, g, ScalarField::constant(g, 3.0))[center], 2.5, 1e-12);
  const auto v = fh::maximal_subsolution_oracle(m, g, zero, zero);
  for (int n = 0; n < g.node_count(); ++n) EXPECT_LE(w[n], v[n]);
}

TEST(Distance, PyramidIntegral) {
  const fh::Grid g = fh::testing::unit_square(65);
  const auto zero = ScalarField::constant(g, 0.0);
  const auto v = fh::maximal_subsolution_oracle(FinslerMetric::weighted_euclidean(1.0), g, zero, zero);
  EXPECT_NEAR(fh::kr_objective(v, ScalarField::constant(g, 1.0)).value, 1.0 / 6.0, 5e-3);
  const auto v10 = fh::maximal_subsolution_oracle(FinslerMetric::weighted_euclidean(1.0), g, zero, ScalarField::constant(g, 10.0));
  EXPECT_NEAR(fh::kr_objective(v10, ScalarField::constant(g, 1.0)).value, 10.0 + 1.0 / 6.0, 5e-3);
}
