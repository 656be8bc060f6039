#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "finsler_hj/io.hpp"
#include "support.hpp"

namespace fh = finsler_hj;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "finsler_hj_io_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(Csv, ScalarRoundTripIsExact) {
  const fh::Grid g(7, 5, 0.1 / 3.0, {0.25, -1.0});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  std::vector<double> v(static_cast<std::size_t>(g.node_count()));
  for (double& x : v) x = gauss(rng) * 1e-7;
  const fh::ScalarField f(g, v, "length");
  const auto path = scratch("scalar.csv");
  fh::io::write_csv(path, f);
  const auto back = fh::io::read_scalar_field(path);
  EXPECT_TRUE(back.grid().same_as(g));
  for (int n = 0; n < g.node_count(); ++n) EXPECT_EQ(back[n], f[n]);
}

TEST(Csv, VectorAndBoundaryRoundTrip) {
  const fh::Grid g = fh::testing::unit_square(6);
  std::vector<fh::Vec2> flux;
  for (int c = 0; c < g.cell_count(); ++c) flux.push_back({0.1 * c, -1.0 / (c + 1)});
  const auto vp = scratch("vector.csv");
  fh::io::write_csv(vp, fh::VectorField(g, flux));
  const auto vb = fh::io::read_vector_field(vp);
  for (int c = 0; c < g.cell_count(); ++c) EXPECT_EQ(vb[c], flux[static_cast<std::size_t>(c)]);

  std::vector<double> w;
  for (std::size_t k = 0; k < g.boundary_nodes().size(); ++k) w.push_back(std::sin(static_cast<double>(k)));
  const auto bp = scratch("theta.csv");
  fh::io::write_csv(bp, fh::BoundaryMeasure(g, w));
  const auto bb = fh::io::read_boundary_measure(bp);
  for (std::size_t k = 0; k < w.size(); ++k) EXPECT_EQ(bb[k], w[k]);
}

TEST(Csv, Errors) {
  EXPECT_THROW(fh::io::read_scalar_field(scratch("does_not_exist.csv")), fh::MissingArtifact);
  const auto bad = scratch("bad.csv");
  write_text(bad, "nx,ny,h,ox,oy\n3,3,0.5,0,0\nvalue\n1\n2\nabc\n4\n5\n6\n7\n8\n9\n");
  try {
    fh::io::read_scalar_field(bad);
    FAIL() << "expected a parse error";
  } catch (const fh::ParseError& e) {
    EXPECT_EQ(e.line(), 6u);
  }
  const auto short_file = scratch("short.csv");
  write_text(short_file, "nx,ny,h,ox,oy\n3,3,0.5,0,0\nvalue\n1\n2\n");
  EXPECT_THROW(fh::io::read_scalar_field(short_file), fh::GridMismatch);
  const auto header = scratch("header.csv");
  write_text(header, "n,h\n3,0.5\n");
  EXPECT_THROW(fh::io::read_scalar_field(header), fh::ParseError);
}

TEST(Csv, DistanceSidecar) {
  const fh::Grid g = fh::testing::unit_square(5);
  const std::vector<int> src{0, 4};
  const auto d = fh::finsler_dijkstra(fh::FinslerMetric::weighted_euclidean(1.0), g, src);
  const auto path = scratch("dist.csv");
  fh::io::write_distance_field(path, d);
  std::ifstream in(scratch("dist.json"));
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("sources"), nlohmann::json({0, 4}));
  EXPECT_EQ(j.at("stencil"), 16);
  EXPECT_EQ(j.at("direction"), "from_source");
}
