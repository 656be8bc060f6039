#include <gtest/gtest.h>

#include <filesystem>

#include "finsler_hj/io.hpp"
#include "finsler_hj/problem.hpp"
#include "support.hpp"

namespace fh = finsler_hj;
namespace fs = std::filesystem;

namespace {

fh::LoadedProblem parse(const std::string& text, const fh::LoadOverrides& ov = {}) {
  return fh::parse_problem(text, fs::temp_directory_path(), ov);
}

const char* kMinimal = R"({
  "grid": {"nx": 65},
  "metric": {"family": "weighted_euclidean", "k": 1.0},
  "rho": 1.0,
  "phi": 0.0,
  "psi": 0.0
})";

}  // namespace

TEST(Problem, MinimalEikonal) {
  const auto p = parse(kMinimal);
  EXPECT_EQ(p.spec.grid.nx(), 65);
  EXPECT_EQ(p.spec.grid.ny(), 65);
  EXPECT_DOUBLE_EQ(p.spec.grid.h(), 1.0 / 64.0);
  EXPECT_EQ(p.spec.p_ladder, (std::vector<double>{2, 4, 8, 16, 32, 64}));
  EXPECT_EQ(p.spec.metric.family(), fh::MetricFamily::WeightedEuclidean);
  EXPECT_EQ(p.admissibility.compatibility.status, fh::CompatibilityStatus::NonStrict);
}

TEST(Problem, ShippedConfigsLoad) {
  for (const char* name : {"eikonal", "obstacle", "weighted", "shifted", "hexagon"}) {
    EXPECT_NO_THROW(fh::load_problem(fh::testing::config_dir() / (std::string(name) + ".json"))) << name;
  }
}

TEST(Problem, PhiAbovePsiRejected) {
  try {
    fh::load_problem(fh::testing::config_dir() / "phi_gt_psi.json");
    FAIL() << "expected a validation error";
  } catch (const fh::IncompatibleSpec&) {
    FAIL() << "wrong error kind";
  } catch (const fh::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("phi<=psi"), std::string::npos);
  }
}

TEST(Problem, IncompatibleDataRejectedWithWitness) {
  try {
    fh::load_problem(fh::testing::config_dir() / "violated.json");
    FAIL() << "expected an incompatibility error";
  } catch (const fh::IncompatibleSpec& e) {
    EXPECT_NE(std::string(e.what()).find("compatibility Violated at boundary pair (0,0)"), std::string::npos);
  }
}

TEST(Problem, FieldForms) {
  const auto p = parse(R"({
    "grid": {"nx": 5, "lx": 2.0, "ly": 1.0},
    "metric": {"family": "riemannian", "A": [[2, 1], [1, 2]]},
    "rho": {"affine": [1, 2, 3]},
    "phi": {"constant": -1, "overrides": [[0, -2]]},
    "psi": 1,
    "p_ladder": [2, 8],
    "solver": {"tolerance": 1e-9, "stencil": 32, "optimizer": "projected_lbfgs"}
  })");
  EXPECT_EQ(p.spec.grid.ny(), 3);
  EXPECT_DOUBLE_EQ(p.spec.rho[p.spec.grid.node(4, 2)], 1 + 2 * 2.0 + 3 * 1.0);
  EXPECT_DOUBLE_EQ(p.spec.phi[0], -2.0);
  EXPECT_DOUBLE_EQ(p.spec.phi[1], -1.0);
  EXPECT_EQ(p.spec.options.stencil, fh::Stencil::ThirtyTwo);
  EXPECT_EQ(p.spec.options.optimizer, fh::OptimizerKind::ProjectedLbfgs);
  EXPECT_DOUBLE_EQ(p.spec.options.tolerance, 1e-9);
}

TEST(Problem, CsvField) {
  const fh::Grid g = fh::testing::unit_square(5);
  const auto dir = fs::temp_directory_path() / "finsler_hj_problem_test";
  fs::create_directories(dir);
  fh::io::write_csv(dir / "rho.csv", fh::ScalarField::sample(g, [](fh::Vec2 x) { return 1.0 + x.y; }));
  const auto p = fh::parse_problem(R"({"grid": {"nx": 5}, "metric": {"family": "weighted_euclidean"},
    "rho": {"csv": "rho.csv"}, "phi": 0, "psi": 0})", dir);
  EXPECT_DOUBLE_EQ(p.spec.rho[g.node(0, 4)], 2.0);
  fh::LoadOverrides ov;
  ov.grid = 9;
  EXPECT_THROW(fh::parse_problem(R"({"grid": {"nx": 5}, "metric": {"family": "weighted_euclidean"},
    "rho": {"csv": "rho.csv"}, "phi": 0, "psi": 0})", dir, ov), fh::ValidationError);
  EXPECT_THROW(fh::parse_problem(R"({"grid": {"nx": 9}, "metric": {"family": "weighted_euclidean"},
    "rho": {"csv": "rho.csv"}, "phi": 0, "psi": 0})", dir), fh::GridMismatch);
}

TEST(Problem, OverridesTruncateLadderAndRegrid) {
  fh::LoadOverrides ov;
  ov.grid = 17;
  ov.p_max = 8;
  const auto p = parse(kMinimal, ov);
  EXPECT_EQ(p.spec.grid.nx(), 17);
  EXPECT_EQ(p.spec.p_ladder, (std::vector<double>{2, 4, 8}));
}

TEST(Problem, ParseErrorsCarryLines) {
  try {
    parse("{\n  \"grid\": {\"nx\": 5},\n  \"metric\": {\"family\": \"weighted_euclidean\"},\n  \"rho\": 1,\n  \"phi\": 0,\n  \"psi\": 0,\n  \"bogus\": 1\n}");
    FAIL();
  } catch (const fh::ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_EQ(e.field(), "bogus");
  }
  try {
    parse("{\n  \"grid\": {\"nx\": 5},\n  \"metric\": {\"family\": \"weighted_euclidean\"},\n  \"rho\": ,\n}");
    FAIL();
  } catch (const fh::ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW(parse(R"({"grid": {"nx": 5}, "metric": {"family": "cubic"}, "rho": 1, "phi": 0, "psi": 0})"), fh::ParseError);
  EXPECT_THROW(parse(R"({"grid": {"nx": 5}, "metric": {"family": "weighted_euclidean"}, "phi": 0, "psi": 0})"), fh::ParseError);
  EXPECT_THROW(parse(R"({"grid": {"nx": 5}, "metric": {"family": "shifted", "b": [1.5, 0]}, "rho": 1, "phi": 0, "psi": 0})"),
               fh::InvalidMetric);
  EXPECT_THROW(parse(R"({"grid": {"nx": 5}, "metric": {"family": "weighted_euclidean"}, "rho": 1, "phi": 0, "psi": 0,
                         "solver": {"speed": 3}})"),
               fh::ParseError);
}
