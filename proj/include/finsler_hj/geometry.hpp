#pragma once

// Uniform rectangular grid, nodal/cell fields and the discrete
// gradient/divergence pair.
//
// Unknowns live on nodes, gradients on cells. The cell gradient is the
// average of the two forward differences along the cell's edges, and the
// divergence residual is its exact transpose weighted by the cell area h^2.
// This makes summation by parts hold to rounding:
//
//   sum_i eta_i r_i = sum_c Theta_c . grad(eta)_c h^2 - sum_i eta_i rho_i m_i
//
// with m_i the trapezoidal nodal mass.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finsler_hj/error.hpp"
#include "finsler_hj/vec2.hpp"

namespace finsler_hj {

class Grid {
 public:
  Grid() = default;

  Grid(int nx, int ny, double h, Vec2 origin = {}) : nx_(nx), ny_(ny), h_(h), origin_(origin) {
    if (nx < 3 || ny < 3) throw ValidationError("grid: nx, ny >= 3 required");
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("grid: h > 0 required");
    build_topology();
  }

  // Grid covering [ox, ox+lx] x [oy, oy+ly] with nx nodes along x. ny follows
  // from the aspect ratio and must come out integral.
  static Grid covering(double lx, double ly, int nx, Vec2 origin = {}) {
    if (nx < 3) throw ValidationError("grid: nx >= 3 required");
    const double h = lx / (nx - 1);
    const double cells_y = ly / h;
    const long ny_cells = std::lround(cells_y);
    if (std::abs(cells_y - static_cast<double>(ny_cells)) > 1e-9 * std::max(1.0, cells_y)) {
      throw ValidationError("grid: ly is not a multiple of the spacing implied by lx and nx");
    }
    return Grid(nx, static_cast<int>(ny_cells) + 1, h, origin);
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  Vec2 origin() const { return origin_; }
  double lx() const { return (nx_ - 1) * h_; }
  double ly() const { return (ny_ - 1) * h_; }
  double area() const { return lx() * ly(); }
  double diameter() const { return std::hypot(lx(), ly()); }

  int node_count() const { return nx_ * ny_; }
  int cell_count() const { return (nx_ - 1) * (ny_ - 1); }
  int node(int i, int j) const { return j * nx_ + i; }
  int cell(int i, int j) const { return j * (nx_ - 1) + i; }
  std::pair<int, int> node_ij(int n) const { return {n % nx_, n / nx_}; }
  std::pair<int, int> cell_ij(int c) const { return {c % (nx_ - 1), c / (nx_ - 1)}; }

  Vec2 node_position(int n) const {
    const auto [i, j] = node_ij(n);
    return {origin_.x + i * h_, origin_.y + j * h_};
  }
  Vec2 cell_center(int c) const {
    const auto [i, j] = cell_ij(c);
    return {origin_.x + (i + 0.5) * h_, origin_.y + (j + 0.5) * h_};
  }
  // Corner nodes of a cell in the order (i,j), (i+1,j), (i,j+1), (i+1,j+1).
  std::array<int, 4> cell_nodes(int c) const {
    const auto [i, j] = cell_ij(c);
    const int n = node(i, j);
    return {n, n + 1, n + nx_, n + nx_ + 1};
  }

  bool is_boundary(int n) const {
    const auto [i, j] = node_ij(n);
    return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
  }

  // Counterclockwise from the origin corner: bottom, right, top, left edges.
  std::span<const int> boundary_nodes() const { return *boundary_; }
  std::span<const int> interior_nodes() const { return *interior_; }
  // Position of node n in boundary_nodes(), or -1.
  int boundary_slot(int n) const { return (*slot_)[static_cast<std::size_t>(n)]; }

  // Trapezoidal mass: h^2 times 1, 1/2 or 1/4 for interior, edge, corner.
  double node_mass(int n) const {
    const auto [i, j] = node_ij(n);
    const double wx = (i == 0 || i == nx_ - 1) ? 0.5 : 1.0;
    const double wy = (j == 0 || j == ny_ - 1) ? 0.5 : 1.0;
    return wx * wy * h_ * h_;
  }

  // Bilinear interpolation stencil at x (clamped into the domain).
  struct Bilinear {
    std::array<int, 4> nodes;
    std::array<double, 4> weights;
  };
  Bilinear bilinear(Vec2 x) const {
    const double sx = std::clamp((x.x - origin_.x) / h_, 0.0, static_cast<double>(nx_ - 1));
    const double sy = std::clamp((x.y - origin_.y) / h_, 0.0, static_cast<double>(ny_ - 1));
    const int i = std::min(static_cast<int>(sx), nx_ - 2);
    const int j = std::min(static_cast<int>(sy), ny_ - 2);
    const double fx = sx - i;
    const double fy = sy - j;
    const int n = node(i, j);
    return {{n, n + 1, n + nx_, n + nx_ + 1},
            {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy}};
  }

  bool same_as(const Grid& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && h_ == o.h_ && origin_ == o.origin_;
  }

 private:
  void build_topology() {
    auto boundary = std::make_shared<std::vector<int>>();
    auto interior = std::make_shared<std::vector<int>>();
    auto slot = std::make_shared<std::vector<int>>(static_cast<std::size_t>(node_count()), -1);
    for (int i = 0; i < nx_; ++i) boundary->push_back(node(i, 0));
    for (int j = 1; j < ny_; ++j) boundary->push_back(node(nx_ - 1, j));
    for (int i = nx_ - 2; i >= 0; --i) boundary->push_back(node(i, ny_ - 1));
    for (int j = ny_ - 2; j >= 1; --j) boundary->push_back(node(0, j));
    for (std::size_t k = 0; k < boundary->size(); ++k) (*slot)[static_cast<std::size_t>((*boundary)[k])] = static_cast<int>(k);
    for (int n = 0; n < node_count(); ++n) {
      if (!is_boundary(n)) interior->push_back(n);
    }
    boundary_ = std::move(boundary);
    interior_ = std::move(interior);
    slot_ = std::move(slot);
  }

  int nx_ = 0;
  int ny_ = 0;
  double h_ = 0.0;
  Vec2 origin_{};
  std::shared_ptr<const std::vector<int>> boundary_ = std::make_shared<std::vector<int>>();
  std::shared_ptr<const std::vector<int>> interior_ = std::make_shared<std::vector<int>>();
  std::shared_ptr<const std::vector<int>> slot_ = std::make_shared<std::vector<int>>();
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!a.same_as(b)) throw GridMismatch(std::string(where) + ": fields live on different grids");
}

// Node-valued scalar.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(Grid grid, std::vector<double> values, std::string units = {})
      : grid_(std::move(grid)), values_(std::move(values)), units_(std::move(units)) {
    if (values_.size() != static_cast<std::size_t>(grid_.node_count())) {
      throw GridMismatch("scalar field: value count does not match node count");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw ValidationError("scalar field: non-finite value");
    }
  }
  static ScalarField constant(const Grid& grid, double c, std::string units = {}) {
    return {grid, std::vector<double>(static_cast<std::size_t>(grid.node_count()), c), std::move(units)};
  }
  template <class Fn>
  static ScalarField sample(const Grid& grid, Fn&& fn, std::string units = {}) {
    std::vector<double> v(static_cast<std::size_t>(grid.node_count()));
    for (int n = 0; n < grid.node_count(); ++n) v[static_cast<std::size_t>(n)] = fn(grid.node_position(n));
    return {grid, std::move(v), std::move(units)};
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  const std::string& units() const { return units_; }
  double operator[](int n) const { return values_[static_cast<std::size_t>(n)]; }
  double at(Vec2 x) const {
    const auto b = grid_.bilinear(x);
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += b.weights[k] * (*this)[b.nodes[k]];
    return s;
  }

 private:
  Grid grid_;
  std::vector<double> values_;
  std::string units_;
};

// Cell-valued 2-vector, located at cell centers.
class VectorField {
 public:
  VectorField() = default;
  VectorField(Grid grid, std::vector<Vec2> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(grid_.cell_count())) {
      throw GridMismatch("vector field: value count does not match cell count");
    }
    for (const Vec2& v : values_) {
      if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw ValidationError("vector field: non-finite value");
    }
  }
  static VectorField constant(const Grid& grid, Vec2 c) {
    return {grid, std::vector<Vec2>(static_cast<std::size_t>(grid.cell_count()), c)};
  }

  const Grid& grid() const { return grid_; }
  std::span<const Vec2> values() const { return values_; }
  const Vec2& operator[](int c) const { return values_[static_cast<std::size_t>(c)]; }

 private:
  Grid grid_;
  std::vector<Vec2> values_;
};

// Signed weights on boundary nodes, aligned with Grid::boundary_nodes().
class BoundaryMeasure {
 public:
  BoundaryMeasure() = default;
  BoundaryMeasure(Grid grid, std::vector<double> weights) : grid_(std::move(grid)), weights_(std::move(weights)) {
    if (weights_.size() != grid_.boundary_nodes().size()) {
      throw GridMismatch("boundary measure: weight count does not match boundary node count");
    }
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t k) const { return weights_[k]; }
  std::size_t size() const { return weights_.size(); }

  double total() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }
  double positive_mass() const {
    double s = 0.0;
    for (double w : weights_) s += std::max(w, 0.0);
    return s;
  }
  double negative_mass() const {
    double s = 0.0;
    for (double w : weights_) s += std::max(-w, 0.0);
    return s;
  }

 private:
  Grid grid_;
  std::vector<double> weights_;
};

namespace detail {

// Sign of d(grad)/d(u_corner) per component, corners ordered as cell_nodes().
inline constexpr std::array<double, 4> kGradSignX{-1.0, 1.0, -1.0, 1.0};
inline constexpr std::array<double, 4> kGradSignY{-1.0, -1.0, 1.0, 1.0};

}  // namespace detail

inline Vec2 cell_gradient_at(const Grid& grid, std::span<const double> u, int c) {
  const auto nodes = grid.cell_nodes(c);
  const double s = 0.5 / grid.h();
  Vec2 g{};
  for (int k = 0; k < 4; ++k) {
    const double v = u[static_cast<std::size_t>(nodes[k])];
    g.x += detail::kGradSignX[k] * v;
    g.y += detail::kGradSignY[k] * v;
  }
  return g * s;
}

inline void cell_gradient(const Grid& grid, std::span<const double> u, std::span<Vec2> out) {
  for (int c = 0; c < grid.cell_count(); ++c) out[static_cast<std::size_t>(c)] = cell_gradient_at(grid, u, c);
}

inline VectorField cell_gradient(const ScalarField& u) {
  std::vector<Vec2> g(static_cast<std::size_t>(u.grid().cell_count()));
  cell_gradient(u.grid(), u.values(), g);
  return {u.grid(), std::move(g)};
}

// out_i += sum_c Theta_c . d(grad_c)/d(u_i) * h^2
inline void add_gradient_transpose(const Grid& grid, std::span<const Vec2> flux, std::span<double> out) {
  const double s = 0.5 * grid.h();
  for (int c = 0; c < grid.cell_count(); ++c) {
    const Vec2 f = flux[static_cast<std::size_t>(c)];
    const auto nodes = grid.cell_nodes(c);
    for (int k = 0; k < 4; ++k) {
      out[static_cast<std::size_t>(nodes[k])] += s * (detail::kGradSignX[k] * f.x + detail::kGradSignY[k] * f.y);
    }
  }
}

// r_i = sum_c Theta_c . grad(hat_i)_c h^2 - rho_i m_i. Interior entries vanish
// at a discrete solution; boundary entries are the discrete normal trace.
inline ScalarField divergence_residual(const VectorField& flux, const ScalarField& rho) {
  require_same_grid(flux.grid(), rho.grid(), "divergence_residual");
  const Grid& grid = rho.grid();
  std::vector<double> r(static_cast<std::size_t>(grid.node_count()), 0.0);
  add_gradient_transpose(grid, flux.values(), r);
  for (int n = 0; n < grid.node_count(); ++n) r[static_cast<std::size_t>(n)] -= rho[n] * grid.node_mass(n);
  return {grid, std::move(r)};
}

inline BoundaryMeasure boundary_part(const ScalarField& nodal) {
  const Grid& grid = nodal.grid();
  std::vector<double> w;
  w.reserve(grid.boundary_nodes().size());
  for (int n : grid.boundary_nodes()) w.push_back(nodal[n]);
  return {grid, std::move(w)};
}

inline double integrate(const ScalarField& f) {
  const Grid& grid = f.grid();
  double s = 0.0;
  for (int n = 0; n < grid.node_count(); ++n) s += f[n] * grid.node_mass(n);
  return s;
}

inline double sup_distance(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "sup_distance");
  double d = 0.0;
  for (int n = 0; n < a.grid().node_count(); ++n) d = std::max(d, std::abs(a[n] - b[n]));
  return d;
}

}  // namespace finsler_hj
