#pragma once

// Intrinsic Finsler distance on the lattice graph of a Grid, the boundary
// compatibility test and the closed-form maximal-subsolution envelopes.
//
// Edges connect each node to the nodes at the stencil offsets; the edge
// i -> j costs H(midpoint, x_j - x_i). For asymmetric H the cost of j -> i
// differs, which is how d_H(y, x) != d_H(x, y) shows up on the graph.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "finsler_hj/error.hpp"
#include "finsler_hj/geometry.hpp"
#include "finsler_hj/metric.hpp"

namespace finsler_hj {

enum class Stencil { Eight = 8, Sixteen = 16, ThirtyTwo = 32 };

// FromSource computes d_H(source, x); ToSource computes d_H(x, source).
enum class Direction { FromSource, ToSource };

inline std::vector<std::pair<int, int>> stencil_offsets(Stencil stencil) {
  // Primitive lattice vectors (gcd = 1) in one octant, then mirrored.
  std::vector<std::pair<int, int>> octant{{1, 0}, {1, 1}};
  if (stencil != Stencil::Eight) octant.emplace_back(2, 1);
  if (stencil == Stencil::ThirtyTwo) {
    octant.emplace_back(3, 1);
    octant.emplace_back(3, 2);
  }
  std::vector<std::pair<int, int>> out;
  for (auto [a, b] : octant) {
    const std::pair<int, int> candidates[] = {{a, b}, {b, a}};
    for (auto [dx, dy] : candidates) {
      for (int sx : {1, -1}) {
        for (int sy : {1, -1}) {
          std::pair<int, int> o{sx * dx, sy * dy};
          if (std::find(out.begin(), out.end(), o) == out.end()) out.push_back(o);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Worst relative overestimate of Euclidean length by the stencil's graph
// metric: 1/cos(gap/2) - 1 for the widest angular gap between neighbours.
inline double stencil_consistency_bound(Stencil stencil) {
  std::vector<double> angles;
  for (auto [dx, dy] : stencil_offsets(stencil)) angles.push_back(std::atan2(dy, dx));
  std::sort(angles.begin(), angles.end());
  double gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t k = 1; k < angles.size(); ++k) gap = std::max(gap, angles[k] - angles[k - 1]);
  return 1.0 / std::cos(0.5 * gap) - 1.0;
}

inline const char* to_string(Stencil s) {
  switch (s) {
    case Stencil::Eight: return "8";
    case Stencil::Sixteen: return "16";
    case Stencil::ThirtyTwo: return "32";
  }
  return "?";
}

// Edge costs for one (metric, grid, stencil) triple; reusable across runs.
class LatticeGraph {
 public:
  LatticeGraph(const FinslerMetric& metric, const Grid& grid, Stencil stencil = Stencil::Sixteen)
      : grid_(grid), stencil_(stencil), offsets_(stencil_offsets(stencil)) {
    const std::size_t k = offsets_.size();
    opposite_.resize(k);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        if (offsets_[b].first == -offsets_[a].first && offsets_[b].second == -offsets_[a].second) opposite_[a] = b;
      }
    }
    cost_.assign(static_cast<std::size_t>(grid.node_count()) * k, std::numeric_limits<double>::infinity());
    const double h = grid.h();
    for (int n = 0; n < grid.node_count(); ++n) {
      const auto [i, j] = grid.node_ij(n);
      const Vec2 xi = grid.node_position(n);
      for (std::size_t e = 0; e < k; ++e) {
        const auto [dx, dy] = offsets_[e];
        if (i + dx < 0 || i + dx >= grid.nx() || j + dy < 0 || j + dy >= grid.ny()) continue;
        const Vec2 step{dx * h, dy * h};
        cost_[static_cast<std::size_t>(n) * k + e] = metric.primal(xi + 0.5 * step, step);
      }
    }
  }

  const Grid& grid() const { return grid_; }
  Stencil stencil() const { return stencil_; }

  struct Result {
    std::vector<double> distance;
    std::vector<int> origin;  // source node that attains the minimum
  };

  // Multi-source Dijkstra with initial offsets (zero when `offsets` is empty).
  // Ties in the queue resolve by node index, so results are deterministic.
  Result run(std::span<const int> sources, Direction direction, std::span<const double> offsets = {}) const {
    if (sources.empty()) throw EmptySource();
    const int count = grid_.node_count();
    const std::size_t k = offsets_.size();
    Result r{std::vector<double>(static_cast<std::size_t>(count), std::numeric_limits<double>::infinity()),
             std::vector<int>(static_cast<std::size_t>(count), -1)};
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const int n = sources[s];
      const double d0 = offsets.empty() ? 0.0 : offsets[s];
      auto& slot = r.distance[static_cast<std::size_t>(n)];
      if (d0 < slot || (d0 == slot && n < r.origin[static_cast<std::size_t>(n)])) {
        slot = d0;
        r.origin[static_cast<std::size_t>(n)] = n;
        queue.emplace(d0, n);
      }
    }
    std::vector<char> done(static_cast<std::size_t>(count), 0);
    while (!queue.empty()) {
      const auto [d, n] = queue.top();
      queue.pop();
      if (done[static_cast<std::size_t>(n)]) continue;
      done[static_cast<std::size_t>(n)] = 1;
      const auto [i, j] = grid_.node_ij(n);
      for (std::size_t e = 0; e < k; ++e) {
        const auto [dx, dy] = offsets_[e];
        const int ii = i + dx;
        const int jj = j + dy;
        if (ii < 0 || ii >= grid_.nx() || jj < 0 || jj >= grid_.ny()) continue;
        const int m = grid_.node(ii, jj);
        // FromSource walks n -> m; ToSource walks m -> n, i.e. the opposite
        // offset taken from m.
        const double w = direction == Direction::FromSource
                             ? cost_[static_cast<std::size_t>(n) * k + e]
                             : cost_[static_cast<std::size_t>(m) * k + opposite_[e]];
        const double nd = d + w;
        auto& slot = r.distance[static_cast<std::size_t>(m)];
        if (nd < slot) {
          slot = nd;
          r.origin[static_cast<std::size_t>(m)] = r.origin[static_cast<std::size_t>(n)];
          queue.emplace(nd, m);
        }
      }
    }
    return r;
  }

 private:
  Grid grid_;
  Stencil stencil_;
  std::vector<std::pair<int, int>> offsets_;
  std::vector<std::size_t> opposite_;
  std::vector<double> cost_;
};

struct DistanceField {
  std::vector<int> sources;
  ScalarField values;
  std::vector<int> origin;
  Stencil stencil = Stencil::Sixteen;
  Direction direction = Direction::FromSource;
};

inline DistanceField finsler_dijkstra(const FinslerMetric& metric, const Grid& grid, std::span<const int> sources,
                                      Direction direction = Direction::FromSource, Stencil stencil = Stencil::Sixteen) {
  if (sources.empty()) throw EmptySource();
  const LatticeGraph graph(metric, grid, stencil);
  auto r = graph.run(sources, direction);
  return {std::vector<int>(sources.begin(), sources.end()), ScalarField(grid, std::move(r.distance), "length"),
          std::move(r.origin), stencil, direction};
}

enum class CompatibilityStatus { Strict, NonStrict, Violated };

inline const char* to_string(CompatibilityStatus s) {
  switch (s) {
    case CompatibilityStatus::Strict: return "Strict";
    case CompatibilityStatus::NonStrict: return "NonStrict";
    case CompatibilityStatus::Violated: return "Violated";
  }
  return "?";
}

struct CompatibilityResult {
  CompatibilityStatus status = CompatibilityStatus::Strict;
  // min over boundary pairs (x, y) of d_H(y, x) - (phi(x) - psi(y))
  double margin = 0.0;
  double tolerance = 0.0;
  int x_node = -1;  // witness pair attaining the margin
  int y_node = -1;
};

// Tolerance separating a real violation from metrication error:
// 2 * (stencil bound) * diam(Omega) * b.
inline double compatibility_tolerance(const FinslerMetric& metric, const Grid& grid, Stencil stencil) {
  return 2.0 * stencil_consistency_bound(stencil) * grid.diameter() * metric.upper_bound();
}

namespace detail {

// v(x) = min_y psi(y) + d_H(y, x) over boundary nodes y, with the argmin.
inline LatticeGraph::Result boundary_envelope(const LatticeGraph& graph, std::span<const double> boundary_offsets) {
  const auto nodes = graph.grid().boundary_nodes();
  return graph.run(nodes, Direction::FromSource, boundary_offsets);
}

inline std::vector<double> boundary_values(const ScalarField& f) {
  std::vector<double> out;
  out.reserve(f.grid().boundary_nodes().size());
  for (int n : f.grid().boundary_nodes()) out.push_back(f[n]);
  return out;
}

}  // namespace detail

// The cross condition phi(x) - psi(y) <= d_H(y, x) on all boundary pairs.
// min_y [psi(y) + d_H(y, x)] is one multi-source run, so the minimum over all
// pairs is exact: margin = min_x v(x) - phi(x).
inline CompatibilityResult check_compatibility(const FinslerMetric& metric, const Grid& grid, const ScalarField& phi,
                                               const ScalarField& psi, Stencil stencil = Stencil::Sixteen) {
  require_same_grid(grid, phi.grid(), "check_compatibility");
  require_same_grid(grid, psi.grid(), "check_compatibility");
  const LatticeGraph graph(metric, grid, stencil);
  const auto env = detail::boundary_envelope(graph, detail::boundary_values(psi));
  CompatibilityResult r;
  r.tolerance = compatibility_tolerance(metric, grid, stencil);
  r.margin = std::numeric_limits<double>::infinity();
  for (int x : grid.boundary_nodes()) {
    const double m = env.distance[static_cast<std::size_t>(x)] - phi[x];
    if (m < r.margin) {
      r.margin = m;
      r.x_node = x;
      r.y_node = env.origin[static_cast<std::size_t>(x)];
    }
  }
  if (r.margin > r.tolerance) {
    r.status = CompatibilityStatus::Strict;
  } else if (r.margin >= -r.tolerance) {
    r.status = CompatibilityStatus::NonStrict;
  } else {
    r.status = CompatibilityStatus::Violated;
  }
  return r;
}

// v(x) = min_y { psi(y) + d_H(y, x) }: the largest 1-Lipschitz (w.r.t. d_H)
// function below psi on the boundary.
inline ScalarField maximal_subsolution_oracle(const FinslerMetric& metric, const Grid& grid, const ScalarField& phi,
                                              const ScalarField& psi, Stencil stencil = Stencil::Sixteen) {
  require_same_grid(grid, phi.grid(), "maximal_subsolution_oracle");
  require_same_grid(grid, psi.grid(), "maximal_subsolution_oracle");
  const LatticeGraph graph(metric, grid, stencil);
  auto env = detail::boundary_envelope(graph, detail::boundary_values(psi));
  const double tol = compatibility_tolerance(metric, grid, stencil);
  for (int x : grid.boundary_nodes()) {
    const double v = env.distance[static_cast<std::size_t>(x)];
    if (v < phi[x] - tol) {
      throw IncompatibleData("maximal_subsolution_oracle: phi <= v fails at boundary node " + std::to_string(x) +
                             " (source " + std::to_string(env.origin[static_cast<std::size_t>(x)]) + ")");
    }
  }
  return {grid, std::move(env.distance), psi.units()};
}

// w(x) = max_y { phi(y) - d_H(y, x) }
inline ScalarField lower_envelope_w(const FinslerMetric& metric, const Grid& grid, const ScalarField& phi,
                                    Stencil stencil = Stencil::Sixteen) {
  require_same_grid(grid, phi.grid(), "lower_envelope_w");
  const LatticeGraph graph(metric, grid, stencil);
  auto offsets = detail::boundary_values(phi);
  for (double& o : offsets) o = -o;
  auto env = detail::boundary_envelope(graph, offsets);
  for (double& d : env.distance) d = -d;
  return {grid, std::move(env.distance), phi.units()};
}

}  // namespace finsler_hj
