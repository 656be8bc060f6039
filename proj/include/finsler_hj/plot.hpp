#pragma once

// Static raster previews (binary PPM). Nodes or cells map to square pixel
// blocks; y grows upward in the image.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "finsler_hj/error.hpp"
#include "finsler_hj/geometry.hpp"

namespace finsler_hj::plot {

using Rgb = std::array<std::uint8_t, 3>;

// Piecewise-linear approximation of a perceptually ordered map (dark blue -> yellow).
inline Rgb sequential(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{{0.267, 0.005, 0.329},
                                                               {0.229, 0.322, 0.546},
                                                               {0.128, 0.567, 0.551},
                                                               {0.369, 0.789, 0.383},
                                                               {0.993, 0.906, 0.144}}};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0) * 4.0;
  const int k = std::min(3, static_cast<int>(t));
  const double f = t - k;
  Rgb c{};
  for (int i = 0; i < 3; ++i) {
    const double v = stops[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] * (1 - f) +
                     stops[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(i)] * f;
    c[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  return c;
}

// Blue for negative, white at zero, red for positive; t in [-1, 1].
inline Rgb diverging(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.0, -1.0, 1.0);
  const auto mix = [](double a, double b, double f) { return static_cast<std::uint8_t>(std::lround(255.0 * (a + (b - a) * f))); };
  if (t >= 0) return {mix(1, 0.70, t), mix(1, 0.09, t), mix(1, 0.17, t)};
  return {mix(1, 0.13, -t), mix(1, 0.40, -t), mix(1, 0.67, -t)};
}

class Image {
 public:
  Image(int width, int height, Rgb fill = {255, 255, 255})
      : w_(width), h_(height), px_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}
  void set(int x, int y, Rgb c) {
    if (x >= 0 && x < w_ && y >= 0 && y < h_) px_[static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x)] = c;
  }
  void fill_block(int bx, int by, int scale, Rgb c) {
    for (int y = 0; y < scale; ++y) {
      for (int x = 0; x < scale; ++x) set(bx * scale + x, by * scale + y, c);
    }
  }
  void write_ppm(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "P6\n" << w_ << " " << h_ << "\n255\n";
    for (const Rgb& c : px_) out.write(reinterpret_cast<const char*>(c.data()), 3);
  }

 private:
  int w_;
  int h_;
  std::vector<Rgb> px_;
};

inline int block_scale(int n) { return std::max(1, 512 / std::max(1, n)); }

inline void scalar_field(const ScalarField& f, const std::filesystem::path& path) {
  const Grid& g = f.grid();
  const auto [lo, hi] = std::minmax_element(f.values().begin(), f.values().end());
  const double span = *hi - *lo > 0 ? *hi - *lo : 1.0;
  const int s = block_scale(std::max(g.nx(), g.ny()));
  Image img(g.nx() * s, g.ny() * s);
  for (int n = 0; n < g.node_count(); ++n) {
    const auto [i, j] = g.node_ij(n);
    img.fill_block(i, g.ny() - 1 - j, s, sequential((f[n] - *lo) / span));
  }
  img.write_ppm(path);
}

// |Theta| per cell.
inline void flux_magnitude(const VectorField& f, const std::filesystem::path& path) {
  const Grid& g = f.grid();
  double hi = 0.0;
  for (const Vec2& v : f.values()) hi = std::max(hi, norm(v));
  if (hi <= 0.0) hi = 1.0;
  const int cx = g.nx() - 1;
  const int cy = g.ny() - 1;
  const int s = block_scale(std::max(cx, cy));
  Image img(cx * s, cy * s);
  for (int c = 0; c < g.cell_count(); ++c) {
    const auto [i, j] = g.cell_ij(c);
    img.fill_block(i, cy - 1 - j, s, sequential(norm(f[c]) / hi));
  }
  img.write_ppm(path);
}

// Boundary weights drawn on the boundary ring, interior left grey.
inline void boundary_measure(const BoundaryMeasure& m, const std::filesystem::path& path) {
  const Grid& g = m.grid();
  double hi = 0.0;
  for (double w : m.weights()) hi = std::max(hi, std::abs(w));
  if (hi <= 0.0) hi = 1.0;
  const int s = block_scale(std::max(g.nx(), g.ny()));
  Image img(g.nx() * s, g.ny() * s, {200, 200, 200});
  const auto nodes = g.boundary_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto [i, j] = g.node_ij(nodes[k]);
    img.fill_block(i, g.ny() - 1 - j, s, diverging(m[k] / hi));
  }
  img.write_ppm(path);
}

}  // namespace finsler_hj::plot
