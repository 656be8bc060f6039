#pragma once

// Finsler metrics H(x, p), their duals H*(x, q) and the support functions of
// Hamiltonian sublevel sets.
//
// Four families are supported. WeightedEuclidean and Riemannian have closed
// form duals, and so does Shifted (H = |p| + b(x).p), which is the support
// function of the unit disk centred at b: its dual is the gauge of that disk.
// Polytope (H = support function of a convex polygon Z(x)) evaluates the dual
// numerically: the ratio <u, q> / H(x, u) is maximized over a fixed table of
// 4096 unit directions and the best direction is refined by a golden-section
// search in angle.
//
// Spatially varying parameters are node-sampled and blended bilinearly. For
// polygons the blend is applied to the support function, which is the support
// function of the matching Minkowski combination and so stays a valid metric.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "finsler_hj/error.hpp"
#include "finsler_hj/geometry.hpp"
#include "finsler_hj/vec2.hpp"

namespace finsler_hj {

// A metric parameter that is either constant or sampled on grid nodes.
template <class T>
class NodalParameter {
 public:
  NodalParameter(T constant) : values_{std::move(constant)} {}  // NOLINT(google-explicit-constructor)
  NodalParameter(Grid grid, std::vector<T> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(grid_->node_count())) {
      throw GridMismatch("metric parameter: sample count does not match node count");
    }
  }

  bool is_constant() const { return !grid_.has_value(); }
  const std::optional<Grid>& grid() const { return grid_; }
  std::span<const T> samples() const { return values_; }

  // sum_k w_k f(value_k) over the bilinear stencil at x.
  template <class Fn>
  auto blend(Vec2 x, Fn&& f) const {
    if (!grid_) return f(values_.front());
    const auto b = grid_->bilinear(x);
    auto acc = b.weights[0] * f(values_[static_cast<std::size_t>(b.nodes[0])]);
    for (int k = 1; k < 4; ++k) {
      if (b.weights[k] != 0.0) acc += b.weights[k] * f(values_[static_cast<std::size_t>(b.nodes[k])]);
    }
    return acc;
  }

  T at(Vec2 x) const
    requires(!std::is_same_v<T, std::vector<Vec2>>)
  {
    return blend(x, [](const T& v) { return v; });
  }

 private:
  std::optional<Grid> grid_;
  std::vector<T> values_;
};

using Polygon = std::vector<Vec2>;

// Counterclockwise convex hull (monotone chain); collinear points dropped.
inline Polygon convex_hull(const Polygon& vertices) {
  Polygon pts = vertices;
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); };
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Outward facets of conv(vertices) as (unit normal, offset) pairs, i.e.
// conv = { xi : <n, xi> <= offset for every facet }. Empty when degenerate.
inline std::vector<std::pair<Vec2, double>> polygon_facets(const Polygon& vertices) {
  const Polygon hull = convex_hull(vertices);
  if (hull.size() < 3) return {};
  std::vector<std::pair<Vec2, double>> facets;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 a = hull[i];
    const Vec2 b = hull[(i + 1) % hull.size()];
    Vec2 n{b.y - a.y, a.x - b.x};  // counterclockwise hull: outward normal
    n = n / norm(n);
    facets.emplace_back(n, dot(n, a));
  }
  return facets;
}

// Vertices of sum_k w_k P_k (w_k >= 0); its support function is
// sum_k w_k sigma_{P_k}.
inline Polygon minkowski_combination(std::span<const Polygon> polys, std::span<const double> weights) {
  Polygon acc{{0.0, 0.0}};
  for (std::size_t k = 0; k < polys.size(); ++k) {
    if (weights[k] == 0.0) continue;
    Polygon next;
    next.reserve(acc.size() * polys[k].size());
    for (const Vec2& a : acc) {
      for (const Vec2& v : polys[k]) next.push_back(a + v * weights[k]);
    }
    acc = convex_hull(next);
  }
  return acc;
}

inline double polygon_support(const Polygon& vertices, Vec2 q) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec2& v : vertices) best = std::max(best, dot(v, q));
  return best;
}

namespace detail {

inline constexpr int kDirectionCount = 4096;

inline const std::vector<Vec2>& unit_directions() {
  static const std::vector<Vec2> dirs = [] {
    std::vector<Vec2> d(kDirectionCount);
    for (int k = 0; k < kDirectionCount; ++k) {
      const double t = 2.0 * std::numbers::pi * k / kDirectionCount;
      d[static_cast<std::size_t>(k)] = {std::cos(t), std::sin(t)};
    }
    return d;
  }();
  return dirs;
}

struct RatioMax {
  double value = 0.0;
  Vec2 argmax{};  // maximizing point on the unit sphere of the primal
};

// sup_u <u, q> / primal(u) over unit directions u. On the half circle facing q
// the ratio traces a linear functional along the boundary of a convex body,
// so it is unimodal there: a discrete ternary search finds the same table
// entry as an exhaustive scan, and golden section refines it in angle.
template <class Primal>
RatioMax maximize_ratio(const Primal& primal, Vec2 q) {
  const auto& dirs = unit_directions();
  constexpr int n = kDirectionCount;
  const double angle = std::atan2(q.y, q.x);
  int center = static_cast<int>(std::lround(angle / (2.0 * std::numbers::pi) * n));
  center = ((center % n) + n) % n;
  auto ratio_at = [&](int m) {
    const Vec2 u = dirs[static_cast<std::size_t>(((center + m) % n + n) % n)];
    return dot(u, q) / primal(u);
  };
  int lo = -n / 4 + 1;
  int hi = n / 4 - 1;
  while (hi - lo > 2) {
    const int m1 = lo + (hi - lo) / 3;
    const int m2 = hi - (hi - lo) / 3;
    if (ratio_at(m1) < ratio_at(m2)) {
      lo = m1 + 1;
    } else {
      hi = m2 - 1 >= m1 ? m2 - 1 : m2;
    }
  }
  int best_m = lo;
  double best = ratio_at(lo);
  for (int m = lo + 1; m <= hi; ++m) {
    const double r = ratio_at(m);
    if (r > best) {
      best = r;
      best_m = m;
    }
  }

  // Golden section in angle on [theta - step, theta + step].
  const double step = 2.0 * std::numbers::pi / n;
  const double theta0 = 2.0 * std::numbers::pi * (center + best_m) / n;
  auto ratio_theta = [&](double t) {
    const Vec2 u{std::cos(t), std::sin(t)};
    return dot(u, q) / primal(u);
  };
  constexpr double inv_phi = 0.6180339887498949;
  double a = theta0 - step;
  double b = theta0 + step;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = ratio_theta(c);
  double fd = ratio_theta(d);
  while (b - a > 1e-13) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = ratio_theta(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = ratio_theta(c);
    }
  }
  double theta = 0.5 * (a + b);
  double refined = ratio_theta(theta);
  if (refined < best) {
    refined = best;
    theta = theta0;
  }
  const Vec2 u{std::cos(theta), std::sin(theta)};
  return {refined, u / primal(u)};
}

}  // namespace detail

enum class MetricFamily { WeightedEuclidean, Riemannian, Polytope, Shifted };

inline const char* to_string(MetricFamily f) {
  switch (f) {
    case MetricFamily::WeightedEuclidean: return "weighted_euclidean";
    case MetricFamily::Riemannian: return "riemannian";
    case MetricFamily::Polytope: return "polytope";
    case MetricFamily::Shifted: return "shifted";
  }
  return "?";
}

// Value, gradient and (optionally) Hessian of H*(x, .) at q.
struct DualDerivatives {
  double value = 0.0;
  Vec2 grad{};
  Mat2 hess{};
};

class FinslerMetric {
 public:
  // H(x, p) = k(x) |p|
  static FinslerMetric weighted_euclidean(NodalParameter<double> k) {
    for (double v : k.samples()) {
      if (!(v > 0.0) || !std::isfinite(v)) throw NonpositiveWeight("weighted_euclidean: k must be positive");
    }
    const auto [lo, hi] = std::minmax_element(k.samples().begin(), k.samples().end());
    return FinslerMetric(WeightedEuclidean{std::move(k)}, *lo, *hi);
  }

  // H(x, p) = sqrt(p^T A(x) p)
  static FinslerMetric riemannian(NodalParameter<Mat2> a) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const Mat2& m : a.samples()) {
      if (std::abs(m.xy - m.yx) > 1e-12 * (std::abs(m.xx) + std::abs(m.yy))) {
        throw InvalidMetric("riemannian: A must be symmetric");
      }
      const auto [e0, e1] = symmetric_eigenvalues(m);
      if (!(e0 > 0.0)) throw InvalidMetric("riemannian: A must be positive definite");
      lo = std::min(lo, e0);
      hi = std::max(hi, e1);
    }
    return FinslerMetric(Riemannian{std::move(a)}, std::sqrt(lo), std::sqrt(hi));
  }

  // H(x, p) = sup_{v in Z(x)} <v, p>, Z(x) the convex hull of the vertices.
  static FinslerMetric polytope(NodalParameter<Polygon> vertices) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const Polygon& poly : vertices.samples()) {
      const auto facets = polygon_facets(poly);
      if (facets.empty()) throw InvalidMetric("polytope: Z(x) needs at least three affinely independent vertices");
      for (const auto& [n, offset] : facets) {
        if (!(offset > 0.0)) throw InvalidMetric("polytope: 0 must lie strictly inside Z(x)");
        lo = std::min(lo, offset);
      }
      for (const Vec2& v : poly) hi = std::max(hi, norm(v));
    }
    return FinslerMetric(Polytope{std::move(vertices)}, lo, hi);
  }

  // H(x, p) = |p| + b(x).p with |b| < 1.
  static FinslerMetric shifted(NodalParameter<Vec2> b) {
    double bmax = 0.0;
    for (const Vec2& v : b.samples()) bmax = std::max(bmax, norm(v));
    if (!(bmax < 1.0)) throw InvalidMetric("shifted: |b(x)| < 1 required everywhere");
    return FinslerMetric(Shifted{std::move(b)}, 1.0 - bmax, 1.0 + bmax);
  }

  MetricFamily family() const { return static_cast<MetricFamily>(data_.index()); }
  bool closed_form_dual() const {
    return family() != MetricFamily::Polytope;
  }

  // a, b with a|p| <= H(x,p) <= b|p|.
  double lower_bound() const { return lower_ * scale_; }
  double upper_bound() const { return upper_ * scale_; }
  // Matching bounds for the dual: |q|/b <= H*(x,q) <= |q|/a.
  double dual_lower_bound() const { return 1.0 / upper_bound(); }
  double dual_upper_bound() const { return 1.0 / lower_bound(); }

  // The metric c * H.
  FinslerMetric scaled(double c) const {
    if (!(c > 0.0)) throw InvalidMetric("scaled: factor must be positive");
    FinslerMetric m = *this;
    m.scale_ *= c;
    return m;
  }

  double primal(Vec2 x, Vec2 p) const { return scale_ * base_primal(x, p); }

  double dual(Vec2 x, Vec2 q) const {
    if (q.x == 0.0 && q.y == 0.0) return 0.0;
    return base_dual(x, q).value / scale_;
  }

  Vec2 grad_dual(Vec2 x, Vec2 q) const {
    if (q.x == 0.0 && q.y == 0.0) throw ZeroVector();
    return base_dual(x, q).grad / scale_;
  }

  // Fused evaluation for the solver. Returns all zeros at q = 0, where the
  // gradient is undefined; callers smooth around the origin.
  DualDerivatives dual_derivatives(Vec2 x, Vec2 q, bool with_hessian) const {
    if (q.x == 0.0 && q.y == 0.0) return {};
    DualDerivatives d = base_dual(x, q);
    if (with_hessian) d.hess = base_dual_hessian(x, q, d);
    d.value /= scale_;
    d.grad = d.grad / scale_;
    d.hess = d.hess * (1.0 / scale_);
    return d;
  }

  // Polytope family only: vertices c_k of the dual unit ball {q : H*(x,q) <= 1},
  // so that H*(x,q) = max_k <c_k, q>.
  std::optional<std::vector<Vec2>> polar_vertices(Vec2 x) const {
    if (family() != MetricFamily::Polytope) return std::nullopt;
    const auto& verts = std::get<Polytope>(data_).vertices;
    Polygon z;
    if (verts.is_constant()) {
      z = verts.samples().front();
    } else {
      const auto b = verts.grid()->bilinear(x);
      std::array<Polygon, 4> polys;
      for (int k = 0; k < 4; ++k) polys[static_cast<std::size_t>(k)] = verts.samples()[static_cast<std::size_t>(b.nodes[k])];
      z = minkowski_combination(polys, b.weights);
    }
    std::vector<Vec2> c;
    for (const auto& [n, offset] : polygon_facets(z)) c.push_back(n / (offset * scale_));
    return c;
  }

 private:
  struct WeightedEuclidean {
    NodalParameter<double> k;
  };
  struct Riemannian {
    NodalParameter<Mat2> a;
  };
  struct Polytope {
    NodalParameter<Polygon> vertices;
  };
  struct Shifted {
    NodalParameter<Vec2> b;
  };
  using Data = std::variant<WeightedEuclidean, Riemannian, Polytope, Shifted>;

  FinslerMetric(Data data, double lower, double upper) : data_(std::move(data)), lower_(lower), upper_(upper) {}

  double base_primal(Vec2 x, Vec2 p) const {
    switch (family()) {
      case MetricFamily::WeightedEuclidean:
        return std::get<WeightedEuclidean>(data_).k.at(x) * norm(p);
      case MetricFamily::Riemannian:
        return std::sqrt(std::max(0.0, quadratic_form(std::get<Riemannian>(data_).a.at(x), p)));
      case MetricFamily::Polytope:
        if (p.x == 0.0 && p.y == 0.0) return 0.0;
        return std::get<Polytope>(data_).vertices.blend(x, [&](const Polygon& poly) { return polygon_support(poly, p); });
      case MetricFamily::Shifted:
        return norm(p) + dot(std::get<Shifted>(data_).b.at(x), p);
    }
    return 0.0;
  }

  DualDerivatives base_dual(Vec2 x, Vec2 q) const {
    switch (family()) {
      case MetricFamily::WeightedEuclidean: {
        const double k = std::get<WeightedEuclidean>(data_).k.at(x);
        const double nq = norm(q);
        return {nq / k, q / (k * nq), {}};
      }
      case MetricFamily::Riemannian: {
        const Mat2 ainv = inverse(std::get<Riemannian>(data_).a.at(x));
        const Vec2 aq = ainv * q;
        const double v = std::sqrt(std::max(0.0, dot(q, aq)));
        return {v, aq / v, {}};
      }
      case MetricFamily::Polytope: {
        const auto& verts = std::get<Polytope>(data_).vertices;
        if (verts.is_constant()) {
          const Polygon& poly = verts.samples().front();
          const auto r = detail::maximize_ratio([&](Vec2 u) { return polygon_support(poly, u); }, q);
          return {r.value, r.argmax, {}};
        }
        const auto r = detail::maximize_ratio([&](Vec2 u) { return base_primal(x, u); }, q);
        return {r.value, r.argmax, {}};
      }
      case MetricFamily::Shifted: {
        // Smallest t with |q - t b| = t: t = (D - b.q) / (1 - |b|^2),
        // D = sqrt((b.q)^2 + (1 - |b|^2)|q|^2).
        const Vec2 b = std::get<Shifted>(data_).b.at(x);
        const double a = 1.0 - dot(b, b);
        const double bq = dot(b, q);
        const double dd = std::sqrt(bq * bq + a * dot(q, q));
        return {(dd - bq) / a, ((b * bq + q * a) / dd - b) / a, {}};
      }
    }
    return {};
  }

  Mat2 base_dual_hessian(Vec2 x, Vec2 q, const DualDerivatives& d) const {
    switch (family()) {
      case MetricFamily::WeightedEuclidean: {
        // (I - qq^T/|q|^2) / (k |q|)
        const double nq = norm(q);
        const double k = nq / d.value;
        const Vec2 u = q / nq;
        return (Mat2::identity() - outer(u, u)) * (1.0 / (k * nq));
      }
      case MetricFamily::Riemannian: {
        // (M - Mq q^T M / H*^2) / H*,  M = A^{-1}
        const Mat2 ainv = inverse(std::get<Riemannian>(data_).a.at(x));
        return (ainv - outer(d.grad, d.grad)) * (1.0 / d.value);
      }
      case MetricFamily::Shifted: {
        // ((b b^T + a I) / D - w w^T / D^3) / a,  w = (b.q) b + a q
        const Vec2 b = std::get<Shifted>(data_).b.at(x);
        const double a = 1.0 - dot(b, b);
        const double bq = dot(b, q);
        const double dd = std::sqrt(bq * bq + a * dot(q, q));
        const Vec2 w = b * bq + q * a;
        return ((outer(b, b) + Mat2::identity() * a) * (1.0 / dd) - outer(w, w) * (1.0 / (dd * dd * dd))) * (1.0 / a);
      }
      case MetricFamily::Polytope: {
        const double s = 1e-4 * norm(q);
        const Vec2 gxp = base_dual(x, q + Vec2{s, 0.0}).grad;
        const Vec2 gxm = base_dual(x, q - Vec2{s, 0.0}).grad;
        const Vec2 gyp = base_dual(x, q + Vec2{0.0, s}).grad;
        const Vec2 gym = base_dual(x, q - Vec2{0.0, s}).grad;
        const Vec2 cx = (gxp - gxm) / (2.0 * s);
        const Vec2 cy = (gyp - gym) / (2.0 * s);
        return clip_to_psd({cx.x, cy.x, cx.y, cy.y});
      }
    }
    return {};
  }

  Data data_;
  double lower_ = 1.0;
  double upper_ = 1.0;
  double scale_ = 1.0;
};

// Smooth stand-in for max_k <c_k, q>: (sum_k <c_k, q>_+^s)^(1/s). Convex,
// 1-homogeneous, C^2 away from 0 for s >= 3, and between the max and
// m^(1/s) times the max (m facets facing q).
inline DualDerivatives soft_max_dual(std::span<const Vec2> c, Vec2 q, double s, bool with_hessian) {
  DualDerivatives d;
  double wmax = 0.0;
  for (const Vec2& ck : c) wmax = std::max(wmax, dot(ck, q));
  if (!(wmax > 0.0)) return d;
  double sum = 0.0;
  Vec2 g{};
  Mat2 hsum{};
  for (const Vec2& ck : c) {
    const double w = dot(ck, q) / wmax;
    if (w <= 0.0) continue;
    const double ws2 = std::pow(w, s - 2.0);
    sum += ws2 * w * w;
    g = g + ck * (ws2 * w);
    if (with_hessian) hsum = hsum + outer(ck, ck) * ws2;
  }
  // f = wmax S^(1/s); grad = S^(1/s - 1) sum w^(s-1) c;
  // hess = (s-1) [ f^(1-s) sum (c.q)^(s-2) c c^T - grad grad^T / f ]
  const double root = std::pow(sum, 1.0 / s);
  d.value = wmax * root;
  d.grad = g * (root / sum);
  if (with_hessian) {
    d.hess = (hsum * (root / (sum * wmax)) - outer(d.grad, d.grad) * (1.0 / d.value)) * (s - 1.0);
    d.hess = clip_to_psd(d.hess);
  }
  return d;
}

// Z(x) = { xi : F(x, xi) <= 0 } for the supported shape families.
class SublevelSet {
 public:
  enum class Shape { Ball, Ellipse, PolytopeVertices };

  static SublevelSet ball(NodalParameter<double> radius) {
    for (double r : radius.samples()) {
      if (!(r > 0.0)) throw InvalidMetric("ball: 0 must be interior, radius > 0 required");
    }
    return SublevelSet(FinslerMetric::weighted_euclidean(std::move(radius)), Shape::Ball);
  }

  // Z = { xi : xi^T A xi <= 1 }; sigma(q) = sqrt(q^T A^{-1} q). Node samples
  // of A^{-1} are blended.
  static SublevelSet ellipse(const NodalParameter<Mat2>& a) {
    std::vector<Mat2> inv;
    for (const Mat2& m : a.samples()) {
      const auto [e0, e1] = symmetric_eigenvalues(m);
      if (!(e0 > 0.0)) throw InvalidMetric("ellipse: A must be positive definite");
      inv.push_back(inverse(m));
    }
    auto param = a.grid() ? NodalParameter<Mat2>(*a.grid(), std::move(inv)) : NodalParameter<Mat2>(inv.front());
    return SublevelSet(FinslerMetric::riemannian(std::move(param)), Shape::Ellipse);
  }

  static SublevelSet polytope(NodalParameter<Polygon> vertices) {
    return SublevelSet(FinslerMetric::polytope(std::move(vertices)), Shape::PolytopeVertices);
  }

  Shape shape() const { return shape_; }

  // sigma(x, q) = sup_{p in Z(x)} <p, q>
  double support(Vec2 x, Vec2 q) const { return sigma_.primal(x, q); }

  // sigma as a Finsler metric.
  const FinslerMetric& support_metric() const { return sigma_; }

 private:
  SublevelSet(FinslerMetric sigma, Shape shape) : sigma_(std::move(sigma)), shape_(shape) {}

  FinslerMetric sigma_;
  Shape shape_;
};

inline double support_function(const SublevelSet& z, Vec2 x, Vec2 q) { return z.support(x, q); }

struct IdentitySample {
  Vec2 x;
  Vec2 p;
  Vec2 q;
};

// Largest violation of each pointwise identity over a sample set.
struct IdentityReport {
  double cauchy_schwarz = 0.0;   // <p,q> <= H(p) H*(q)
  double gradient_support = 0.0;  // dH*(p).q <= H*(q)
  double gradient_bound = 0.0;    // |dH*(p).q| <= |q| / a
  double euler = 0.0;             // dH*(q).q = H*(q)
  double normalization = 0.0;     // H(dH*(q)) = 1
  std::size_t samples = 0;

  double worst() const { return std::max({cauchy_schwarz, gradient_support, gradient_bound, euler, normalization}); }
};

inline IdentityReport check_identities(const FinslerMetric& metric, std::span<const IdentitySample> samples) {
  if (samples.empty()) throw ValidationError("check_identities: empty sample list");
  IdentityReport r;
  const double bt = metric.dual_upper_bound();
  for (const auto& s : samples) {
    const double hp = metric.primal(s.x, s.p);
    const double hq = metric.dual(s.x, s.q);
    r.cauchy_schwarz = std::max(r.cauchy_schwarz, dot(s.p, s.q) - hp * hq);
    if (!(s.p.x == 0.0 && s.p.y == 0.0)) {
      const Vec2 gp = metric.grad_dual(s.x, s.p);
      const double gq = dot(gp, s.q);
      r.gradient_support = std::max(r.gradient_support, gq - hq);
      r.gradient_bound = std::max(r.gradient_bound, std::abs(gq) - bt * norm(s.q));
    }
    if (!(s.q.x == 0.0 && s.q.y == 0.0)) {
      const Vec2 gq = metric.grad_dual(s.x, s.q);
      r.euler = std::max(r.euler, std::abs(dot(gq, s.q) - hq));
      r.normalization = std::max(r.normalization, std::abs(metric.primal(s.x, gq) - 1.0));
    }
    ++r.samples;
  }
  return r;
}

}  // namespace finsler_hj
