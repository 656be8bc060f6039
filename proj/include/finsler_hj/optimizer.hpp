#pragma once

// Box-constrained minimization for smooth convex objectives where only some
// coordinates are bounded. Two methods share the projected-gradient stopping
// rule ||P(x - g) - x||_2 <= tol (1 + |f|):
//
//  - projected Newton: Newton steps on the free coordinates, solved with a
//    sparse LDL^T factorization, projected arc search with Armijo backtracking.
//  - projected L-BFGS: same active-set handling with a two-loop recursion.
//
// A Problem provides
//   double evaluate(std::span<const double> x, std::span<double> grad) const;
//   Eigen::SparseMatrix<double> hessian(std::span<const double> x) const;  // Newton only

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace finsler_hj {

enum class OptimizerKind { ProjectedNewton, ProjectedLbfgs };

inline const char* to_string(OptimizerKind k) {
  return k == OptimizerKind::ProjectedNewton ? "projected_newton" : "projected_lbfgs";
}

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  double project(std::size_t i, double v) const { return std::clamp(v, lower[i], upper[i]); }
};

struct OptimizerOptions {
  double tolerance = 1e-8;
  int max_iterations = 5000;
  int lbfgs_memory = 12;
};

struct OptimizerResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_norm = 0.0;
  double tolerance = 0.0;  // absolute threshold at the final iterate
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::vector<double> history;  // objective after each accepted step, starting at x0
};

namespace detail {

inline double projected_gradient_norm(std::span<const double> x, std::span<const double> g, const Bounds& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = b.project(i, x[i] - g[i]) - x[i];
    s += step * step;
  }
  return std::sqrt(s);
}

// Coordinates pinned at a bound with the gradient pushing outward.
inline std::vector<char> active_set(std::span<const double> x, std::span<const double> g, const Bounds& b) {
  std::vector<char> active(x.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((x[i] <= b.lower[i] && g[i] > 0.0) || (x[i] >= b.upper[i] && g[i] < 0.0)) active[i] = 1;
  }
  return active;
}

// Armijo search along the projected arc x(a) = P(x + a d). Returns false when
// no step gives sufficient decrease. Near the floating-point floor a step that
// keeps f within rounding and shrinks the projected gradient is accepted.
template <class Problem>
bool projected_arc_search(const Problem& problem, const Bounds& bounds, std::vector<double>& x, double& f,
                          std::vector<double>& g, std::span<const double> d, double pg_norm, double alpha0 = 1.0) {
  const std::size_t n = x.size();
  std::vector<double> trial(n);
  std::vector<double> trial_g(n);
  double alpha = alpha0;
  for (int k = 0; k < 60; ++k, alpha *= 0.5) {
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      trial[i] = bounds.project(i, x[i] + alpha * d[i]);
      slope += g[i] * (trial[i] - x[i]);
    }
    if (slope >= 0.0) continue;
    const double ft = problem.evaluate(trial, trial_g);
    if (!std::isfinite(ft)) continue;
    const bool armijo = ft <= f + 1e-4 * slope;
    const bool rounding = ft <= f + 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f)) &&
                          projected_gradient_norm(trial, trial_g, bounds) < 0.5 * pg_norm;
    if (armijo || rounding) {
      x.swap(trial);
      g.swap(trial_g);
      f = ft;
      return true;
    }
  }
  return false;
}

}  // namespace detail

template <class Problem>
OptimizerResult projected_newton(const Problem& problem, std::vector<double> x, const Bounds& bounds,
                                 const OptimizerOptions& options) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) x[i] = bounds.project(i, x[i]);
  std::vector<double> g(n);
  double f = problem.evaluate(x, g);
  OptimizerResult r;
  r.history.push_back(f);
  double damping = 0.0;
  for (int it = 0;; ++it) {
    const double pg = detail::projected_gradient_norm(x, g, bounds);
    r.tolerance = options.tolerance * (1.0 + std::abs(f));
    r.grad_norm = pg;
    r.iterations = it;
    if (pg <= r.tolerance) {
      r.converged = true;
      r.stop_reason = "tolerance";
      break;
    }
    if (it >= options.max_iterations) {
      r.stop_reason = "max_iterations";
      break;
    }

    const auto active = detail::active_set(x, g, bounds);
    std::vector<int> free_index(n, -1);
    std::vector<int> free_nodes;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) {
        free_index[i] = static_cast<int>(free_nodes.size());
        free_nodes.push_back(static_cast<int>(i));
      }
    }
    const Eigen::SparseMatrix<double> full = problem.hessian(x);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(full.nonZeros()));
    double max_diag = 0.0;
    for (int col = 0; col < full.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator itm(full, col); itm; ++itm) {
        const int a = free_index[static_cast<std::size_t>(itm.row())];
        const int b = free_index[static_cast<std::size_t>(itm.col())];
        if (a >= 0 && b >= 0) trips.emplace_back(a, b, itm.value());
        if (itm.row() == itm.col()) max_diag = std::max(max_diag, itm.value());
      }
    }
    const int m = static_cast<int>(free_nodes.size());
    Eigen::VectorXd rhs(m);
    for (int k = 0; k < m; ++k) rhs[k] = -g[static_cast<std::size_t>(free_nodes[static_cast<std::size_t>(k)])];
    if (max_diag <= 0.0) max_diag = 1.0;

    bool stepped = false;
    for (int attempt = 0; attempt < 8 && !stepped; ++attempt) {
      const double shift = std::max(1e-12, damping) * max_diag;
      Eigen::SparseMatrix<double> hff(m, m);
      std::vector<Eigen::Triplet<double>> shifted = trips;
      for (int k = 0; k < m; ++k) shifted.emplace_back(k, k, shift);
      hff.setFromTriplets(shifted.begin(), shifted.end());
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(hff);
      bool ok = ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all();
      std::vector<double> d(n, 0.0);
      if (ok) {
        const Eigen::VectorXd sol = ldlt.solve(rhs);
        ok = ldlt.info() == Eigen::Success && sol.allFinite();
        for (int k = 0; k < m && ok; ++k) d[static_cast<std::size_t>(free_nodes[static_cast<std::size_t>(k)])] = sol[k];
      }
      if (ok && detail::projected_arc_search(problem, bounds, x, f, g, d, pg)) {
        stepped = true;
        damping *= 0.1;
        if (damping < 1e-10) damping = 0.0;
      } else {
        damping = damping == 0.0 ? 1e-8 : damping * 100.0;
      }
    }
    if (!stepped) {
      r.stop_reason = "line_search";
      break;
    }
    r.history.push_back(f);
  }
  r.x = std::move(x);
  r.value = f;
  return r;
}

template <class Problem>
OptimizerResult projected_lbfgs(const Problem& problem, std::vector<double> x, const Bounds& bounds,
                                const OptimizerOptions& options) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) x[i] = bounds.project(i, x[i]);
  std::vector<double> g(n);
  double f = problem.evaluate(x, g);
  OptimizerResult r;
  r.history.push_back(f);
  std::deque<std::vector<double>> s_hist;
  std::deque<std::vector<double>> y_hist;
  for (int it = 0;; ++it) {
    const double pg = detail::projected_gradient_norm(x, g, bounds);
    r.tolerance = options.tolerance * (1.0 + std::abs(f));
    r.grad_norm = pg;
    r.iterations = it;
    if (pg <= r.tolerance) {
      r.converged = true;
      r.stop_reason = "tolerance";
      break;
    }
    if (it >= options.max_iterations) {
      r.stop_reason = "max_iterations";
      break;
    }
    const auto active = detail::active_set(x, g, bounds);
    auto masked_dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) s += a[i] * b[i];
      }
      return s;
    };
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i] = active[i] ? 0.0 : -g[i];
    const std::size_t k = s_hist.size();
    std::vector<double> alpha(k);
    std::vector<double> rho(k);
    for (std::size_t j = k; j-- > 0;) {
      const double sy = masked_dot(s_hist[j], y_hist[j]);
      rho[j] = sy > 0.0 ? 1.0 / sy : 0.0;
      alpha[j] = rho[j] * masked_dot(s_hist[j], d);
      for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) d[i] -= alpha[j] * y_hist[j][i];
      }
    }
    double gamma = 1.0;
    if (k > 0) {
      const double yy = masked_dot(y_hist.back(), y_hist.back());
      const double sy = masked_dot(s_hist.back(), y_hist.back());
      if (yy > 0.0 && sy > 0.0) gamma = sy / yy;
    } else {
      double gmax = 0.0;
      for (double v : g) gmax = std::max(gmax, std::abs(v));
      gamma = gmax > 0.0 ? 1e-2 / gmax : 1.0;
    }
    for (double& v : d) v *= gamma;
    for (std::size_t j = 0; j < k; ++j) {
      const double beta = rho[j] * masked_dot(y_hist[j], d);
      for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) d[i] += (alpha[j] - beta) * s_hist[j][i];
      }
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += g[i] * d[i];
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = active[i] ? 0.0 : -gamma * g[i];
    }
    const std::vector<double> x_old = x;
    const std::vector<double> g_old = g;
    if (!detail::projected_arc_search(problem, bounds, x, f, g, d, pg)) {
      if (s_hist.empty()) {
        r.stop_reason = "line_search";
        break;
      }
      s_hist.clear();
      y_hist.clear();
      continue;
    }
    std::vector<double> s(n);
    std::vector<double> y(n);
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x[i] - x_old[i];
      y[i] = g[i] - g_old[i];
      sy += s[i] * y[i];
    }
    if (sy > 1e-300) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      if (static_cast<int>(s_hist.size()) > options.lbfgs_memory) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
    r.history.push_back(f);
  }
  r.x = std::move(x);
  r.value = f;
  return r;
}

}  // namespace finsler_hj
