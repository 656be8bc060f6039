#pragma once

// Finsler p-Laplace obstacle problems and the p -> infinity ladder.
//
// For each exponent p the solver minimizes
//
//   F_p(u) = sum_c (H*_e(x_c, grad u_c)^p - e^p) / p * h^2 - sum_i u_i rho_i m_i
//
// over nodal u with phi <= u <= psi on boundary nodes, where
// H*_e = sqrt(H*^2 + e^2). The constant e^p term only keeps F_p(const) = -int rho u.
// The nodal gradient of F_p is the divergence residual of the flux
// Theta = H*_e^{p-1} grad(H*_e), so at a minimizer the boundary entries of
// that residual are the normal-trace measure theta.
//
// Powers are taken relative to M = max_c H*_e so no intermediate exceeds one
// before the final M^p factor.

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "finsler_hj/distance.hpp"
#include "finsler_hj/error.hpp"
#include "finsler_hj/geometry.hpp"
#include "finsler_hj/metric.hpp"
#include "finsler_hj/optimizer.hpp"
#include "finsler_hj/parallel.hpp"

namespace finsler_hj {

struct SolverOptions {
  double tolerance = 1e-8;  // relative: ||projected gradient|| <= tolerance (1 + |F_p|)
  int max_iterations = 5000;
  double epsilon_first = 1e-2;  // smoothing at the first rung
  double epsilon_last = 1e-6;   // smoothing at the last rung
  OptimizerKind optimizer = OptimizerKind::ProjectedNewton;
  Stencil stencil = Stencil::Sixteen;
  int nonstrict_offset_n = 16;  // phi - 1/n when compatibility is not strict
  // Polytope duals are max-of-linear with kinks; the energy uses the soft max
  // of order s instead (relative error <= 2^(1/s) - 1 for two facing facets).
  double polytope_smoothing = 64.0;
};

struct ProblemSpec {
  Grid grid;
  FinslerMetric metric;
  ScalarField rho;
  ScalarField phi;
  ScalarField psi;
  std::vector<double> p_ladder{2, 4, 8, 16, 32, 64};
  SolverOptions options{};

  // Log-linear in log p between the ladder ends, clamped outside.
  double epsilon_for(double p) const {
    const double p0 = p_ladder.front();
    const double p1 = p_ladder.back();
    if (p1 <= p0) return options.epsilon_last;
    const double t = std::clamp((std::log(p) - std::log(p0)) / (std::log(p1) - std::log(p0)), 0.0, 1.0);
    return std::exp((1.0 - t) * std::log(options.epsilon_first) + t * std::log(options.epsilon_last));
  }
};

// Compatibility status and the lower obstacle actually used by the solver.
struct Admissibility {
  CompatibilityResult compatibility;
  double phi_offset = 0.0;
  ScalarField phi_effective;
};

// Checks ladder, grids, compatibility (before phi <= psi: a violated pair
// (x, x) is the same defect and carries a witness) and phi <= psi.
inline Admissibility validate(const ProblemSpec& spec) {
  if (spec.p_ladder.empty()) throw ValidationError("p_ladder: at least one exponent required");
  if (spec.p_ladder.front() < 2.0) throw ValidationError("p_ladder: first entry >= 2 required");
  for (std::size_t k = 1; k < spec.p_ladder.size(); ++k) {
    if (!(spec.p_ladder[k] > spec.p_ladder[k - 1])) throw ValidationError("p_ladder: strictly increasing required");
  }
  require_same_grid(spec.grid, spec.rho.grid(), "problem rho");
  require_same_grid(spec.grid, spec.phi.grid(), "problem phi");
  require_same_grid(spec.grid, spec.psi.grid(), "problem psi");
  if (!(spec.options.epsilon_first > 0.0 && spec.options.epsilon_last > 0.0)) {
    throw ValidationError("solver: smoothing epsilon must be positive");
  }
  Admissibility a;
  a.compatibility = check_compatibility(spec.metric, spec.grid, spec.phi, spec.psi, spec.options.stencil);
  if (a.compatibility.status == CompatibilityStatus::Violated) {
    throw IncompatibleSpec("compatibility Violated at boundary pair (" + std::to_string(a.compatibility.x_node) + "," +
                           std::to_string(a.compatibility.y_node) +
                           "): phi(x) - psi(y) exceeds d_H(y,x) by " + std::to_string(-a.compatibility.margin));
  }
  for (int n : spec.grid.boundary_nodes()) {
    if (spec.phi[n] > spec.psi[n]) {
      throw ValidationError("phi<=psi violated at boundary node " + std::to_string(n));
    }
  }
  a.phi_effective = spec.phi;
  if (a.compatibility.status == CompatibilityStatus::NonStrict) {
    a.phi_offset = 1.0 / spec.options.nonstrict_offset_n;
    for (double& v : a.phi_effective.mutable_values()) v -= a.phi_offset;
  }
  return a;
}

// The p-Laplace energy on a fixed problem, exponent and smoothing.
class PLaplaceEnergy {
 public:
  PLaplaceEnergy(const ProblemSpec& spec, double p, double epsilon)
      : spec_(spec), grid_(spec.grid), p_(p), eps_(epsilon), centers_(static_cast<std::size_t>(grid_.cell_count())),
        load_(static_cast<std::size_t>(grid_.node_count())) {
    for (int c = 0; c < grid_.cell_count(); ++c) centers_[static_cast<std::size_t>(c)] = grid_.cell_center(c);
    for (int n = 0; n < grid_.node_count(); ++n) load_[static_cast<std::size_t>(n)] = spec.rho[n] * grid_.node_mass(n);
    if (spec.metric.family() == MetricFamily::Polytope) {
      polar_.resize(centers_.size());
      for (std::size_t c = 0; c < centers_.size(); ++c) polar_[c] = *spec.metric.polar_vertices(centers_[c]);
    }
  }

  double p() const { return p_; }
  double epsilon() const { return eps_; }

  // F_p(u); fills grad when it is non-empty. Returns +inf on overflow.
  double evaluate(std::span<const double> u, std::span<double> grad) const {
    const CellState st = cell_state(u);
    if (!std::isfinite(st.log_max)) return std::numeric_limits<double>::infinity();
    const double mp = std::exp(p_ * st.log_max);
    if (!std::isfinite(mp)) return std::numeric_limits<double>::infinity();
    const double floor_ratio = std::pow(eps_ / std::exp(st.log_max), p_);
    double sum = 0.0;
    for (double r : st.ratio) sum += std::pow(r, p_) - floor_ratio;
    const double h2 = grid_.h() * grid_.h();
    double energy = mp * sum / p_ * h2;
    for (std::size_t n = 0; n < u.size(); ++n) energy -= u[n] * load_[n];
    if (!grad.empty()) {
      const auto flux = flux_from_state(st);
      std::fill(grad.begin(), grad.end(), 0.0);
      add_gradient_transpose(grid_, flux, grad);
      for (std::size_t n = 0; n < u.size(); ++n) grad[n] -= load_[n];
    }
    return energy;
  }

  // Theta_c = H*_e^{p-1} grad(H*_e)(grad u_c)
  std::vector<Vec2> flux(std::span<const double> u) const { return flux_from_state(cell_state(u)); }

  Eigen::SparseMatrix<double> hessian(std::span<const double> u) const {
    const int cells = grid_.cell_count();
    std::vector<Mat2> k(static_cast<std::size_t>(cells));
    std::vector<double> s(static_cast<std::size_t>(cells));
    std::vector<DualDerivatives> dd(static_cast<std::size_t>(cells));
    parallel_for(cells, [&](int c) {
      const Vec2 q = cell_gradient_at(grid_, u, c);
      dd[static_cast<std::size_t>(c)] = cell_dual(c, q, true);
      const double v = dd[static_cast<std::size_t>(c)].value;
      s[static_cast<std::size_t>(c)] = std::sqrt(v * v + eps_ * eps_);
    });
    const double smax = *std::max_element(s.begin(), s.end());
    const double log_max = std::log(smax);
    const double a2 = spec_.metric.dual_lower_bound() * spec_.metric.dual_lower_bound();
    parallel_for(cells, [&](int c) {
      const auto& d = dd[static_cast<std::size_t>(c)];
      const double sc = s[static_cast<std::size_t>(c)];
      // Hessian of H*_e: (H*/s) Hess H* + (e^2/s^3) grad H* grad H*^T
      Mat2 hess_e;
      Vec2 grad_e{};
      if (d.value == 0.0) {
        hess_e = Mat2::identity() * (a2 / eps_);
      } else {
        grad_e = d.grad * (d.value / sc);
        hess_e = d.hess * (d.value / sc) + outer(d.grad, d.grad) * (eps_ * eps_ / (sc * sc * sc));
      }
      const double lr = std::log(sc) - log_max;
      const double pm1 = std::exp((p_ - 1.0) * lr + (p_ - 1.0) * log_max);
      const double pm2 = std::exp((p_ - 2.0) * lr + (p_ - 2.0) * log_max);
      k[static_cast<std::size_t>(c)] = outer(grad_e, grad_e) * ((p_ - 1.0) * pm2) + hess_e * pm1;
    });
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(cells) * 16);
    for (int c = 0; c < cells; ++c) {
      const auto nodes = grid_.cell_nodes(c);
      const Mat2& kc = k[static_cast<std::size_t>(c)];
      for (int a = 0; a < 4; ++a) {
        const Vec2 sa{detail::kGradSignX[a], detail::kGradSignY[a]};
        const Vec2 ka = kc * sa;
        for (int b = 0; b < 4; ++b) {
          const Vec2 sb{detail::kGradSignX[b], detail::kGradSignY[b]};
          trips.emplace_back(nodes[a], nodes[b], 0.25 * dot(sb, ka));
        }
      }
    }
    Eigen::SparseMatrix<double> m(grid_.node_count(), grid_.node_count());
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
  }

 // Dual used by the energy in cell c (the soft max for polytopes).
  DualDerivatives cell_dual(int c, Vec2 q, bool with_hessian) const {
    if (!polar_.empty()) {
      return soft_max_dual(polar_[static_cast<std::size_t>(c)], q, spec_.options.polytope_smoothing, with_hessian);
    }
    return spec_.metric.dual_derivatives(centers_[static_cast<std::size_t>(c)], q, with_hessian);
  }

 private:
  struct CellState {
    std::vector<double> ratio;   // H*_e / M
    std::vector<Vec2> grad_e;    // grad of H*_e
    double log_max = 0.0;        // log M
  };

  CellState cell_state(std::span<const double> u) const {
    const int cells = grid_.cell_count();
    CellState st{std::vector<double>(static_cast<std::size_t>(cells)), std::vector<Vec2>(static_cast<std::size_t>(cells)), 0.0};
    parallel_for(cells, [&](int c) {
      const Vec2 q = cell_gradient_at(grid_, u, c);
      const auto d = cell_dual(c, q, false);
      const double s = std::sqrt(d.value * d.value + eps_ * eps_);
      st.ratio[static_cast<std::size_t>(c)] = s;
      st.grad_e[static_cast<std::size_t>(c)] = d.value == 0.0 ? Vec2{} : d.grad * (d.value / s);
    });
    const double smax = *std::max_element(st.ratio.begin(), st.ratio.end());
    st.log_max = std::log(smax);
    for (double& r : st.ratio) r /= smax;
    return st;
  }

  std::vector<Vec2> flux_from_state(const CellState& st) const {
    const double mp1 = std::exp((p_ - 1.0) * st.log_max);
    std::vector<Vec2> flux(st.ratio.size());
    for (std::size_t c = 0; c < flux.size(); ++c) flux[c] = st.grad_e[c] * (mp1 * std::pow(st.ratio[c], p_ - 1.0));
    return flux;
  }

  const ProblemSpec& spec_;
  Grid grid_;
  double p_;
  double eps_;
  std::vector<Vec2> centers_;
  std::vector<double> load_;
  std::vector<std::vector<Vec2>> polar_;
};

struct EnergyAndGradient {
  double energy = 0.0;
  ScalarField gradient;
};

inline EnergyAndGradient energy_and_gradient(const ProblemSpec& spec, double p, const ScalarField& u,
                                             std::optional<double> epsilon = std::nullopt) {
  require_same_grid(spec.grid, u.grid(), "energy_and_gradient");
  const PLaplaceEnergy energy(spec, p, epsilon.value_or(spec.epsilon_for(p)));
  std::vector<double> g(static_cast<std::size_t>(spec.grid.node_count()));
  const double f = energy.evaluate(u.values(), g);
  return {f, ScalarField(spec.grid, std::move(g))};
}

struct PSolution {
  double p = 0.0;
  double epsilon = 0.0;
  ScalarField u;
  VectorField flux;              // Theta_p on cells
  BoundaryMeasure theta;         // Theta_p . n on boundary nodes
  ScalarField residual;          // full divergence residual (gradient of F_p)
  double energy = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  double tolerance = 0.0;        // absolute stopping threshold
  bool converged = false;
  std::string stop_reason;
  std::vector<double> energy_history;
  double phi_offset = 0.0;
};

// Shared contact threshold: |u - phi| <= delta counts as contact.
inline double contact_threshold(const ProblemSpec& spec, double tolerance) {
  double spread = 0.0;
  for (int n : spec.grid.boundary_nodes()) spread = std::max(spread, std::abs(spec.psi[n] - spec.phi[n]));
  return 10.0 * tolerance * (1.0 + spread);
}

namespace detail {

inline Bounds box_bounds(const Grid& grid, const ScalarField& lower, const ScalarField& upper) {
  const auto inf = std::numeric_limits<double>::infinity();
  Bounds b{std::vector<double>(static_cast<std::size_t>(grid.node_count()), -inf),
           std::vector<double>(static_cast<std::size_t>(grid.node_count()), inf)};
  for (int n : grid.boundary_nodes()) {
    b.lower[static_cast<std::size_t>(n)] = lower[n];
    b.upper[static_cast<std::size_t>(n)] = upper[n];
  }
  return b;
}

// Mean upper obstacle, projected into the box. Ties between minimizers (rho = 0
// regions) then resolve toward psi, so phi = psi = c gives u = c even after the
// lower obstacle has been relaxed.
inline std::vector<double> default_start(const Grid& grid, const ScalarField& lower, const ScalarField& upper) {
  double s = 0.0;
  for (int n : grid.boundary_nodes()) s += upper[n];
  const double c = s / static_cast<double>(grid.boundary_nodes().size());
  std::vector<double> x(static_cast<std::size_t>(grid.node_count()), c);
  for (int n : grid.boundary_nodes()) x[static_cast<std::size_t>(n)] = std::clamp(c, lower[n], upper[n]);
  return x;
}

inline PSolution solve_with(const ProblemSpec& spec, const Admissibility& adm, double p, double epsilon,
                            const ScalarField* warm_start) {
  const Grid& grid = spec.grid;
  const PLaplaceEnergy energy(spec, p, epsilon);
  const Bounds bounds = box_bounds(grid, adm.phi_effective, spec.psi);
  std::vector<double> x0;
  if (warm_start != nullptr) {
    require_same_grid(grid, warm_start->grid(), "solve_p warm start");
    x0.assign(warm_start->values().begin(), warm_start->values().end());
  } else {
    x0 = default_start(grid, adm.phi_effective, spec.psi);
  }
  OptimizerOptions oo;
  oo.tolerance = spec.options.tolerance;
  oo.max_iterations = spec.options.max_iterations;
  const OptimizerResult r = spec.options.optimizer == OptimizerKind::ProjectedNewton
                                ? projected_newton(energy, std::move(x0), bounds, oo)
                                : projected_lbfgs(energy, std::move(x0), bounds, oo);
  PSolution sol;
  sol.p = p;
  sol.epsilon = epsilon;
  sol.u = ScalarField(grid, r.x, spec.psi.units());
  sol.flux = VectorField(grid, energy.flux(r.x));
  sol.residual = divergence_residual(sol.flux, spec.rho);
  sol.theta = boundary_part(sol.residual);
  sol.energy = r.value;
  sol.iterations = r.iterations;
  sol.grad_norm = r.grad_norm;
  sol.tolerance = r.tolerance;
  sol.converged = r.converged;
  sol.stop_reason = r.stop_reason;
  sol.energy_history = r.history;
  sol.phi_offset = adm.phi_offset;
  return sol;
}

}  // namespace detail

// Minimizer of F_p over { phi <= u <= psi on the boundary }. Non-converged
// runs return the last iterate with converged = false.
inline PSolution solve_p(const ProblemSpec& spec, double p, const ScalarField* warm_start = nullptr,
                         std::optional<double> epsilon = std::nullopt) {
  if (!(p >= 2.0)) throw ValidationError("solve_p: p >= 2 required");
  const Admissibility adm = validate(spec);
  return detail::solve_with(spec, adm, p, epsilon.value_or(spec.epsilon_for(p)), warm_start);
}

struct LadderResult {
  std::vector<PSolution> rungs;
  ScalarField u_limit;
  std::vector<double> sup_differences;  // ||u_{k+1} - u_k||_inf
  bool all_converged = true;
  Admissibility admissibility;
};

inline LadderResult solve_ladder(const ProblemSpec& spec) {
  LadderResult out;
  out.admissibility = validate(spec);
  const ScalarField* warm = nullptr;
  for (double p : spec.p_ladder) {
    out.rungs.push_back(detail::solve_with(spec, out.admissibility, p, spec.epsilon_for(p), warm));
    out.all_converged = out.all_converged && out.rungs.back().converged;
    if (out.rungs.size() > 1) {
      out.sup_differences.push_back(sup_distance(out.rungs.back().u, out.rungs[out.rungs.size() - 2].u));
    }
    warm = &out.rungs.back().u;
  }
  out.u_limit = out.rungs.back().u;
  return out;
}

// max over test functions xi of
//   int Theta . grad(u - xi) - int rho (u - xi)
// which is <= 0 at a solution. xi must satisfy the boundary obstacles.
inline double verify_variational_inequality(const PSolution& sol, const ProblemSpec& spec,
                                            std::span<const ScalarField> test_functions) {
  const Admissibility adm = validate(spec);
  const Grid& grid = spec.grid;
  const double feas_tol = 1e-12 * (1.0 + contact_threshold(spec, 1.0));
  double worst = -std::numeric_limits<double>::infinity();
  for (const ScalarField& xi : test_functions) {
    require_same_grid(grid, xi.grid(), "verify_variational_inequality");
    for (int n : grid.boundary_nodes()) {
      if (xi[n] < adm.phi_effective[n] - feas_tol || xi[n] > spec.psi[n] + feas_tol) {
        throw InfeasibleTestFunction("test function leaves [phi, psi] at boundary node " + std::to_string(n));
      }
    }
    std::vector<double> diff(static_cast<std::size_t>(grid.node_count()));
    for (int n = 0; n < grid.node_count(); ++n) diff[static_cast<std::size_t>(n)] = sol.u[n] - xi[n];
    double v = 0.0;
    const double h2 = grid.h() * grid.h();
    for (int c = 0; c < grid.cell_count(); ++c) v += dot(sol.flux[c], cell_gradient_at(grid, diff, c)) * h2;
    for (int n = 0; n < grid.node_count(); ++n) v -= spec.rho[n] * diff[static_cast<std::size_t>(n)] * grid.node_mass(n);
    worst = std::max(worst, v);
  }
  return worst;
}

// Discrete Euler identity: sum_c Theta_c . grad u_c = sum_c H*_e^{p-2} H*^2 with
// the dual the energy uses. Returns the relative gap.
inline double flux_energy_gap(const ProblemSpec& spec, const PSolution& sol) {
  const Grid& grid = spec.grid;
  const PLaplaceEnergy energy(spec, sol.p, sol.epsilon);
  double lhs = 0.0;
  double rhs = 0.0;
  double log_max = -std::numeric_limits<double>::infinity();
  std::vector<double> s(static_cast<std::size_t>(grid.cell_count()));
  std::vector<double> v(s.size());
  for (int c = 0; c < grid.cell_count(); ++c) {
    const Vec2 q = cell_gradient_at(grid, sol.u.values(), c);
    const double d = energy.cell_dual(c, q, false).value;
    v[static_cast<std::size_t>(c)] = d;
    s[static_cast<std::size_t>(c)] = std::sqrt(d * d + sol.epsilon * sol.epsilon);
    log_max = std::max(log_max, std::log(s[static_cast<std::size_t>(c)]));
    lhs += dot(sol.flux[c], q);
  }
  // rhs = M^{p-2} sum (s/M)^{p-2} v^2
  for (std::size_t c = 0; c < s.size(); ++c) rhs += std::pow(s[c] / std::exp(log_max), sol.p - 2.0) * v[c] * v[c];
  rhs *= std::exp((sol.p - 2.0) * log_max);
  return std::abs(lhs - rhs) / std::max(std::abs(rhs), std::numeric_limits<double>::min());
}

// max_c |u00 - u10 - u01 + u11| over the range of u. O(h) for the
// discretized continuum solution; O(1) when the two checkerboard sublattices
// decouple (the averaged cell gradient does not see that mode).
inline double checkerboard_indicator(const ScalarField& u) {
  const Grid& grid = u.grid();
  const auto [lo, hi] = std::minmax_element(u.values().begin(), u.values().end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return 0.0;
  double worst = 0.0;
  for (int c = 0; c < grid.cell_count(); ++c) {
    const auto n = grid.cell_nodes(c);
    worst = std::max(worst, std::abs(u[n[0]] - u[n[1]] - u[n[2]] + u[n[3]]));
  }
  return worst / range;
}

struct RungEstimates {
  double p = 0.0;
  double holder_quotient = 0.0;  // max |u(x)-u(y)| / |x-y|^r, r = 1/2
  double theta_plus = 0.0;       // total mass of theta+
  double theta_minus = 0.0;      // total mass of theta-
  double flux_l1 = 0.0;          // int |Theta|
};

struct EstimateReport {
  std::vector<RungEstimates> rungs;
  double holder_exponent = 0.5;
  // max/min across the ladder <= 10, values below `floor` counted as zero
  bool holder_bounded = true;
  bool theta_plus_bounded = true;
  bool theta_minus_bounded = true;
  bool flux_bounded = true;
  double floor = 1e-8;
};

namespace detail {

inline double holder_quotient(const ScalarField& u, double r, std::uint64_t seed = 12345) {
  const Grid& grid = u.grid();
  const int n = grid.node_count();
  double best = 0.0;
  auto pair_q = [&](int a, int b) {
    const double d = norm(grid.node_position(a) - grid.node_position(b));
    return std::abs(u[a] - u[b]) / std::pow(d, r);
  };
  if (n <= 5000) {
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) best = std::max(best, pair_q(a, b));
    }
    return best;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int k = 0; k < 4000000; ++k) {
    const int a = pick(rng);
    const int b = pick(rng);
    if (a != b) best = std::max(best, pair_q(a, b));
  }
  return best;
}

inline bool uniformly_bounded(const std::vector<double>& values, double floor) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double v : values) {
    const double a = std::abs(v) <= floor ? 0.0 : std::abs(v);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  return hi <= 10.0 * std::max(lo, floor);
}

}  // namespace detail

inline EstimateReport estimate_diagnostics(std::span<const PSolution> sols) {
  if (sols.empty()) throw ValidationError("estimate_diagnostics: empty ladder");
  EstimateReport rep;
  std::vector<double> hq, tp, tm, fl;
  for (const PSolution& s : sols) {
    RungEstimates e;
    e.p = s.p;
    e.holder_quotient = detail::holder_quotient(s.u, rep.holder_exponent);
    e.theta_plus = s.theta.positive_mass();
    e.theta_minus = s.theta.negative_mass();
    const Grid& grid = s.u.grid();
    for (int c = 0; c < grid.cell_count(); ++c) e.flux_l1 += norm(s.flux[c]) * grid.h() * grid.h();
    rep.rungs.push_back(e);
    hq.push_back(e.holder_quotient);
    tp.push_back(e.theta_plus);
    tm.push_back(e.theta_minus);
    fl.push_back(e.flux_l1);
  }
  rep.holder_bounded = detail::uniformly_bounded(hq, rep.floor);
  rep.theta_plus_bounded = detail::uniformly_bounded(tp, rep.floor);
  rep.theta_minus_bounded = detail::uniformly_bounded(tm, rep.floor);
  rep.flux_bounded = detail::uniformly_bounded(fl, rep.floor);
  return rep;
}

}  // namespace finsler_hj
