#pragma once

// Time stepping of the coupled plate/heat system: backward Euler, one Newton
// solve of the quasistatic mechanical step and one linear heat solve per
// step, ordered by the temperature-scaling regime.

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "vkplate/assembly.hpp"
#include "vkplate/energy.hpp"
#include "vkplate/linalg.hpp"

namespace vkplate {

struct SimParams {
  double dt = 0.1;
  double t_end = 1.0;
  double newton_tol = 1e-10;
  int newton_max_iter = 30;
  LinearSolver heat_solver = LinearSolver::direct;

  void validate() const {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(t_end > 0.0)) throw ValidationError("t_end must be positive");
    if (dt > t_end * (1.0 + 1e-12)) throw ValidationError("dt must not exceed t_end");
    if (!(newton_tol > 0.0)) throw ValidationError("newton_tol must be positive");
    if (newton_max_iter < 1) throw ValidationError("newton_max_iter must be at least 1");
  }

  /// Steps needed to reach t_end; times are k * dt.
  int num_steps() const { return static_cast<int>(std::ceil(t_end / dt - 1e-9)); }
};

struct StepStats {
  int newton_iterations = 0;
  std::vector<double> residual_norms;
};

struct StepResult {
  PlateState state;
  StepStats stats;
};

/// Newton solve of the mechanical step prev -> prev.t + dt with `bracket_mu`
/// as the temperature in the thermal-stress term. Stops once the residual
/// norm is at most newton_tol * (1 + initial norm).
inline PlateState solve_mechanics(const PlateMesh& mesh, const PlateState& prev, double dt,
                                  const Eigen::VectorXd& bracket_mu, const MaterialSet& mat,
                                  const Loads& loads, const SimParams& params, StepStats& stats) {
  PlateState guess = prev;
  guess.t = prev.t + dt;
  guess.mu = bracket_mu;
  Eigen::VectorXd x = free_part(mesh.dofs, mech_vector(guess));
  double r0 = 0.0;
  for (int it = 0;; ++it) {
    const AssembledMech sys = assemble_mech(mesh, prev, guess, dt, mat, loads, true);
    const double rn = sys.residual.norm();
    if (!std::isfinite(rn)) throw SolverError("mechanical residual is not finite");
    stats.residual_norms.push_back(rn);
    if (it == 0) r0 = rn;
    if (rn <= params.newton_tol * (1.0 + r0)) {
      stats.newton_iterations = it;
      return guess;
    }
    if (it >= params.newton_max_iter) {
      std::ostringstream os;
      os << "Newton did not converge in " << params.newton_max_iter
         << " iterations (final residual norm " << rn << ")";
      throw SolverError(os.str());
    }
    x += solve_general(sys.jacobian, -sys.residual);
    set_free_part(mesh.dofs, x, guess);
  }
}

/// Linear heat solve prev.mu -> mu at prev.t + dt with the given rates.
inline Eigen::VectorXd solve_heat(const PlateMesh& mesh, const PlateState& prev, const Rates& rates,
                                  double dt, const MaterialSet& mat, const Loads& loads,
                                  LinearSolver method) {
  const HeatSystem sys = assemble_heat(mesh, prev, rates, dt, mat, loads);
  return solve_spd(sys.matrix, sys.rhs, method);
}

/// alpha = 2: heat (autonomous) first, then mechanics with the new mu.
/// alpha = 4: mechanics first, then heat with the dissipation of that step.
/// otherwise: mechanics then heat, independent of each other.
inline StepResult step(const PlateMesh& mesh, const PlateState& state_n, double dt, const MaterialSet& mat,
                       const Loads& loads, const SimParams& params) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  if (!state_n.conforms_to(mesh)) throw ValidationError("state does not match the mesh");
  StepResult r;
  const Rates no_rates{Eigen::VectorXd::Zero(mesh.dofs.num_u()), Eigen::VectorXd::Zero(mesh.dofs.num_v())};
  if (mat.alpha == 2.0) {
    const Eigen::VectorXd mu_next = solve_heat(mesh, state_n, no_rates, dt, mat, loads, params.heat_solver);
    r.state = solve_mechanics(mesh, state_n, dt, mu_next, mat, loads, params, r.stats);
    r.state.mu = mu_next;
  } else {
    r.state = solve_mechanics(mesh, state_n, dt, state_n.mu, mat, loads, params, r.stats);
    const Rates rates = mat.has_heat_source() ? rates_between(state_n, r.state, dt) : no_rates;
    r.state.mu = solve_heat(mesh, state_n, rates, dt, mat, loads, params.heat_solver);
  }
  return r;
}

struct InitialConditions {
  ScalarField u1 = constant_field(0.0);
  ScalarField u2 = constant_field(0.0);
  ScalarField v = constant_field(0.0);
  /// Missing derivatives fall back to central differences of v.
  std::optional<ScalarField> v_d1, v_d2, v_d12;
  ScalarField mu = constant_field(0.0);
};

/// Nodal interpolation. Dirichlet dofs must come out zero (to 1e-8) and are
/// then set to exactly zero.
inline PlateState interpolate_initial(const PlateMesh& mesh, const InitialConditions& ic) {
  PlateState s = PlateState::zero(mesh, 0.0);
  const Grid2D& g = mesh.grid;
  const double delta = 1e-4 * std::min(g.hx(), g.hy());
  auto d1 = [&](double x, double y) {
    return ic.v_d1 ? (*ic.v_d1)(x, y, 0.0) : (ic.v(x + delta, y, 0.0) - ic.v(x - delta, y, 0.0)) / (2 * delta);
  };
  auto d2 = [&](double x, double y) {
    return ic.v_d2 ? (*ic.v_d2)(x, y, 0.0) : (ic.v(x, y + delta, 0.0) - ic.v(x, y - delta, 0.0)) / (2 * delta);
  };
  auto d12 = [&](double x, double y) {
    if (ic.v_d12) return (*ic.v_d12)(x, y, 0.0);
    return (ic.v(x + delta, y + delta, 0.0) - ic.v(x + delta, y - delta, 0.0) -
            ic.v(x - delta, y + delta, 0.0) + ic.v(x - delta, y - delta, 0.0)) /
           (4 * delta * delta);
  };
  for (int n = 0; n < g.num_nodes(); ++n) {
    const Eigen::Vector2d x = g.node_xy(n);
    s.u(DofLayout::u_dof(n, 0)) = ic.u1(x(0), x(1), 0.0);
    s.u(DofLayout::u_dof(n, 1)) = ic.u2(x(0), x(1), 0.0);
    s.v(DofLayout::v_dof(n, 0)) = ic.v(x(0), x(1), 0.0);
    s.v(DofLayout::v_dof(n, 1)) = d1(x(0), x(1));
    s.v(DofLayout::v_dof(n, 2)) = d2(x(0), x(1));
    s.v(DofLayout::v_dof(n, 3)) = d12(x(0), x(1));
    s.mu(n) = ic.mu(x(0), x(1), 0.0);
  }
  const DofLayout& d = mesh.dofs;
  for (int m = 0; m < d.num_mech(); ++m) {
    if (!d.mech_constrained[m]) continue;
    double& val = m < d.num_u() ? s.u(m) : s.v(m - d.num_u());
    if (std::abs(val) > 1e-8) {
      throw ValidationError("initial displacement does not satisfy the clamped boundary condition");
    }
    val = 0.0;
  }
  return s;
}

struct Trajectory {
  std::vector<PlateState> states;
  std::vector<StepStats> stats;  ///< one per step (states.size() - 1)
  EnergyLedger ledger;
};

using StepObserver = std::function<void(int step, const PlateState&)>;

inline Trajectory run_from(const PlateMesh& mesh, const MaterialSet& mat, const Loads& loads,
                           PlateState initial, const SimParams& params, const StepObserver& observer = {}) {
  params.validate();
  if (!initial.conforms_to(mesh)) throw ValidationError("initial state does not match the mesh");
  initial.t = 0.0;
  Trajectory traj;
  const int steps = params.num_steps();
  traj.states.reserve(steps + 1);
  traj.states.push_back(std::move(initial));
  if (observer) observer(0, traj.states.back());
  for (int k = 1; k <= steps; ++k) {
    const PlateState& prev = traj.states.back();
    const double dt = k * params.dt - prev.t;
    StepResult r = step(mesh, prev, dt, mat, loads, params);
    r.state.t = k * params.dt;
    traj.stats.push_back(std::move(r.stats));
    traj.states.push_back(std::move(r.state));
    if (observer) observer(k, traj.states.back());
  }
  traj.ledger = balance_residual(mesh, traj.states, mat, loads);
  return traj;
}

inline Trajectory run(const PlateMesh& mesh, const MaterialSet& mat, const Loads& loads,
                      const InitialConditions& ic, const SimParams& params,
                      const StepObserver& observer = {}) {
  return run_from(mesh, mat, loads, interpolate_initial(mesh, ic), params, observer);
}

}  // namespace vkplate
