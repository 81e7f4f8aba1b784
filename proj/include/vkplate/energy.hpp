#pragma once

// Energy bookkeeping of the plate evolution: elastic energy, viscous
// dissipation, thermal coupling work and external work per time step, and
// the residual of the discrete energy balance.

#include <algorithm>
#include <span>
#include <vector>

#include "vkplate/assembly.hpp"

namespace vkplate {

/// phi_el = int 1/2 Q_el(E) + 1/24 Q_el(hess v).
inline double elastic_energy(const PlateMesh& mesh, const PlateState& s, const MaterialSet& mat) {
  const PlateElementTable table(mesh.grid);
  const Eigen::Matrix3d& cel = mat.c_el.voigt();
  double total = 0.0;
  for (int e = 0; e < mesh.grid.num_elements(); ++e) {
    const LocalDofs l = gather(mesh, s.u, s.v, s.mu, e);
    for (int q = 0; q < PlateElementTable::kPoints; ++q) {
      const PointFields f = evaluate(table.at[q], l);
      const Eigen::Vector3d strain = strain_to_voigt<2>(membrane_strain(f.grad_u, f.grad_v));
      const Eigen::Vector3d curv = strain_to_voigt<2>(f.hess_v);
      total += table.weight[q] * (0.5 * strain.dot(cel * strain) + (1.0 / 24.0) * curv.dot(cel * curv));
    }
  }
  return total;
}

/// Work increments of one backward-Euler step from prev to next.
struct StepWork {
  double visc_diss = 0.0;  ///< dt int Q_R(dE) + 1/12 Q_R(d hess v), full viscous tensor
  double cpl_work = 0.0;   ///< dt int mu B : dE, mu = next.mu (the value used by the mechanics)
  double ext_work = 0.0;   ///< dt int f dv, f at next.t
};

inline StepWork step_work(const PlateMesh& mesh, const PlateState& prev, const PlateState& next,
                          const MaterialSet& mat, const Loads& loads) {
  const double dt = next.t - prev.t;
  if (!(dt > 0.0)) throw ValidationError("step_work needs increasing times");
  const PlateElementTable table(mesh.grid);
  const bool thermal = mat.has_thermal_stress();
  const Eigen::Vector3d b_stress(mat.b_thermal(0, 0), mat.b_thermal(1, 1), mat.b_thermal(0, 1));
  StepWork w;
  for (int e = 0; e < mesh.grid.num_elements(); ++e) {
    const LocalDofs ln = gather(mesh, next.u, next.v, next.mu, e);
    const LocalDofs lp = gather(mesh, prev.u, prev.v, prev.mu, e);
    const Eigen::Vector2d origin = mesh.grid.element_origin(e);
    for (int q = 0; q < PlateElementTable::kPoints; ++q) {
      const PointFields fn = evaluate(table.at[q], ln);
      const PointFields fp = evaluate(table.at[q], lp);
      const double wq = table.weight[q] * dt;
      const Eigen::Matrix2d rate =
          membrane_strain_rate((fn.grad_u - fp.grad_u) / dt, fn.grad_v, (fn.grad_v - fp.grad_v) / dt);
      const Eigen::Matrix2d curv_rate = (fn.hess_v - fp.hess_v) / dt;
      w.visc_diss += wq * dissipation_density(mat.c_visc.voigt(), rate, curv_rate);
      if (thermal) w.cpl_work += wq * fn.mu * b_stress.dot(strain_to_voigt<2>(rate));
      const Eigen::Vector2d x = origin + table.offset[q];
      w.ext_work += wq * loads.f2d(x(0), x(1), next.t) * (fn.v - fp.v) / dt;
    }
  }
  return w;
}

struct LedgerRow {
  double t = 0.0;
  double elastic = 0.0;
  double visc_diss = 0.0;  ///< increments of the step ending at t
  double cpl_work = 0.0;
  double ext_work = 0.0;
  double visc_diss_cum = 0.0;
  double cpl_work_cum = 0.0;
  double ext_work_cum = 0.0;
  double balance_residual = 0.0;
  double normalized_residual = 0.0;
  double min_mu = 0.0;
};

/// One row per snapshot; row 0 is the initial state.
using EnergyLedger = std::vector<LedgerRow>;

/// residual_n = phi(t_n) - phi(0) + sum(diss + cpl - ext) over steps k < n.
/// The normalized column divides by max(1, phi(0) + total external work).
inline EnergyLedger balance_residual(const PlateMesh& mesh, std::span<const PlateState> states,
                                     const MaterialSet& mat, const Loads& loads) {
  EnergyLedger ledger;
  if (states.empty()) return ledger;
  ledger.reserve(states.size());
  LedgerRow row;
  row.t = states[0].t;
  row.elastic = elastic_energy(mesh, states[0], mat);
  row.min_mu = states[0].mu.size() ? states[0].mu.minCoeff() : 0.0;
  const double phi0 = row.elastic;
  ledger.push_back(row);
  for (std::size_t n = 1; n < states.size(); ++n) {
    const StepWork w = step_work(mesh, states[n - 1], states[n], mat, loads);
    LedgerRow r;
    r.t = states[n].t;
    r.elastic = elastic_energy(mesh, states[n], mat);
    r.visc_diss = w.visc_diss;
    r.cpl_work = w.cpl_work;
    r.ext_work = w.ext_work;
    r.visc_diss_cum = ledger.back().visc_diss_cum + w.visc_diss;
    r.cpl_work_cum = ledger.back().cpl_work_cum + w.cpl_work;
    r.ext_work_cum = ledger.back().ext_work_cum + w.ext_work;
    r.balance_residual = (r.elastic - phi0) + r.visc_diss_cum + r.cpl_work_cum - r.ext_work_cum;
    r.min_mu = states[n].mu.size() ? states[n].mu.minCoeff() : 0.0;
    ledger.push_back(r);
  }
  const double scale = std::max(1.0, phi0 + ledger.back().ext_work_cum);
  for (auto& r : ledger) r.normalized_residual = r.balance_residual / scale;
  return ledger;
}

}  // namespace vkplate
