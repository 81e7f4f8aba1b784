#pragma once

// Pointwise kinematics of the plate and assembly of the time-discrete weak
// equations: the Newton residual/tangent of the mechanical step and the
// implicit-Euler linear system of the heat equation.

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "vkplate/basis.hpp"
#include "vkplate/constitutive.hpp"
#include "vkplate/errors.hpp"
#include "vkplate/grid.hpp"
#include "vkplate/linalg.hpp"
#include "vkplate/parallel.hpp"

namespace vkplate {

using ScalarField = std::function<double(double x1, double x2, double t)>;
using VectorField = std::function<Eigen::Vector2d(double x1, double x2, double t)>;

inline ScalarField constant_field(double c) {
  return [c](double, double, double) { return c; };
}

struct Loads {
  ScalarField f2d = constant_field(0.0);     ///< transverse force density
  ScalarField mu_flat = constant_field(0.0); ///< external temperature on the boundary
  /// Body force in the in-plane equation. Only for manufactured solutions.
  std::optional<VectorField> gu_test;
};

/// Discrete (u, v, mu) at time t. u: 2 per node, v: 4 per node
/// (value, d1, d2, d12), mu: 1 per node.
struct PlateState {
  double t = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  Eigen::VectorXd mu;

  static PlateState zero(const PlateMesh& mesh, double t = 0.0) {
    PlateState s;
    s.t = t;
    s.u = Eigen::VectorXd::Zero(mesh.dofs.num_u());
    s.v = Eigen::VectorXd::Zero(mesh.dofs.num_v());
    s.mu = Eigen::VectorXd::Zero(mesh.dofs.num_mu());
    return s;
  }

  bool conforms_to(const PlateMesh& mesh) const {
    return u.size() == mesh.dofs.num_u() && v.size() == mesh.dofs.num_v() &&
           mu.size() == mesh.dofs.num_mu();
  }
};

/// Backward-difference rates of the mechanical fields.
struct Rates {
  Eigen::VectorXd du;
  Eigen::VectorXd dv;
};

inline Rates rates_between(const PlateState& prev, const PlateState& next, double dt) {
  return {(next.u - prev.u) / dt, (next.v - prev.v) / dt};
}

/// E = sym(grad u) + 1/2 grad v (x) grad v.
inline Eigen::Matrix2d membrane_strain(const Eigen::Matrix2d& grad_u, const Eigen::Vector2d& grad_v) {
  return 0.5 * (grad_u + grad_u.transpose()) + 0.5 * grad_v * grad_v.transpose();
}

/// dE/dt = sym(grad du) + grad dv (.) grad v, with a (.) b = (a(x)b + b(x)a)/2.
inline Eigen::Matrix2d membrane_strain_rate(const Eigen::Matrix2d& grad_du, const Eigen::Vector2d& grad_v,
                                            const Eigen::Vector2d& grad_dv) {
  const Eigen::Matrix2d cross = grad_dv * grad_v.transpose();
  return 0.5 * (grad_du + grad_du.transpose()) + 0.5 * (cross + cross.transpose());
}

/// Field values at one point of an element.
struct PointFields {
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  Eigen::Matrix2d grad_u = Eigen::Matrix2d::Zero();  ///< (i, j) = d_j u_i
  double v = 0.0;
  Eigen::Vector2d grad_v = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hess_v = Eigen::Matrix2d::Zero();
  double mu = 0.0;
};

/// Element-local copies of the dof vectors.
struct LocalDofs {
  std::array<double, 8> u{};
  std::array<double, 16> v{};
  std::array<double, 4> mu{};
};

inline LocalDofs gather(const PlateMesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                        const Eigen::VectorXd& mu, int e) {
  LocalDofs l;
  const auto nodes = mesh.grid.element_nodes(e);
  for (int a = 0; a < 4; ++a) {
    for (int c = 0; c < 2; ++c) l.u[2 * a + c] = u(DofLayout::u_dof(nodes[a], c));
    for (int k = 0; k < 4; ++k) l.v[4 * a + k] = v(DofLayout::v_dof(nodes[a], k));
    if (mu.size() > 0) l.mu[a] = mu(nodes[a]);
  }
  return l;
}

inline PointFields evaluate(const PlateBasisPoint& b, const LocalDofs& l) {
  PointFields f;
  for (int a = 0; a < 4; ++a) {
    for (int c = 0; c < 2; ++c) {
      f.u(c) += l.u[2 * a + c] * b.q1[a];
      f.grad_u.row(c) += l.u[2 * a + c] * b.q1_grad[a].transpose();
    }
    f.mu += l.mu[a] * b.q1[a];
  }
  for (int i = 0; i < 16; ++i) {
    f.v += l.v[i] * b.bfs[i];
    f.grad_v += l.v[i] * b.bfs_grad[i];
    f.hess_v += l.v[i] * b.bfs_hess[i];
  }
  return f;
}

/// Fields of a state at an arbitrary physical point (x1, x2) of the plate.
inline PointFields evaluate_at(const PlateMesh& mesh, const PlateState& s, double x1, double x2) {
  const Grid2D& g = mesh.grid;
  const int i = std::clamp(static_cast<int>(x1 / g.hx()), 0, g.nx - 1);
  const int j = std::clamp(static_cast<int>(x2 / g.hy()), 0, g.ny - 1);
  const int e = j * g.nx + i;
  const double sx = x1 / g.hx() - i;
  const double sy = x2 / g.hy() - j;
  return evaluate(PlateBasisPoint::evaluate(sx, sy, g.hx(), g.hy()), gather(mesh, s.u, s.v, s.mu, e));
}

/// Mechanical dofs of a state as one vector [u | v].
inline Eigen::VectorXd mech_vector(const PlateState& s) {
  Eigen::VectorXd x(s.u.size() + s.v.size());
  x << s.u, s.v;
  return x;
}

inline Eigen::VectorXd free_part(const DofLayout& d, const Eigen::VectorXd& mech) {
  Eigen::VectorXd x(d.num_free());
  for (int i = 0; i < d.num_free(); ++i) x(i) = mech(d.free_to_mech[i]);
  return x;
}

/// Writes free dofs into a state; constrained dofs are left untouched.
inline void set_free_part(const DofLayout& d, const Eigen::VectorXd& free, PlateState& s) {
  for (int i = 0; i < d.num_free(); ++i) {
    const int m = d.free_to_mech[i];
    if (m < d.num_u()) {
      s.u(m) = free(i);
    } else {
      s.v(m - d.num_u()) = free(i);
    }
  }
}

struct AssembledMech {
  Eigen::VectorXd residual;  ///< over free (u, v) dofs
  SparseMatrix jacobian;     ///< empty unless requested
};

namespace detail {

constexpr int kMechLocal = 24;  // 8 u dofs then 16 v dofs
using MechVec = Eigen::Matrix<double, kMechLocal, 1>;
using MechMat = Eigen::Matrix<double, kMechLocal, kMechLocal>;
using MechStrainMat = Eigen::Matrix<double, 3, kMechLocal>;

struct MechElement {
  MechVec residual;
  MechMat jacobian;
};

inline Eigen::Vector3d sym_voigt(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  // Engineering Voigt of sym(a (x) b).
  return {a(0) * b(0), a(1) * b(1), a(0) * b(1) + a(1) * b(0)};
}

inline MechElement mech_element(const PlateMesh& mesh, const PlateElementTable& table,
                                const PlateState& prev, const PlateState& guess, double dt,
                                const MaterialSet& mat, const Loads& loads, int e, bool want_jac) {
  const LocalDofs now = gather(mesh, guess.u, guess.v, guess.mu, e);
  const LocalDofs old = gather(mesh, prev.u, prev.v, prev.mu, e);
  const Eigen::Matrix3d& cel = mat.c_el.voigt();
  const Eigen::Matrix3d& cr = mat.c_visc.voigt();
  const bool thermal = mat.has_thermal_stress();
  const Eigen::Vector3d b_stress(mat.b_thermal(0, 0), mat.b_thermal(1, 1), mat.b_thermal(0, 1));
  const Eigen::Matrix3d bend_tangent = cel + cr / dt;
  const Eigen::Vector2d origin = mesh.grid.element_origin(e);
  const double t = guess.t;

  MechElement out;
  out.residual.setZero();
  if (want_jac) out.jacobian.setZero();

  for (int q = 0; q < PlateElementTable::kPoints; ++q) {
    const PlateBasisPoint& b = table.at[q];
    const double w = table.weight[q];
    const PointFields f = evaluate(b, now);
    const PointFields fp = evaluate(b, old);
    const Eigen::Matrix2d d_grad_u = (f.grad_u - fp.grad_u) / dt;
    const Eigen::Vector2d dg = (f.grad_v - fp.grad_v) / dt;
    const Eigen::Matrix2d dh = (f.hess_v - fp.hess_v) / dt;

    const Eigen::Vector3d strain = strain_to_voigt<2>(membrane_strain(f.grad_u, f.grad_v));
    const Eigen::Vector3d strain_rate =
        strain_to_voigt<2>(membrane_strain_rate(d_grad_u, f.grad_v, dg));
    Eigen::Vector3d sigma = cel * strain + cr * strain_rate;
    if (thermal) sigma += f.mu * b_stress;
    const Eigen::Vector3d moment = cel * strain_to_voigt<2>(f.hess_v) + cr * strain_to_voigt<2>(dh);

    // Strain variations per local dof.
    MechStrainMat d_strain = MechStrainMat::Zero();
    MechStrainMat d_rate = MechStrainMat::Zero();
    MechStrainMat d_curv = MechStrainMat::Zero();
    for (int a = 0; a < 4; ++a) {
      const Eigen::Vector2d& gn = b.q1_grad[a];
      d_strain.col(2 * a) = Eigen::Vector3d(gn(0), 0.0, gn(1));
      d_strain.col(2 * a + 1) = Eigen::Vector3d(0.0, gn(1), gn(0));
    }
    d_rate.leftCols<8>() = d_strain.leftCols<8>() / dt;
    for (int i = 0; i < 16; ++i) {
      const Eigen::Vector2d& gb = b.bfs_grad[i];
      const Eigen::Matrix2d& hb = b.bfs_hess[i];
      d_strain.col(8 + i) = sym_voigt(f.grad_v, gb);
      d_rate.col(8 + i) = d_strain.col(8 + i) / dt + sym_voigt(dg, gb);
      d_curv.col(8 + i) = Eigen::Vector3d(hb(0, 0), hb(1, 1), 2.0 * hb(0, 1));
    }

    const Eigen::Vector2d x = origin + table.offset[q];
    MechVec load = MechVec::Zero();
    if (loads.gu_test) {
      const Eigen::Vector2d gu = (*loads.gu_test)(x(0), x(1), t);
      for (int a = 0; a < 4; ++a) {
        load(2 * a) = gu(0) * b.q1[a];
        load(2 * a + 1) = gu(1) * b.q1[a];
      }
    }
    const double fz = loads.f2d(x(0), x(1), t);
    for (int i = 0; i < 16; ++i) load(8 + i) = fz * b.bfs[i];

    out.residual.noalias() +=
        w * (d_strain.transpose() * sigma + (1.0 / 12.0) * d_curv.transpose() * moment - load);

    if (want_jac) {
      const MechStrainMat d_sigma = cel * d_strain + cr * d_rate;
      out.jacobian.noalias() += w * (d_strain.transpose() * d_sigma +
                                     (1.0 / 12.0) * d_curv.transpose() * bend_tangent * d_curv);
      const Eigen::Matrix2d s = stress_from_voigt<2>(sigma);
      for (int i = 0; i < 16; ++i) {
        const Eigen::Vector2d sg = s * b.bfs_grad[i];
        for (int j = 0; j < 16; ++j) out.jacobian(8 + i, 8 + j) += w * sg.dot(b.bfs_grad[j]);
      }
    }
  }
  return out;
}

inline std::array<int, kMechLocal> mech_local_to_global(const PlateMesh& mesh, int e) {
  std::array<int, kMechLocal> map{};
  const auto nodes = mesh.grid.element_nodes(e);
  for (int a = 0; a < 4; ++a) {
    for (int c = 0; c < 2; ++c) map[2 * a + c] = mesh.dofs.mech_u(nodes[a], c);
    for (int k = 0; k < 4; ++k) map[8 + 4 * a + k] = mesh.dofs.mech_v(nodes[a], k);
  }
  return map;
}

}  // namespace detail

/// Residual (and consistent tangent) of the backward-Euler mechanical step
/// from `prev` to `guess`. The temperature in the thermal-stress term is
/// guess.mu; loads are evaluated at guess.t.
inline AssembledMech assemble_mech(const PlateMesh& mesh, const PlateState& prev, const PlateState& guess,
                                   double dt, const MaterialSet& mat, const Loads& loads,
                                   bool want_jacobian = true) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  if (!prev.conforms_to(mesh) || !guess.conforms_to(mesh)) {
    throw ValidationError("state does not match the mesh");
  }
  const PlateElementTable table(mesh.grid);
  const int ne = mesh.grid.num_elements();
  std::vector<detail::MechElement> elems(ne);
  parallel_for(ne, [&](int e) {
    elems[e] = detail::mech_element(mesh, table, prev, guess, dt, mat, loads, e, want_jacobian);
  });

  const DofLayout& d = mesh.dofs;
  AssembledMech out;
  out.residual = Eigen::VectorXd::Zero(d.num_free());
  std::vector<Eigen::Triplet<double>> trip;
  if (want_jacobian) trip.reserve(static_cast<std::size_t>(ne) * detail::kMechLocal * detail::kMechLocal);
  for (int e = 0; e < ne; ++e) {
    const auto map = detail::mech_local_to_global(mesh, e);
    for (int i = 0; i < detail::kMechLocal; ++i) {
      const int fi = d.mech_to_free[map[i]];
      if (fi < 0) continue;
      out.residual(fi) += elems[e].residual(i);
      if (!want_jacobian) continue;
      for (int j = 0; j < detail::kMechLocal; ++j) {
        const int fj = d.mech_to_free[map[j]];
        if (fj >= 0) trip.emplace_back(fi, fj, elems[e].jacobian(i, j));
      }
    }
  }
  if (want_jacobian) {
    out.jacobian.resize(d.num_free(), d.num_free());
    out.jacobian.setFromTriplets(trip.begin(), trip.end());
  }
  return out;
}

/// C:A:A for the in-plane rate plus 1/12 C:H:H for the curvature rate.
inline double dissipation_density(const Eigen::Matrix3d& c_voigt, const Eigen::Matrix2d& strain_rate,
                                  const Eigen::Matrix2d& curvature_rate) {
  const Eigen::Vector3d e = strain_to_voigt<2>(strain_rate);
  const Eigen::Vector3d k = strain_to_voigt<2>(curvature_rate);
  return e.dot(c_voigt * e) + (1.0 / 12.0) * k.dot(c_voigt * k);
}

struct HeatSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  Eigen::VectorXd source;  ///< dissipation source s, already included in rhs
};

/// Implicit-Euler system for mu at prev.t + dt:
/// (cv/dt M + K + kappa M_G) mu = cv/dt M mu_prev + kappa b_G(mu_flat) + s,
/// where s uses the mechanical rates and v at prev.t + dt = prev.v + dt * dv.
inline HeatSystem assemble_heat(const PlateMesh& mesh, const PlateState& prev, const Rates& rates,
                                double dt, const MaterialSet& mat, const Loads& loads) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  const Grid2D& g = mesh.grid;
  const int nn = g.num_nodes();
  const int ne = g.num_elements();
  const PlateElementTable table(g);
  const double t = prev.t + dt;
  const bool with_source = mat.has_heat_source();
  const Eigen::VectorXd v_new = with_source ? Eigen::VectorXd(prev.v + dt * rates.dv) : Eigen::VectorXd();
  const Eigen::VectorXd empty;

  struct HeatElement {
    Eigen::Matrix4d mass;
    Eigen::Matrix4d stiff;
    Eigen::Vector4d source;
  };
  std::vector<HeatElement> elems(ne);
  parallel_for(ne, [&](int e) {
    HeatElement& he = elems[e];
    he.mass.setZero();
    he.stiff.setZero();
    he.source.setZero();
    LocalDofs rate_l, vnew_l;
    if (with_source) {
      rate_l = gather(mesh, rates.du, rates.dv, empty, e);
      vnew_l = gather(mesh, Eigen::VectorXd::Zero(mesh.dofs.num_u()), v_new, empty, e);
    }
    for (int q = 0; q < PlateElementTable::kPoints; ++q) {
      const PlateBasisPoint& b = table.at[q];
      const double w = table.weight[q];
      for (int a = 0; a < 4; ++a) {
        for (int c = 0; c < 4; ++c) {
          he.mass(a, c) += w * b.q1[a] * b.q1[c];
          he.stiff(a, c) += w * b.q1_grad[a].dot(mat.k_tilde * b.q1_grad[c]);
        }
      }
      if (with_source) {
        const PointFields r = evaluate(b, rate_l);
        const PointFields vn = evaluate(b, vnew_l);
        const double dens = dissipation_density(mat.c_visc_alpha.voigt(),
                                                membrane_strain_rate(r.grad_u, vn.grad_v, r.grad_v),
                                                r.hess_v);
        for (int a = 0; a < 4; ++a) he.source(a) += w * dens * b.q1[a];
      }
    }
  });

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(ne) * 16 + 8 * (g.nx + g.ny));
  HeatSystem out;
  out.rhs = Eigen::VectorXd::Zero(nn);
  out.source = Eigen::VectorXd::Zero(nn);
  Eigen::VectorXd mass_mu = Eigen::VectorXd::Zero(nn);
  const double cdt = mat.cv_bar / dt;
  for (int e = 0; e < ne; ++e) {
    const auto nodes = g.element_nodes(e);
    for (int a = 0; a < 4; ++a) {
      for (int c = 0; c < 4; ++c) {
        trip.emplace_back(nodes[a], nodes[c], cdt * elems[e].mass(a, c) + elems[e].stiff(a, c));
        mass_mu(nodes[a]) += elems[e].mass(a, c) * prev.mu(nodes[c]);
      }
      out.source(nodes[a]) += elems[e].source(a);
    }
  }

  // Robin terms on every boundary segment, 4-point Gauss along the edge.
  if (mat.kappa > 0.0) {
    const auto pts = GaussLegendre<4>::points();
    const auto wts = GaussLegendre<4>::weights();
    auto segment = [&](int n0, int n1) {
      const Eigen::Vector2d x0 = g.node_xy(n0);
      const Eigen::Vector2d x1 = g.node_xy(n1);
      const double len = (x1 - x0).norm();
      Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
      Eigen::Vector2d l = Eigen::Vector2d::Zero();
      for (int q = 0; q < 4; ++q) {
        const double s = 0.5 * (pts[q] + 1.0);
        const double w = 0.5 * wts[q] * len;
        const Eigen::Vector2d phi(1.0 - s, s);
        const Eigen::Vector2d x = (1.0 - s) * x0 + s * x1;
        const double flat = loads.mu_flat(x(0), x(1), t);
        m += w * phi * phi.transpose();
        l += w * flat * phi;
      }
      const std::array<int, 2> ids{n0, n1};
      for (int a = 0; a < 2; ++a) {
        for (int c = 0; c < 2; ++c) trip.emplace_back(ids[a], ids[c], mat.kappa * m(a, c));
        out.rhs(ids[a]) += mat.kappa * l(a);
      }
    };
    for (int i = 0; i < g.nx; ++i) {
      segment(g.node(i, 0), g.node(i + 1, 0));
      segment(g.node(i, g.ny), g.node(i + 1, g.ny));
    }
    for (int j = 0; j < g.ny; ++j) {
      segment(g.node(0, j), g.node(0, j + 1));
      segment(g.node(g.nx, j), g.node(g.nx, j + 1));
    }
  }

  out.matrix.resize(nn, nn);
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  out.rhs += cdt * mass_mu + out.source;
  return out;
}

/// Integral of a nodal Q1 field over the plate.
inline double integrate_nodal(const PlateMesh& mesh, const Eigen::VectorXd& nodal) {
  const Grid2D& g = mesh.grid;
  // The integral of each Q1 hat is a quarter of the adjacent element area.
  const double quarter = 0.25 * g.hx() * g.hy();
  double sum = 0.0;
  for (int e = 0; e < g.num_elements(); ++e) {
    for (int n : g.element_nodes(e)) sum += quarter * nodal(n);
  }
  return sum;
}

}  // namespace vkplate
