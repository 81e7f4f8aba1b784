#pragma once

#include <random>

#include "vkplate/assembly.hpp"
#include "vkplate/constitutive.hpp"
#include "vkplate/grid.hpp"

namespace testing_support {

using namespace vkplate;

/// Q(A) = |A|^2 on symmetric 2x2 matrices.
inline SymTensor2D identity_form2() {
  return SymTensor2D::from_voigt(Eigen::Vector3d(1.0, 1.0, 0.5).asDiagonal().toDenseMatrix());
}

inline MaterialSet plate_material(double alpha, double visc = 0.1, double kappa = 0.0,
                                  const Eigen::Matrix3d& b_full = Eigen::Matrix3d::Zero()) {
  return make_material_set(make_isotropic_c3(1.0, 0.0), make_isotropic_c3(visc, 0.0), b_full, 1.0,
                           Eigen::Matrix3d::Identity(), kappa, alpha);
}

/// Anisotropic but still well-conditioned reduced set.
inline MaterialSet general_material(double alpha, double kappa, const Eigen::Matrix3d& b_full) {
  Eigen::Matrix3d cel, cr;
  cel << 2.0, 0.4, 0.1, 0.4, 1.5, -0.2, 0.1, -0.2, 0.8;
  cr << 0.3, 0.05, 0.0, 0.05, 0.2, 0.02, 0.0, 0.02, 0.1;
  Eigen::Matrix2d k;
  k << 1.2, 0.3, 0.3, 0.9;
  return make_material_set_2d(SymTensor2D::from_voigt(cel), SymTensor2D::from_voigt(cr), b_full, 1.3, k, kappa,
                              alpha);
}

/// Random state honoring the clamped dofs.
inline PlateState random_state(const PlateMesh& mesh, std::mt19937_64& rng, double amp, double t = 0.0) {
  std::normal_distribution<double> n(0.0, amp);
  PlateState s = PlateState::zero(mesh, t);
  for (int i = 0; i < s.u.size(); ++i) s.u(i) = n(rng);
  for (int i = 0; i < s.v.size(); ++i) s.v(i) = n(rng);
  for (int i = 0; i < s.mu.size(); ++i) s.mu(i) = 1.0 + n(rng);
  const DofLayout& d = mesh.dofs;
  for (int m = 0; m < d.num_mech(); ++m) {
    if (!d.mech_constrained[m]) continue;
    if (m < d.num_u()) {
      s.u(m) = 0.0;
    } else {
      s.v(m - d.num_u()) = 0.0;
    }
  }
  return s;
}

struct JacobianCheck {
  double max_rel_column_error = 0.0;
  int worst_column = -1;
};

/// Consistent tangent against central differences of the residual, column by
/// column; error relative to the column norm.
inline JacobianCheck check_jacobian(const PlateMesh& mesh, const PlateState& prev, const PlateState& guess,
                                    double dt, const MaterialSet& mat, const Loads& loads, double eps = 1e-6) {
  const AssembledMech sys = assemble_mech(mesh, prev, guess, dt, mat, loads, true);
  const Eigen::MatrixXd jac(sys.jacobian);
  const Eigen::VectorXd x0 = free_part(mesh.dofs, mech_vector(guess));
  JacobianCheck out;
  for (int j = 0; j < x0.size(); ++j) {
    PlateState p = guess, m = guess;
    Eigen::VectorXd xp = x0, xm = x0;
    xp(j) += eps;
    xm(j) -= eps;
    set_free_part(mesh.dofs, xp, p);
    set_free_part(mesh.dofs, xm, m);
    const Eigen::VectorXd rp = assemble_mech(mesh, prev, p, dt, mat, loads, false).residual;
    const Eigen::VectorXd rm = assemble_mech(mesh, prev, m, dt, mat, loads, false).residual;
    const Eigen::VectorXd fd = (rp - rm) / (2 * eps);
    const double err = (jac.col(j) - fd).norm() / std::max(fd.norm(), 1e-12);
    if (err > out.max_rel_column_error) {
      out.max_rel_column_error = err;
      out.worst_column = j;
    }
  }
  return out;
}

}  // namespace testing_support
