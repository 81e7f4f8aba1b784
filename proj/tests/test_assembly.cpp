#include <cstdlib>
#include <random>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "vkplate/assembly.hpp"

using namespace vkplate;
using namespace testing_support;

TEST(Kinematics, MembraneStrain) {
  EXPECT_TRUE(membrane_strain(Eigen::Matrix2d::Zero(), Eigen::Vector2d::Zero()).isZero(0.0));
  Eigen::Matrix2d gu;
  gu << 1, 0, 0, 0;
  Eigen::Matrix2d e1;
  e1 << 1.5, 0, 0, 0;
  EXPECT_EQ(membrane_strain(gu, Eigen::Vector2d(1, 0)), e1);
  Eigen::Matrix2d e2;
  e2 << 2, 1, 1, 0.5;
  EXPECT_EQ(membrane_strain(Eigen::Matrix2d::Zero(), Eigen::Vector2d(2, 1)), e2);
  Eigen::Matrix2d skew;
  skew << 0, 3, -3, 0;
  EXPECT_TRUE(membrane_strain(skew, Eigen::Vector2d::Zero()).isZero(0.0));
}

TEST(Kinematics, MembraneStrainRate) {
  const Eigen::Matrix2d z = Eigen::Matrix2d::Zero();
  EXPECT_TRUE(membrane_strain_rate(z, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()).isZero(0.0));
  Eigen::Matrix2d r1;
  r1 << 0, 0.5, 0.5, 0;
  EXPECT_EQ(membrane_strain_rate(z, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)), r1);
  Eigen::Matrix2d r2;
  r2 << 1, 0, 0, 0;
  EXPECT_EQ(membrane_strain_rate(z, Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0)), r2);
}

TEST(Kinematics, RateIsDerivativeOfStrain) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  const Eigen::Matrix2d gu = Eigen::Matrix2d::NullaryExpr([&] { return n(rng); });
  const Eigen::Matrix2d dgu = Eigen::Matrix2d::NullaryExpr([&] { return n(rng); });
  const Eigen::Vector2d gv(n(rng), n(rng)), dgv(n(rng), n(rng));
  const double h = 1e-6;
  const Eigen::Matrix2d fd =
      (membrane_strain(gu + h * dgu, gv + h * dgv) - membrane_strain(gu - h * dgu, gv - h * dgv)) / (2 * h);
  EXPECT_TRUE(membrane_strain_rate(dgu, gv, dgv).isApprox(fd, 1e-8));
}

TEST(MechAssembly, ZeroStateZeroResidual) {
  const PlateMesh m = build_grid(3, 3, 1, 1, EdgeSet{Edge::left});
  const MaterialSet mat = plate_material(4.0);
  const PlateState z = PlateState::zero(m);
  const AssembledMech a = assemble_mech(m, z, z, 0.1, mat, Loads{});
  EXPECT_EQ(a.residual.size(), m.dofs.num_free());
  EXPECT_TRUE(a.residual.isZero(0.0));
}

TEST(MechAssembly, UnitLoadPartitionOfUnity) {
  const PlateMesh m = build_grid(4, 3, 2.0, 1.5, EdgeSet{Edge::left});
  const MaterialSet mat = plate_material(4.0);
  Loads loads;
  loads.f2d = constant_field(1.0);
  const PlateState z = PlateState::zero(m);
  const PlateElementTable table(m.grid);
  double total = 0.0;
  for (int e = 0; e < m.grid.num_elements(); ++e) {
    const detail::MechElement el = detail::mech_element(m, table, z, z, 0.1, mat, loads, e, false);
    for (int a = 0; a < 4; ++a) total += el.residual(8 + 4 * a);
    EXPECT_TRUE(el.residual.head<8>().isZero(0.0));
  }
  EXPECT_NEAR(total, -2.0 * 1.5, 1e-13);
}

TEST(MechAssembly, RejectsNonPositiveDt) {
  const PlateMesh m = build_grid(2, 2, 1, 1, EdgeSet{Edge::left});
  const PlateState z = PlateState::zero(m);
  EXPECT_THROW(assemble_mech(m, z, z, 0.0, plate_material(4.0), Loads{}), ValidationError);
  EXPECT_THROW(assemble_mech(m, z, z, -1.0, plate_material(4.0), Loads{}), ValidationError);
}

TEST(MechAssembly, JacobianMatchesCentralDifferences) {
  const PlateMesh m = build_grid(3, 3, 1, 1, EdgeSet{Edge::left});
  std::mt19937_64 rng(21);
  Eigen::Matrix3d b;
  b << 0.4, 0.1, 0.0, 0.1, 0.3, 0.0, 0.0, 0.0, 0.0;
  Loads loads;
  loads.f2d = [](double x, double y, double t) { return 0.3 + x * y + t; };
  loads.gu_test = [](double x, double y, double) { return Eigen::Vector2d(x - y, 0.5 * x * y); };
  for (double alpha : {2.0, 3.0, 4.0}) {
    const MaterialSet mat = general_material(alpha, 0.5, b);
    for (int k = 0; k < 3; ++k) {
      const PlateState prev = random_state(m, rng, 0.05, 0.0);
      PlateState guess = random_state(m, rng, 0.05, 0.1);
      const JacobianCheck c = check_jacobian(m, prev, guess, 0.1, mat, loads);
      EXPECT_LE(c.max_rel_column_error, 1e-5) << "alpha " << alpha << " column " << c.worst_column;
    }
  }
}

TEST(MechAssembly, RigidInPlaneMotionHasZeroInPlaneResidual) {
  const PlateMesh m = build_grid(4, 4, 1, 1, EdgeSet{Edge::left});
  PlateState s = PlateState::zero(m);
  for (int n = 0; n < m.grid.num_nodes(); ++n) {
    const Eigen::Vector2d x = m.grid.node_xy(n);
    s.u(DofLayout::u_dof(n, 0)) = 0.2 - 0.3 * x(1);
    s.u(DofLayout::u_dof(n, 1)) = -0.1 + 0.3 * x(0);
  }
  const AssembledMech a = assemble_mech(m, s, s, 0.1, plate_material(3.0), Loads{});
  EXPECT_LE(a.residual.cwiseAbs().maxCoeff(), 1e-14);
}

namespace {

// Reflection x1 <-> x2 on a square grid.
int mirror_node(const Grid2D& g, int n) { return g.node(g.node_j(n), g.node_i(n)); }

Eigen::VectorXd mirror_mech(const PlateMesh& m, const Eigen::VectorXd& x) {
  const DofLayout& d = m.dofs;
  Eigen::VectorXd y(x.size());
  for (int n = 0; n < d.num_nodes; ++n) {
    const int r = mirror_node(m.grid, n);
    y(d.mech_u(r, 0)) = x(d.mech_u(n, 1));
    y(d.mech_u(r, 1)) = x(d.mech_u(n, 0));
    y(d.mech_v(r, 0)) = x(d.mech_v(n, 0));
    y(d.mech_v(r, 1)) = x(d.mech_v(n, 2));
    y(d.mech_v(r, 2)) = x(d.mech_v(n, 1));
    y(d.mech_v(r, 3)) = x(d.mech_v(n, 3));
  }
  return y;
}

PlateState mirror_state(const PlateMesh& m, const PlateState& s) {
  PlateState r = s;
  const Eigen::VectorXd x = mirror_mech(m, mech_vector(s));
  r.u = x.head(s.u.size());
  r.v = x.tail(s.v.size());
  for (int n = 0; n < m.dofs.num_nodes; ++n) r.mu(mirror_node(m.grid, n)) = s.mu(n);
  return r;
}

Eigen::VectorXd full_residual(const PlateMesh& m, const Eigen::VectorXd& free) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(m.dofs.num_mech());
  for (int i = 0; i < m.dofs.num_free(); ++i) full(m.dofs.free_to_mech[i]) = free(i);
  return full;
}

}  // namespace

TEST(MechAssembly, ReflectionSymmetry) {
  const PlateMesh m = build_grid(4, 4, 1, 1, EdgeSet{Edge::left, Edge::bottom});
  Eigen::Matrix3d b = Eigen::Vector3d(0.5, 0.5, 0).asDiagonal();
  const MaterialSet mat = make_material_set(make_isotropic_c3(1.0, 0.3), make_isotropic_c3(0.2, 0.1), b, 1.0,
                                            Eigen::Matrix3d::Identity(), 0.0, 2.0);
  Loads loads;
  loads.f2d = [](double x, double y, double) { return 0.2 + x * x + 0.5 * y; };
  Loads mirrored;
  mirrored.f2d = [](double x, double y, double) { return 0.2 + y * y + 0.5 * x; };
  std::mt19937_64 rng(13);
  const PlateState prev = random_state(m, rng, 0.05, 0.0);
  const PlateState guess = random_state(m, rng, 0.05, 0.1);
  const Eigen::VectorXd r = full_residual(m, assemble_mech(m, prev, guess, 0.1, mat, loads, false).residual);
  const Eigen::VectorXd rm =
      full_residual(m, assemble_mech(m, mirror_state(m, prev), mirror_state(m, guess), 0.1, mat, mirrored, false)
                           .residual);
  EXPECT_LE((mirror_mech(m, r) - rm).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MechAssembly, ThreadCountDoesNotChangeResult) {
  const PlateMesh m = build_grid(6, 5, 1, 1, EdgeSet{Edge::left});
  std::mt19937_64 rng(8);
  const PlateState prev = random_state(m, rng, 0.05, 0.0);
  const PlateState guess = random_state(m, rng, 0.05, 0.1);
  const MaterialSet mat = general_material(2.0, 0.3, Eigen::Vector3d(0.3, 0.2, 0).asDiagonal());
  Loads loads;
  loads.f2d = constant_field(0.7);
  ::setenv("VKPLATE_THREADS", "1", 1);
  const AssembledMech a = assemble_mech(m, prev, guess, 0.1, mat, loads);
  ::setenv("VKPLATE_THREADS", "4", 1);
  const AssembledMech b = assemble_mech(m, prev, guess, 0.1, mat, loads);
  ::unsetenv("VKPLATE_THREADS");
  EXPECT_TRUE(a.residual == b.residual);
  EXPECT_TRUE(Eigen::MatrixXd(a.jacobian) == Eigen::MatrixXd(b.jacobian));
}

TEST(HeatAssembly, ZeroDataZeroSystem) {
  const PlateMesh m = build_grid(3, 3, 1, 1, EdgeSet{Edge::left});
  const MaterialSet mat = plate_material(4.0, 0.1, 1.0);
  const PlateState z = PlateState::zero(m);
  const Rates r{Eigen::VectorXd::Zero(m.dofs.num_u()), Eigen::VectorXd::Zero(m.dofs.num_v())};
  const HeatSystem h = assemble_heat(m, z, r, 0.1, mat, Loads{});
  EXPECT_TRUE(h.rhs.isZero(0.0));
  EXPECT_TRUE(solve_spd(h.matrix, h.rhs).isZero(0.0));
  EXPECT_THROW(assemble_heat(m, z, r, 0.0, mat, Loads{}), ValidationError);
}

TEST(HeatAssembly, NoSourceBelowAlphaFour) {
  const PlateMesh m = build_grid(3, 3, 1, 1, EdgeSet{Edge::left});
  std::mt19937_64 rng(3);
  const PlateState s = random_state(m, rng, 0.1);
  const Rates r{random_state(m, rng, 1.0).u, random_state(m, rng, 1.0).v};
  for (double alpha : {2.0, 3.0, 3.9}) {
    const HeatSystem h = assemble_heat(m, s, r, 0.1, plate_material(alpha), Loads{});
    EXPECT_TRUE(h.source.isZero(0.0));
  }
  EXPECT_GT(assemble_heat(m, s, r, 0.1, plate_material(4.0), Loads{}).source.sum(), 0.0);
}

TEST(HeatAssembly, UniformRateSourceTotal) {
  const double lx = 2.0, ly = 1.5;
  const PlateMesh m = build_grid(4, 3, lx, ly, EdgeSet{Edge::left});
  const MaterialSet mat = make_material_set_2d(identity_form2(), identity_form2(), Eigen::Matrix3d::Zero(), 1.0,
                                               Eigen::Matrix2d::Identity(), 0.0, 4.0);
  const PlateState s = PlateState::zero(m);
  Rates r{Eigen::VectorXd::Zero(m.dofs.num_u()), Eigen::VectorXd::Zero(m.dofs.num_v())};
  for (int n = 0; n < m.grid.num_nodes(); ++n) {
    const Eigen::Vector2d x = m.grid.node_xy(n);
    r.du(DofLayout::u_dof(n, 0)) = x(0);
    r.du(DofLayout::u_dof(n, 1)) = x(1);
  }
  for (double dt : {0.1, 0.01}) {
    const HeatSystem h = assemble_heat(m, s, r, dt, mat, Loads{});
    EXPECT_NEAR(h.source.sum(), 2.0 * lx * ly, 1e-12);
  }
}

TEST(HeatAssembly, MatrixIsSpd) {
  const PlateMesh m = build_grid(4, 3, 1, 1, EdgeSet{Edge::left});
  const PlateState z = PlateState::zero(m);
  const Rates r{Eigen::VectorXd::Zero(m.dofs.num_u()), Eigen::VectorXd::Zero(m.dofs.num_v())};
  for (double kappa : {0.0, 2.0}) {
    const HeatSystem h = assemble_heat(m, z, r, 0.05, general_material(3.0, kappa, Eigen::Matrix3d::Zero()), Loads{});
    const Eigen::MatrixXd a(h.matrix);
    EXPECT_LE((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(HeatAssembly, SourceNonnegativeForRandomRates) {
  const PlateMesh m = build_grid(4, 4, 1, 1, EdgeSet{Edge::left});
  const MaterialSet mat = general_material(4.0, 0.0, Eigen::Matrix3d::Zero());
  std::mt19937_64 rng(31);
  for (int k = 0; k < 20; ++k) {
    const PlateState s = random_state(m, rng, 0.2);
    const Rates r{random_state(m, rng, 1.0).u, random_state(m, rng, 1.0).v};
    const HeatSystem h = assemble_heat(m, s, r, 0.1, mat, Loads{});
    EXPECT_GE(h.source.minCoeff(), 0.0);
  }
}

TEST(HeatAssembly, RobinLoadIntegratesBoundaryData) {
  // With mu_flat = 1 the Robin load sums to kappa * perimeter.
  const PlateMesh m = build_grid(3, 5, 2.0, 1.0, EdgeSet{Edge::left});
  const MaterialSet mat = plate_material(3.0, 0.1, 0.7);
  const PlateState z = PlateState::zero(m);
  const Rates r{Eigen::VectorXd::Zero(m.dofs.num_u()), Eigen::VectorXd::Zero(m.dofs.num_v())};
  Loads loads;
  loads.mu_flat = constant_field(1.0);
  const HeatSystem h = assemble_heat(m, z, r, 0.1, mat, loads);
  EXPECT_NEAR(h.rhs.sum(), 0.7 * 6.0, 1e-13);
}

TEST(Integration, NodalIntegral) {
  const PlateMesh m = build_grid(3, 4, 1.5, 2.0, EdgeSet{Edge::left});
  Eigen::VectorXd f(m.grid.num_nodes());
  for (int n = 0; n < f.size(); ++n) {
    const Eigen::Vector2d x = m.grid.node_xy(n);
    f(n) = 1.0 + 2.0 * x(0) - x(1) + 0.5 * x(0) * x(1);
  }
  // Exact integral of the bilinear function over (0,1.5) x (0,2).
  const double exact = 3.0 + 2.0 * 2.25 - 1.5 * 2.0 + 0.5 * 1.125 * 2.0;
  EXPECT_NEAR(integrate_nodal(m, f), exact, 1e-13);
}
