#pragma once

#include <sstream>

#include <algorithm>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "vkplate/errors.hpp"

namespace vkplate {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class LinearSolver { direct, cg };

/// General sparse solve (nonsymmetric Newton tangent).
inline Eigen::VectorXd solve_general(const SparseMatrix& a, const Eigen::VectorXd& b) {
  SparseMatrix m = a;
  m.makeCompressed();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) throw SolverError("singular tangent matrix: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw SolverError("sparse LU solve failed");
  return x;
}

/// SPD solve: sparse LDL^T, or diagonally preconditioned CG to 1e-12 relative.
inline Eigen::VectorXd solve_spd(const SparseMatrix& a, const Eigen::VectorXd& b,
                                 LinearSolver method = LinearSolver::direct) {
  if (method == LinearSolver::cg) {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(std::max<Eigen::Index>(1000, 10 * a.rows()));
    cg.compute(a);
    Eigen::VectorXd x = cg.solve(b);
    if (cg.info() != Eigen::Success) {
      std::ostringstream os;
      os << "CG did not converge (error " << cg.error() << " after " << cg.iterations() << " iterations)";
      throw SolverError(os.str());
    }
    return x;
  }
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SolverError("SPD factorization failed");
  Eigen::VectorXd x = ldlt.solve(b);
  if (!x.allFinite()) throw SolverError("SPD solve produced non-finite values");
  return x;
}

}  // namespace vkplate
