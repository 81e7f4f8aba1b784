#pragma once

// Numerical best constant of the generalized Korn inequality
//   ||grad u|| <= C(h) ||sym(grad z^T grad u)||,  u = 0 on the clamped face,
// on slabs (0,1)^2 x (-h/2, h/2), via the smallest eigenvalue of
//   A x = lambda B x,  A ~ int |sym(grad z^T grad u)|^2,  B ~ int |grad u|^2,
// so that C = 1/sqrt(lambda_min).

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "vkplate/basis.hpp"
#include "vkplate/errors.hpp"
#include "vkplate/grid.hpp"
#include "vkplate/linalg.hpp"
#include "vkplate/parallel.hpp"

namespace vkplate {

/// Trilinear hexahedral mesh of (0,1)^2 x (-h/2, h/2); nodes numbered with x
/// fastest, then y, then z. The clamped face is dirichlet_edges x (-h/2, h/2).
struct SlabMesh3D {
  double h = 0.1;
  int n = 8;
  int nz = 3;
  EdgeSet dirichlet{Edge::left};

  int nodes_x() const { return n + 1; }
  int num_nodes() const { return (n + 1) * (n + 1) * (nz + 1); }
  int num_elements() const { return n * n * nz; }
  int num_dofs() const { return 3 * num_nodes(); }
  int node(int i, int j, int k) const { return (k * (n + 1) + j) * (n + 1) + i; }
  double dx() const { return 1.0 / n; }
  double dz() const { return h / nz; }
  Eigen::Vector3d node_xyz(int id) const {
    const int i = id % (n + 1);
    const int j = (id / (n + 1)) % (n + 1);
    const int k = id / ((n + 1) * (n + 1));
    return {i * dx(), j * dx(), -0.5 * h + k * dz()};
  }
  std::array<int, 8> element_nodes(int e) const {
    const int i = e % n;
    const int j = (e / n) % n;
    const int k = e / (n * n);
    return {node(i, j, k),     node(i + 1, j, k),     node(i + 1, j + 1, k),     node(i, j + 1, k),
            node(i, j, k + 1), node(i + 1, j, k + 1), node(i + 1, j + 1, k + 1), node(i, j + 1, k + 1)};
  }
  bool clamped(int id) const {
    const int i = id % (n + 1);
    const int j = (id / (n + 1)) % (n + 1);
    return (dirichlet.contains(Edge::left) && i == 0) || (dirichlet.contains(Edge::right) && i == n) ||
           (dirichlet.contains(Edge::bottom) && j == 0) || (dirichlet.contains(Edge::top) && j == n);
  }

  void validate() const {
    if (n < 2 || nz < 2) throw ValidationError("slab mesh needs n >= 2 and nz >= 2");
    if (!(h > 0.0)) throw ValidationError("slab thickness must be positive");
  }
};

/// Deformation z and its gradient.
struct ZField {
  std::string name = "identity";
  std::function<Eigen::Vector3d(const Eigen::Vector3d&)> value = [](const Eigen::Vector3d& x) { return x; };
  std::function<Eigen::Matrix3d(const Eigen::Vector3d&)> gradient = [](const Eigen::Vector3d&) {
    return Eigen::Matrix3d::Identity();
  };

  static ZField identity() { return ZField{}; }

  /// z = x + amp * h * sin(pi x1) sin(pi x2) sin(pi x3 / h) (e1 + e2); the
  /// through-thickness derivative stays O(amp) as h -> 0.
  static ZField perturbed(double h, double amp = 0.05) {
    using std::numbers::pi;
    ZField z;
    z.name = "perturbed";
    z.value = [h, amp](const Eigen::Vector3d& x) {
      const double bump = amp * h * std::sin(pi * x(0)) * std::sin(pi * x(1)) * std::sin(pi * x(2) / h);
      return Eigen::Vector3d(x(0) + bump, x(1) + bump, x(2));
    };
    z.gradient = [h, amp](const Eigen::Vector3d& x) {
      const double s1 = std::sin(pi * x(0)), c1 = std::cos(pi * x(0));
      const double s2 = std::sin(pi * x(1)), c2 = std::cos(pi * x(1));
      const double s3 = std::sin(pi * x(2) / h), c3 = std::cos(pi * x(2) / h);
      const Eigen::Vector3d grad_bump(amp * h * pi * c1 * s2 * s3, amp * h * pi * s1 * c2 * s3,
                                      amp * pi * s1 * s2 * c3);
      Eigen::Matrix3d g = Eigen::Matrix3d::Identity();
      g.row(0) += grad_bump.transpose();
      g.row(1) += grad_bump.transpose();
      return g;
    };
    return z;
  }
};

namespace detail {

struct HexPoint {
  std::array<double, 8> value;
  std::array<Eigen::Vector3d, 8> grad;
  Eigen::Vector3d offset;
  double weight;
};

/// 2x2x2 Gauss table for a dx x dx x dz brick.
inline std::array<HexPoint, 8> hex_table(double dx, double dz) {
  static constexpr std::array<std::array<int, 3>, 8> corner{
      {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}}};
  const auto pts = GaussLegendre<2>::points();
  const Eigen::Vector3d size(dx, dx, dz);
  std::array<HexPoint, 8> table;
  int q = 0;
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a, ++q) {
        const Eigen::Vector3d s(0.5 * (pts[a] + 1), 0.5 * (pts[b] + 1), 0.5 * (pts[c] + 1));
        HexPoint& p = table[q];
        p.offset = s.cwiseProduct(size);
        p.weight = dx * dx * dz / 8.0;
        for (int m = 0; m < 8; ++m) {
          Eigen::Vector3d f, df;
          for (int d = 0; d < 3; ++d) {
            f(d) = corner[m][d] ? s(d) : 1 - s(d);
            df(d) = (corner[m][d] ? 1.0 : -1.0) / size(d);
          }
          p.value[m] = f.prod();
          p.grad[m] = Eigen::Vector3d(df(0) * f(1) * f(2), f(0) * df(1) * f(2), f(0) * f(1) * df(2));
        }
      }
  return table;
}

inline Eigen::Vector3d element_origin(const SlabMesh3D& s, int e) {
  const int i = e % s.n;
  const int j = (e / s.n) % s.n;
  const int k = e / (s.n * s.n);
  return {i * s.dx(), j * s.dx(), -0.5 * s.h + k * s.dz()};
}

/// Generalized strain sym(Z^T (e_c (x) grad N)) in engineering Voigt form.
inline Eigen::Matrix<double, 6, 1> generalized_strain(const Eigen::Matrix3d& z, int c,
                                                      const Eigen::Vector3d& grad) {
  const Eigen::Matrix3d m = z.row(c).transpose() * grad.transpose();  // Z^T e_c grad^T
  Eigen::Matrix<double, 6, 1> e;
  e << m(0, 0), m(1, 1), m(2, 2), m(1, 2) + m(2, 1), m(0, 2) + m(2, 0), m(0, 1) + m(1, 0);
  return e;
}

}  // namespace detail

/// Both forms over all 3 * num_nodes dofs (no constraints applied).
struct KornForms {
  SparseMatrix a;  ///< int |sym(grad z^T grad u)|^2
  SparseMatrix b;  ///< int |grad u|^2
};

inline KornForms assemble_korn_forms(const SlabMesh3D& slab, const ZField& z) {
  slab.validate();
  const auto table = detail::hex_table(slab.dx(), slab.dz());
  const int ne = slab.num_elements();
  using Block = Eigen::Matrix<double, 24, 24>;
  std::vector<Block> ea(ne), eb(ne);
  // Engineering Voigt weights: |S|^2 = sum diag^2 + 1/2 sum shear^2.
  const Eigen::Matrix<double, 6, 1> metric = (Eigen::Matrix<double, 6, 1>() << 1, 1, 1, 0.5, 0.5, 0.5).finished();
  parallel_for(ne, [&](int e) {
    ea[e].setZero();
    eb[e].setZero();
    const Eigen::Vector3d origin = detail::element_origin(slab, e);
    for (const auto& p : table) {
      const Eigen::Matrix3d zg = z.gradient(origin + p.offset);
      Eigen::Matrix<double, 6, 24> strain;
      for (int m = 0; m < 8; ++m) {
        for (int c = 0; c < 3; ++c) strain.col(3 * m + c) = detail::generalized_strain(zg, c, p.grad[m]);
      }
      ea[e].noalias() += p.weight * strain.transpose() * metric.asDiagonal() * strain;
      for (int m = 0; m < 8; ++m) {
        for (int k = 0; k < 8; ++k) {
          const double gg = p.weight * p.grad[m].dot(p.grad[k]);
          for (int c = 0; c < 3; ++c) eb[e](3 * m + c, 3 * k + c) += gg;
        }
      }
    }
  });
  std::vector<Eigen::Triplet<double>> ta, tb;
  ta.reserve(static_cast<std::size_t>(ne) * 576);
  tb.reserve(static_cast<std::size_t>(ne) * 576);
  for (int e = 0; e < ne; ++e) {
    const auto nodes = slab.element_nodes(e);
    for (int i = 0; i < 24; ++i) {
      const int gi = 3 * nodes[i / 3] + i % 3;
      for (int j = 0; j < 24; ++j) {
        const int gj = 3 * nodes[j / 3] + j % 3;
        ta.emplace_back(gi, gj, ea[e](i, j));
        tb.emplace_back(gi, gj, eb[e](i, j));
      }
    }
  }
  KornForms f;
  f.a.resize(slab.num_dofs(), slab.num_dofs());
  f.b.resize(slab.num_dofs(), slab.num_dofs());
  f.a.setFromTriplets(ta.begin(), ta.end());
  f.b.setFromTriplets(tb.begin(), tb.end());
  return f;
}

/// Numerator form int |sym(grad z^T grad u)|^2 evaluated pointwise at the
/// Gauss points for a continuous displacement gradient.
inline double korn_numerator(const SlabMesh3D& slab, const ZField& z,
                             const std::function<Eigen::Matrix3d(const Eigen::Vector3d&)>& grad_u) {
  const auto table = detail::hex_table(slab.dx(), slab.dz());
  double total = 0.0;
  for (int e = 0; e < slab.num_elements(); ++e) {
    const Eigen::Vector3d origin = detail::element_origin(slab, e);
    for (const auto& p : table) {
      const Eigen::Vector3d x = origin + p.offset;
      const Eigen::Matrix3d m = z.gradient(x).transpose() * grad_u(x);
      total += p.weight * (0.5 * (m + m.transpose())).squaredNorm();
    }
  }
  return total;
}

/// Smallest eigenvalue of A x = lambda B x over unclamped dofs.
struct KornResult {
  double lambda_min = 0.0;
  double constant = 0.0;
  int iterations = 0;
};

struct AdmissibilityReport {
  double min_det = 0.0;
  double max_norm = 0.0;  ///< max Frobenius norm of grad z
  bool ok(double rho) const { return min_det >= rho && max_norm <= 1.0 / rho; }
};

inline AdmissibilityReport check_admissible(const SlabMesh3D& slab, const ZField& z) {
  const auto table = detail::hex_table(slab.dx(), slab.dz());
  AdmissibilityReport r{std::numeric_limits<double>::infinity(), 0.0};
  for (int e = 0; e < slab.num_elements(); ++e) {
    const Eigen::Vector3d origin = detail::element_origin(slab, e);
    for (const auto& p : table) {
      const Eigen::Matrix3d g = z.gradient(origin + p.offset);
      r.min_det = std::min(r.min_det, g.determinant());
      r.max_norm = std::max(r.max_norm, g.norm());
    }
  }
  return r;
}

inline constexpr double kKornRho = 0.5;

/// Shift-free inverse iteration with one LDL^T factorization of A; stops when
/// successive Rayleigh quotients agree to 1e-10 relative.
inline KornResult korn_constant(const SlabMesh3D& slab, const ZField& z, int max_iter = 20000) {
  slab.validate();
  if (slab.dirichlet.empty()) throw SolverError("Korn form is singular without a clamped face");
  const AdmissibilityReport adm = check_admissible(slab, z);
  if (!adm.ok(kKornRho)) {
    std::ostringstream os;
    os << "z is not admissible: min det " << adm.min_det << ", max |grad z| " << adm.max_norm;
    throw ValidationError(os.str());
  }
  const KornForms forms = assemble_korn_forms(slab, z);

  std::vector<int> to_free(slab.num_dofs(), -1);
  int nfree = 0;
  for (int id = 0; id < slab.num_nodes(); ++id) {
    if (slab.clamped(id)) continue;
    for (int c = 0; c < 3; ++c) to_free[3 * id + c] = nfree++;
  }
  auto restrict = [&](const SparseMatrix& m) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(m.nonZeros());
    for (int col = 0; col < m.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
        const int r = to_free[it.row()];
        const int c = to_free[it.col()];
        if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
      }
    }
    SparseMatrix out(nfree, nfree);
    out.setFromTriplets(t.begin(), t.end());
    return out;
  };
  const SparseMatrix a = restrict(forms.a);
  const SparseMatrix b = restrict(forms.b);

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw SolverError("Korn numerator form is singular on the free dofs");
  }

  // Deterministic start vector with components in every direction.
  Eigen::VectorXd x(nfree);
  for (int i = 0; i < nfree; ++i) x(i) = 1.0 + 0.5 * std::sin(0.7 * i + 0.3);
  x /= std::sqrt(x.dot(b * x));
  double rq_prev = x.dot(a * x);
  KornResult r;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd y = ldlt.solve(b * x);
    const double norm_b = std::sqrt(y.dot(b * y));
    if (!(norm_b > 0.0) || !std::isfinite(norm_b)) throw SolverError("inverse iteration broke down");
    x = y / norm_b;
    const double rq = x.dot(a * x);
    r.iterations = it;
    if (std::abs(rq - rq_prev) < 1e-10 * std::abs(rq)) {
      r.lambda_min = rq;
      r.constant = 1.0 / std::sqrt(rq);
      return r;
    }
    rq_prev = rq;
  }
  throw SolverError("inverse iteration did not converge");
}

struct KornRow {
  double h = 0.0;
  double lambda_min = 0.0;
  double constant = 0.0;
  double pair_slope = std::numeric_limits<double>::quiet_NaN();  ///< vs the previous row
};

struct KornStudy {
  std::vector<KornRow> rows;
  double slope = 0.0;  ///< least-squares slope of log(constant) against log(h)
};

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

enum class ZKind { identity, perturbed };

inline KornStudy scaling_study(const std::vector<double>& hs, int n, int nz, ZKind z_kind,
                               EdgeSet dirichlet = {Edge::left}) {
  if (hs.size() < 3) throw ValidationError("need >= 3 thicknesses");
  for (std::size_t i = 1; i < hs.size(); ++i) {
    if (!(hs[i] < hs[i - 1])) throw ValidationError("thicknesses must be strictly decreasing");
  }
  KornStudy study;
  std::vector<double> lh, lc;
  for (double h : hs) {
    const SlabMesh3D slab{h, n, nz, dirichlet};
    const ZField z = z_kind == ZKind::identity ? ZField::identity() : ZField::perturbed(h);
    const KornResult kr = korn_constant(slab, z);
    KornRow row{h, kr.lambda_min, kr.constant};
    if (!study.rows.empty()) {
      const KornRow& prev = study.rows.back();
      row.pair_slope = std::log(row.constant / prev.constant) / std::log(row.h / prev.h);
    }
    study.rows.push_back(row);
    lh.push_back(std::log(h));
    lc.push_back(std::log(kr.constant));
  }
  study.slope = least_squares_slope(lh, lc);
  return study;
}

}  // namespace vkplate
