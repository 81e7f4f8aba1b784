#pragma once

// Constitutive tensors of the plate model: 3D elastic/viscous tensors, their
// plane reductions by relaxation of the out-of-plane strain components, the
// reduced heat conductivity and the temperature-scaling regime tensors.
//
// Voigt convention (both dimensions): strains are stored with engineering
// shear, e = (A11, A22, A33, 2A23, 2A13, 2A12) in 3D and e = (A11, A22, 2A12)
// in 2D; stresses without the factor. With this choice A:CA = e^T C e.

#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "vkplate/errors.hpp"

namespace vkplate {

template <int Dim>
inline constexpr int voigt_size = Dim * (Dim + 1) / 2;

template <int Dim>
constexpr int voigt_index(int i, int j) {
  static_assert(Dim == 2 || Dim == 3);
  if (i == j) return i;
  if constexpr (Dim == 2) {
    return 2;
  } else {
    const int s = i + j;  // (1,2)->3, (0,2)->4, (0,1)->5
    return s == 3 ? 3 : (s == 2 ? 4 : 5);
  }
}

template <int Dim>
using SquareMatrix = Eigen::Matrix<double, Dim, Dim>;
template <int Dim>
using VoigtVector = Eigen::Matrix<double, voigt_size<Dim>, 1>;
template <int Dim>
using VoigtMatrix = Eigen::Matrix<double, voigt_size<Dim>, voigt_size<Dim>>;

/// Engineering-shear Voigt vector of sym(A).
template <int Dim>
VoigtVector<Dim> strain_to_voigt(const SquareMatrix<Dim>& a) {
  VoigtVector<Dim> e;
  for (int i = 0; i < Dim; ++i) {
    for (int j = i; j < Dim; ++j) {
      e(voigt_index<Dim>(i, j)) = (i == j) ? a(i, i) : a(i, j) + a(j, i);
    }
  }
  return e;
}

template <int Dim>
SquareMatrix<Dim> stress_from_voigt(const VoigtVector<Dim>& s) {
  SquareMatrix<Dim> m;
  for (int i = 0; i < Dim; ++i) {
    for (int j = 0; j < Dim; ++j) m(i, j) = s(voigt_index<Dim>(i, j));
  }
  return m;
}

template <int Dim>
VoigtVector<Dim> stress_to_voigt(const SquareMatrix<Dim>& a) {
  VoigtVector<Dim> s;
  for (int i = 0; i < Dim; ++i) {
    for (int j = i; j < Dim; ++j) s(voigt_index<Dim>(i, j)) = 0.5 * (a(i, j) + a(j, i));
  }
  return s;
}

/// Fourth-order tensor with minor and major symmetries, acting on symmetric
/// Dim x Dim matrices. Stored densely as its Voigt matrix; immutable.
template <int Dim>
class SymTensor4 {
 public:
  using Matrix = SquareMatrix<Dim>;
  using Voigt = VoigtMatrix<Dim>;

  static constexpr double kSymmetryTolerance = 1e-10;
  static constexpr double kDefinitenessRatio = 1e-12;

  SymTensor4() : voigt_(Voigt::Zero()) {}

  static SymTensor4 zero() { return SymTensor4(); }

  /// Symmetrize-and-check: asymmetry beyond 1e-10 (relative to the largest
  /// entry) is rejected.
  static SymTensor4 from_voigt(const Voigt& c) {
    if (!c.allFinite()) throw ValidationError("tensor has non-finite entries");
    const double scale = c.cwiseAbs().maxCoeff();
    const double asym = (c - c.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
      std::ostringstream os;
      os << "Voigt matrix violates major symmetry (max asymmetry " << asym << ")";
      throw ValidationError(os.str());
    }
    SymTensor4 t;
    t.voigt_ = 0.5 * (c + c.transpose());
    return t;
  }

  /// Full index array, row-major in (i,j,k,l). All minor and major symmetries
  /// are checked.
  static SymTensor4 from_entries(const std::array<double, Dim * Dim * Dim * Dim>& entries) {
    auto at = [&](int i, int j, int k, int l) {
      return entries[((i * Dim + j) * Dim + k) * Dim + l];
    };
    double scale = 0.0;
    for (double x : entries) scale = std::max(scale, std::abs(x));
    const double tol = kSymmetryTolerance * scale;
    for (int i = 0; i < Dim; ++i)
      for (int j = 0; j < Dim; ++j)
        for (int k = 0; k < Dim; ++k)
          for (int l = 0; l < Dim; ++l) {
            const double t = at(i, j, k, l);
            if (std::abs(t - at(j, i, k, l)) > tol || std::abs(t - at(i, j, l, k)) > tol ||
                std::abs(t - at(k, l, i, j)) > tol) {
              std::ostringstream os;
              os << "tensor violates symmetry at [" << i + 1 << "," << j + 1 << "," << k + 1
                 << "," << l + 1 << "]";
              throw ValidationError(os.str());
            }
          }
    Voigt c = Voigt::Zero();
    for (int i = 0; i < Dim; ++i)
      for (int j = 0; j < Dim; ++j)
        for (int k = 0; k < Dim; ++k)
          for (int l = 0; l < Dim; ++l) {
            // Average the symmetric copies that land on the same Voigt slot.
            const int mult_ij = (i == j) ? 1 : 2;
            const int mult_kl = (k == l) ? 1 : 2;
            c(voigt_index<Dim>(i, j), voigt_index<Dim>(k, l)) +=
                at(i, j, k, l) / (mult_ij * mult_kl);
          }
    return from_voigt(c);
  }

  /// Q(A) = 2 mu |sym A|^2 + lambda tr(A)^2.
  static SymTensor4 isotropic(double mu, double lambda) {
    Voigt c = Voigt::Zero();
    for (int i = 0; i < Dim; ++i) {
      for (int j = 0; j < Dim; ++j) c(i, j) = lambda;
      c(i, i) += 2.0 * mu;
    }
    for (int s = Dim; s < voigt_size<Dim>; ++s) c(s, s) = mu;
    return from_voigt(c);
  }

  const Voigt& voigt() const { return voigt_; }

  double operator()(int i, int j, int k, int l) const {
    return voigt_(voigt_index<Dim>(i, j), voigt_index<Dim>(k, l));
  }

  /// Stress C:A (symmetric).
  Matrix apply(const Matrix& a) const {
    return stress_from_voigt<Dim>(voigt_ * strain_to_voigt<Dim>(a));
  }

  /// Quadratic form A:CA; only sym(A) contributes.
  double form(const Matrix& a) const {
    const VoigtVector<Dim> e = strain_to_voigt<Dim>(a);
    return e.dot(voigt_ * e);
  }

  Eigen::Matrix<double, voigt_size<Dim>, 1> voigt_eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Voigt> es(voigt_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  /// min eigenvalue > 1e-12 * max eigenvalue of the Voigt matrix.
  bool is_positive_definite() const {
    const auto ev = voigt_eigenvalues();
    const double hi = ev.maxCoeff();
    return hi > 0.0 && ev.minCoeff() > kDefinitenessRatio * hi;
  }

  bool is_zero() const { return voigt_.isZero(0.0); }

  friend bool operator==(const SymTensor4& a, const SymTensor4& b) {
    return a.voigt_ == b.voigt_;
  }

 private:
  Voigt voigt_;
};

using SymTensor3D = SymTensor4<3>;
using SymTensor2D = SymTensor4<2>;

inline SymTensor3D make_isotropic_c3(double mu, double lambda) {
  if (!(mu > 0.0)) throw ValidationError("isotropic tensor requires mu > 0");
  if (!(lambda >= 0.0)) throw ValidationError("isotropic tensor requires lambda >= 0");
  return SymTensor3D::isotropic(mu, lambda);
}

/// Linear map from an in-plane strain A'' to the out-of-plane completion
/// (a13, a23, a33) minimizing the 3D form.
struct RelaxationMap {
  /// Acts on (A11, A22, A12) as tensor components.
  Eigen::Matrix3d coeff = Eigen::Matrix3d::Zero();

  Eigen::Vector3d operator()(const Eigen::Matrix2d& a) const {
    const Eigen::Vector3d in(a(0, 0), a(1, 1), 0.5 * (a(0, 1) + a(1, 0)));
    return coeff * in;
  }

  /// The symmetric 3x3 minimizer A* with A*'' = sym(A).
  Eigen::Matrix3d complete(const Eigen::Matrix2d& a) const {
    const Eigen::Vector3d out = (*this)(a);
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    m.topLeftCorner<2, 2>() = 0.5 * (a + a.transpose());
    m(0, 2) = m(2, 0) = out(0);
    m(1, 2) = m(2, 1) = out(1);
    m(2, 2) = out(2);
    return m;
  }
};

struct ReducedForm {
  SymTensor2D tensor;
  RelaxationMap relaxation;
};

/// Plane reduction Q2(A'') = min over symmetric completions of Q3. The
/// minimizer solves the 3x3 normal equations in the out-of-plane Voigt
/// components, so the reduced Voigt matrix is a Schur complement.
inline ReducedForm reduce_form(const SymTensor3D& c3) {
  // In-plane Voigt slots (11, 22, 12) and out-of-plane slots (33, 23, 13).
  constexpr std::array<int, 3> in{0, 1, 5};
  constexpr std::array<int, 3> out{2, 3, 4};
  const auto& c = c3.voigt();
  Eigen::Matrix3d cpp, cpo, coo;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      cpp(a, b) = c(in[a], in[b]);
      cpo(a, b) = c(in[a], out[b]);
      coo(a, b) = c(out[a], out[b]);
    }
  }
  const double scale = c.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(coo, Eigen::EigenvaluesOnly);
  if (!(scale > 0.0) || !(es.eigenvalues().minCoeff() > 1e-12 * scale)) {
    throw ValidationError("relaxation system is singular: tensor is not positive definite");
  }
  Eigen::LLT<Eigen::Matrix3d> llt(coo);
  // Out-of-plane engineering components o = -coo^{-1} cop p, p = (a11, a22, 2 a12).
  const Eigen::Matrix3d solve = llt.solve(cpo.transpose());
  const Eigen::Matrix3d schur = cpp - cpo * solve;

  ReducedForm r;
  r.tensor = SymTensor2D::from_voigt(schur);
  // Convert: p = diag(1,1,2) * (a11, a22, a12); (a13, a23, a33) = (o[2]/2, o[1]/2, o[0]).
  const Eigen::Matrix3d o_of_p = -solve;
  Eigen::Matrix3d o_of_a = o_of_p * Eigen::Vector3d(1.0, 1.0, 2.0).asDiagonal();
  r.relaxation.coeff.row(0) = 0.5 * o_of_a.row(2);
  r.relaxation.coeff.row(1) = 0.5 * o_of_a.row(1);
  r.relaxation.coeff.row(2) = o_of_a.row(0);
  return r;
}

namespace detail {

inline void require_symmetric(const Eigen::Matrix3d& m, const char* what) {
  if (!m.allFinite()) throw ValidationError(std::string(what) + " has non-finite entries");
  const double scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ValidationError(std::string(what) + " is not symmetric");
  }
}

}  // namespace detail

/// K'' - (K31, K32) (x) (K31, K32) / K33.
inline Eigen::Matrix2d reduce_heat_conductivity(const Eigen::Matrix3d& k3) {
  detail::require_symmetric(k3, "heat conductivity");
  if (!(k3(2, 2) > 0.0)) throw ValidationError("heat conductivity requires K33 > 0");
  const Eigen::Vector2d k3i(k3(2, 0), k3(2, 1));
  Eigen::Matrix2d kt = k3.topLeftCorner<2, 2>() - (k3i * k3i.transpose()) / k3(2, 2);
  return 0.5 * (kt + kt.transpose());
}

struct RegimeTensors {
  Eigen::Matrix2d b_thermal = Eigen::Matrix2d::Zero();
  SymTensor2D c_visc_alpha;
};

inline void require_alpha(double alpha) {
  if (!(alpha >= 2.0 && alpha <= 4.0)) {
    std::ostringstream os;
    os << "alpha = " << alpha << " is outside [2, 4]";
    throw ValidationError(os.str());
  }
}

/// Thermal expansion survives only at alpha = 2, the dissipation source only
/// at alpha = 4.
inline RegimeTensors regime_tensors(double alpha, const Eigen::Matrix3d& b_full,
                                    const SymTensor2D& c_visc2) {
  require_alpha(alpha);
  detail::require_symmetric(b_full, "thermal expansion matrix");
  RegimeTensors r;
  if (alpha == 2.0) r.b_thermal = 0.5 * (b_full.topLeftCorner<2, 2>() +
                                         b_full.topLeftCorner<2, 2>().transpose());
  if (alpha == 4.0) r.c_visc_alpha = c_visc2;
  return r;
}

/// Diagnostic for the zero-Poisson-ratio splitting of the 3D form and the
/// in-plane structure of the thermal expansion matrix.
struct CompatibilityReport {
  double tol = 0.0;
  double max_tensor_coupling = 0.0;  ///< over c3[3,i,k,l], c3[i,3,k,l] and their transposes
  std::string worst_tensor_entry;    ///< 1-based, e.g. "c3[1,1,3,3]"
  double max_thermal_coupling = 0.0; ///< over b[i,3], b[3,i]
  std::string worst_thermal_entry;

  bool tensor_pass() const { return max_tensor_coupling <= tol; }
  bool thermal_pass() const { return max_thermal_coupling <= tol; }
  bool pass() const { return tensor_pass() && thermal_pass(); }
};

inline CompatibilityReport check_compatibility(const SymTensor3D& c3, const Eigen::Matrix3d& b_full,
                                               double tol) {
  CompatibilityReport r;
  r.tol = tol;
  auto name4 = [](int i, int j, int k, int l) {
    std::ostringstream os;
    os << "c3[" << i + 1 << "," << j + 1 << "," << k + 1 << "," << l + 1 << "]";
    return os.str();
  };
  auto consider = [&](double value, int i, int j, int k, int l) {
    if (std::abs(value) > r.max_tensor_coupling || r.worst_tensor_entry.empty()) {
      r.max_tensor_coupling = std::abs(value);
      r.worst_tensor_entry = name4(i, j, k, l);
    }
  };
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 2; ++k) {
      for (int l = 0; l < 2; ++l) {
        consider(c3(k, l, 2, i), k, l, 2, i);
        consider(c3(k, l, i, 2), k, l, i, 2);
        consider(c3(2, i, k, l), 2, i, k, l);
        consider(c3(i, 2, k, l), i, 2, k, l);
      }
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (const auto& [a, b] : {std::pair{i, 2}, std::pair{2, i}}) {
      const double v = std::abs(b_full(a, b));
      if (v > r.max_thermal_coupling || r.worst_thermal_entry.empty()) {
        r.max_thermal_coupling = v;
        std::ostringstream os;
        os << "b[" << a + 1 << "," << b + 1 << "]";
        r.worst_thermal_entry = os.str();
      }
    }
  }
  return r;
}

/// The complete reduced parameter pack of the plate model.
struct MaterialSet {
  SymTensor2D c_el;
  SymTensor2D c_visc;
  SymTensor2D c_visc_alpha;
  Eigen::Matrix2d b_thermal = Eigen::Matrix2d::Zero();
  double cv_bar = 1.0;
  Eigen::Matrix2d k_tilde = Eigen::Matrix2d::Identity();
  double kappa = 0.0;
  double alpha = 4.0;

  bool has_thermal_stress() const { return alpha == 2.0 && !b_thermal.isZero(0.0); }
  bool has_heat_source() const { return alpha == 4.0 && !c_visc_alpha.is_zero(); }

  void validate() const {
    require_alpha(alpha);
    if (!c_el.is_positive_definite()) throw ValidationError("elastic tensor is not positive definite");
    if (!c_visc.is_positive_definite()) throw ValidationError("viscous tensor is not positive definite");
    if (alpha == 4.0 ? !(c_visc_alpha == c_visc) : !c_visc_alpha.is_zero()) {
      throw ValidationError("regime viscous tensor inconsistent with alpha");
    }
    if (alpha != 2.0 && !b_thermal.isZero(0.0)) {
      throw ValidationError("thermal expansion must vanish unless alpha = 2");
    }
    if (!(cv_bar > 0.0)) throw ValidationError("heat capacity must be positive");
    if (!(kappa >= 0.0)) throw ValidationError("heat-transfer coefficient must be nonnegative");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(k_tilde);
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
      throw ValidationError("reduced heat conductivity is not positive definite");
    }
  }
};

/// Builds the reduced set from already plane tensors; `b_full` supplies the
/// in-plane thermal expansion when alpha = 2.
inline MaterialSet make_material_set_2d(const SymTensor2D& c_el2, const SymTensor2D& c_visc2,
                                        const Eigen::Matrix3d& b_full, double cv_bar,
                                        const Eigen::Matrix2d& k_tilde, double kappa,
                                        double alpha) {
  const RegimeTensors rt = regime_tensors(alpha, b_full, c_visc2);
  MaterialSet m;
  m.c_el = c_el2;
  m.c_visc = c_visc2;
  m.c_visc_alpha = rt.c_visc_alpha;
  m.b_thermal = rt.b_thermal;
  m.cv_bar = cv_bar;
  m.k_tilde = k_tilde;
  m.kappa = kappa;
  m.alpha = alpha;
  m.validate();
  return m;
}

/// Full pipeline from 3D data: reduce both tensors and the conductivity, then
/// apply the regime selection.
inline MaterialSet make_material_set(const SymTensor3D& c_el3, const SymTensor3D& c_visc3,
                                     const Eigen::Matrix3d& b_full, double cv_bar,
                                     const Eigen::Matrix3d& k3, double kappa, double alpha) {
  if (!c_el3.is_positive_definite()) throw ValidationError("3D elastic tensor is not positive definite");
  if (!c_visc3.is_positive_definite()) throw ValidationError("3D viscous tensor is not positive definite");
  return make_material_set_2d(reduce_form(c_el3).tensor, reduce_form(c_visc3).tensor, b_full,
                              cv_bar, reduce_heat_conductivity(k3), kappa, alpha);
}

}  // namespace vkplate
