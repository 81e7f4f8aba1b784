#pragma once

// Reference quadrature and the two plate element bases: bilinear Q1 for u and
// mu, Bogner-Fox-Schmit bicubic Hermite for v. All elements of a Grid2D have
// the same size, so one table of basis values per grid serves every element.

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "vkplate/grid.hpp"

namespace vkplate {

template <int N>
struct GaussLegendre;

template <>
struct GaussLegendre<2> {
  static constexpr int size = 2;
  static std::array<double, 2> points() {
    const double a = 1.0 / std::sqrt(3.0);
    return {-a, a};
  }
  static std::array<double, 2> weights() { return {1.0, 1.0}; }
};

template <>
struct GaussLegendre<4> {
  static constexpr int size = 4;
  static std::array<double, 4> points() {
    const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    return {-b, -a, a, b};
  }
  static std::array<double, 4> weights() {
    const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
    const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
    return {wb, wa, wa, wb};
  }
};

/// Cubic Hermite functions on [0, h] in s = x/h: value at the left/right end
/// and slope at the left/right end. Returns (f, f', f'') in x.
struct Hermite1D {
  static Eigen::Vector3d value_left(double s, double h) {
    return {1 - 3 * s * s + 2 * s * s * s, (-6 * s + 6 * s * s) / h, (-6 + 12 * s) / (h * h)};
  }
  static Eigen::Vector3d value_right(double s, double h) {
    return {3 * s * s - 2 * s * s * s, (6 * s - 6 * s * s) / h, (6 - 12 * s) / (h * h)};
  }
  static Eigen::Vector3d slope_left(double s, double h) {
    return {h * (s - 2 * s * s + s * s * s), 1 - 4 * s + 3 * s * s, (-4 + 6 * s) / h};
  }
  static Eigen::Vector3d slope_right(double s, double h) {
    return {h * (-s * s + s * s * s), -2 * s + 3 * s * s, (-2 + 6 * s) / h};
  }
};

/// Corner offsets of the local nodes in units of the element size.
inline constexpr std::array<std::array<int, 2>, 4> kCorner{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};

/// Q1 and BFS basis at an arbitrary point of an hx x hy element, given local
/// coordinates (sx, sy) in [0,1]^2.
struct PlateBasisPoint {
  std::array<double, 4> q1;
  std::array<Eigen::Vector2d, 4> q1_grad;
  /// BFS function for local node a, dof k at index 4a + k.
  std::array<double, 16> bfs;
  std::array<Eigen::Vector2d, 16> bfs_grad;
  std::array<Eigen::Matrix2d, 16> bfs_hess;

  static PlateBasisPoint evaluate(double sx, double sy, double hx, double hy) {
    PlateBasisPoint p;
    for (int a = 0; a < 4; ++a) {
      const int cx = kCorner[a][0];
      const int cy = kCorner[a][1];
      const double fx = cx ? sx : 1 - sx;
      const double fy = cy ? sy : 1 - sy;
      const double dfx = (cx ? 1.0 : -1.0) / hx;
      const double dfy = (cy ? 1.0 : -1.0) / hy;
      p.q1[a] = fx * fy;
      p.q1_grad[a] = Eigen::Vector2d(dfx * fy, fx * dfy);

      const Eigen::Vector3d vx = cx ? Hermite1D::value_right(sx, hx) : Hermite1D::value_left(sx, hx);
      const Eigen::Vector3d sx3 = cx ? Hermite1D::slope_right(sx, hx) : Hermite1D::slope_left(sx, hx);
      const Eigen::Vector3d vy = cy ? Hermite1D::value_right(sy, hy) : Hermite1D::value_left(sy, hy);
      const Eigen::Vector3d sy3 = cy ? Hermite1D::slope_right(sy, hy) : Hermite1D::slope_left(sy, hy);
      const std::array<std::pair<const Eigen::Vector3d*, const Eigen::Vector3d*>, 4> factors{
          {{&vx, &vy}, {&sx3, &vy}, {&vx, &sy3}, {&sx3, &sy3}}};
      for (int k = 0; k < 4; ++k) {
        const Eigen::Vector3d& f = *factors[k].first;
        const Eigen::Vector3d& g = *factors[k].second;
        const int idx = 4 * a + k;
        p.bfs[idx] = f(0) * g(0);
        p.bfs_grad[idx] = Eigen::Vector2d(f(1) * g(0), f(0) * g(1));
        Eigen::Matrix2d hs;
        hs << f(2) * g(0), f(1) * g(1), f(1) * g(1), f(0) * g(2);
        p.bfs_hess[idx] = hs;
      }
    }
    return p;
  }
};

/// Basis tables at the 4x4 Gauss points of one element of a grid.
struct PlateElementTable {
  static constexpr int kPoints = 16;
  std::array<PlateBasisPoint, kPoints> at;
  std::array<Eigen::Vector2d, kPoints> offset;  ///< physical offset from the element origin
  std::array<double, kPoints> weight;            ///< Gauss weight times |det J|

  explicit PlateElementTable(const Grid2D& g) {
    const auto pts = GaussLegendre<4>::points();
    const auto wts = GaussLegendre<4>::weights();
    const double det = g.hx() * g.hy() / 4.0;
    for (int qy = 0; qy < 4; ++qy) {
      for (int qx = 0; qx < 4; ++qx) {
        const int q = qy * 4 + qx;
        const double sx = 0.5 * (pts[qx] + 1.0);
        const double sy = 0.5 * (pts[qy] + 1.0);
        at[q] = PlateBasisPoint::evaluate(sx, sy, g.hx(), g.hy());
        offset[q] = Eigen::Vector2d(sx * g.hx(), sy * g.hy());
        weight[q] = wts[qx] * wts[qy] * det;
      }
    }
  }
};

}  // namespace vkplate
