#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "gmmshape/errors.hpp"

namespace gmmshape {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

/// Eigen-decomposition of a symmetric 3x3 matrix. Eigenvalues ascend;
/// column i of `vectors` pairs with `values(i)`.
template <typename Scalar>
struct SymmetricEigen3 {
  Vec3<Scalar> values;
  Mat3<Scalar> vectors;
};

/// Cyclic Jacobi eigensolver for symmetric 3x3 matrices. Only the upper
/// triangle is read.
template <typename Derived>
SymmetricEigen3<typename Derived::Scalar> jacobi_eigen3(const Eigen::MatrixBase<Derived>& input) {
  using Scalar = typename Derived::Scalar;
  static_assert(Derived::RowsAtCompileTime == 3 && Derived::ColsAtCompileTime == 3,
                "jacobi_eigen3 expects a 3x3 matrix");

  Mat3<Scalar> a = input.template triangularView<Eigen::Upper>();
  a.template triangularView<Eigen::StrictlyLower>() = a.transpose();
  Mat3<Scalar> v = Mat3<Scalar>::Identity();

  for (int sweep = 0; sweep < 64; ++sweep) {
    const Scalar off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (off == Scalar(0)) break;
    const Scalar diag = a(0, 0) * a(0, 0) + a(1, 1) * a(1, 1) + a(2, 2) * a(2, 2);
    if (off <= std::numeric_limits<Scalar>::epsilon() * std::numeric_limits<Scalar>::epsilon() * diag * Scalar(1e-4)) {
      break;
    }

    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar g = Scalar(100) * std::abs(apq);
        if (std::abs(a(p, p)) + g == std::abs(a(p, p)) && std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = a(q, p) = Scalar(0);
          continue;
        }

        // Rotation angle chosen so that a(p,q) vanishes; |t| <= 1.
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        const Scalar tau = s / (Scalar(1) + c);

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = Scalar(0);
        for (int r = 0; r < 3; ++r) {
          if (r == p || r == q) continue;
          const Scalar arp = a(r, p);
          const Scalar arq = a(r, q);
          a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
          a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
        }
        for (int r = 0; r < 3; ++r) {
          const Scalar vrp = v(r, p);
          const Scalar vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  SymmetricEigen3<Scalar> out;
  for (int i = 0; i < 3; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

/// V f(Λ) Vᵀ for a symmetric matrix, symmetrized on return.
template <typename Derived, typename Fn>
Mat3<typename Derived::Scalar> symmetric_function(const Eigen::MatrixBase<Derived>& s, Fn&& fn) {
  using Scalar = typename Derived::Scalar;
  const auto eig = jacobi_eigen3(s);
  Vec3<Scalar> mapped;
  for (int i = 0; i < 3; ++i) mapped(i) = fn(eig.values(i));
  Mat3<Scalar> out = eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
  return Scalar(0.5) * (out + out.transpose());
}

template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& s) {
  return jacobi_eigen3(s).values(0);
}

/// Throws DegenerateCovariance unless the smallest eigenvalue is positive and finite.
template <typename Derived>
void require_spd(const Eigen::MatrixBase<Derived>& s, const char* what = "matrix") {
  using Scalar = typename Derived::Scalar;
  if (!s.allFinite()) throw DegenerateCovariance(std::string(what) + " has non-finite entries",
                                                 std::numeric_limits<double>::quiet_NaN());
  const Scalar lo = min_eigenvalue(s);
  if (!(lo > Scalar(0))) {
    throw DegenerateCovariance(std::string(what) + " is not positive definite", static_cast<double>(lo));
  }
}

/// Raises every eigenvalue below `floor` to `floor`. Matrices already above
/// the floor are returned unchanged (bit-for-bit).
template <typename Derived>
Mat3<typename Derived::Scalar> floor_eigenvalues(const Eigen::MatrixBase<Derived>& s,
                                                  typename Derived::Scalar floor) {
  using Scalar = typename Derived::Scalar;
  const auto eig = jacobi_eigen3(s);
  if (eig.values(0) >= floor) return s;
  Vec3<Scalar> clamped = eig.values.cwiseMax(floor);
  Mat3<Scalar> out = eig.vectors * clamped.asDiagonal() * eig.vectors.transpose();
  return Scalar(0.5) * (out + out.transpose());
}

/// S^p for SPD S. Eigenvalues are clamped at `floor` first when floor > 0.
template <typename Derived>
Mat3<typename Derived::Scalar> spd_power(const Eigen::MatrixBase<Derived>& s, typename Derived::Scalar p,
                                          typename Derived::Scalar floor = 0) {
  using Scalar = typename Derived::Scalar;
  return symmetric_function(s, [&](Scalar lambda) {
    if (floor > Scalar(0)) lambda = std::max(lambda, floor);
    if (!(lambda > Scalar(0))) throw DegenerateCovariance("matrix power of a non-SPD matrix", static_cast<double>(lambda));
    return std::pow(lambda, p);
  });
}

template <typename Derived>
Mat3<typename Derived::Scalar> spd_log(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  return symmetric_function(s, [](Scalar lambda) {
    if (!(lambda > Scalar(0))) throw DegenerateCovariance("matrix log of a non-SPD matrix", static_cast<double>(lambda));
    return std::log(lambda);
  });
}

/// Affine-invariant distance ‖log(S1^(-1/2) S2 S1^(-1/2))‖_F.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar spd_distance(const Eigen::MatrixBase<DerivedA>& s1, const Eigen::MatrixBase<DerivedB>& s2) {
  using Scalar = typename DerivedA::Scalar;
  const Mat3<Scalar> inv_sqrt = spd_power(s1, Scalar(-0.5));
  const Mat3<Scalar> inner = inv_sqrt * s2 * inv_sqrt;
  return spd_log(Scalar(0.5) * (inner + inner.transpose())).norm();
}

}  // namespace gmmshape
