#ifndef LGDM_RETRACTION_HPP
#define LGDM_RETRACTION_HPP

// Matrix Lie group kernel: the Cayley retraction, its right-trivialized
// tangent and inverse tangent, and the so(3) hat/vee isomorphisms.
//
// The matrix-level routines are templated on the matrix dimension D so that
// other quadratic groups can reuse them; coordinate-level routines are so(3)
// specific and use the basis
//   e1 = [[0,0,0],[0,0,-1],[0,1,0]], e2 = [[0,0,1],[0,0,0],[-1,0,0]],
//   e3 = [[0,-1,0],[1,0,0],[0,0,0]].

#include <limits>
#include <string>

#include <Eigen/Dense>

#include "lgdm/errors.hpp"

namespace lgdm {

template <int D>
using SquareMatrix = Eigen::Matrix<double, D, D>;

/// Condition bound above which I -/+ xi/2 is treated as singular.
inline constexpr double kRetractionConditionLimit = 1e12;

namespace detail {

template <int D>
double condition_number(const SquareMatrix<D>& a) {
  Eigen::JacobiSVD<SquareMatrix<D>> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

template <int D>
Eigen::PartialPivLU<SquareMatrix<D>> checked_lu(const SquareMatrix<D>& a,
                                                const char* what) {
  if (!(condition_number<D>(a) < kRetractionConditionLimit)) {
    throw RetractionDomainError(std::string(what) + " is numerically singular");
  }
  return Eigen::PartialPivLU<SquareMatrix<D>>(a);
}

}  // namespace detail

/// cay(xi) = (I - xi/2)^{-1} (I + xi/2).
template <int D>
SquareMatrix<D> cay_matrix(const SquareMatrix<D>& xi) {
  const SquareMatrix<D> id = SquareMatrix<D>::Identity();
  auto lu = detail::checked_lu<D>(id - 0.5 * xi, "I - xi/2");
  return lu.solve(id + 0.5 * xi);
}

/// Inverse of the Cayley map: xi = 2 (g + I)^{-1} (g - I).
template <int D>
SquareMatrix<D> cay_inverse_matrix(const SquareMatrix<D>& g) {
  const SquareMatrix<D> id = SquareMatrix<D>::Identity();
  auto lu = detail::checked_lu<D>(g + id, "g + I");
  return 2.0 * lu.solve(g - id);
}

/// Right-trivialized tangent: (I - xi/2)^{-1} eta (I + xi/2)^{-1}.
template <int D>
SquareMatrix<D> dcay_matrix(const SquareMatrix<D>& xi,
                            const SquareMatrix<D>& eta) {
  const SquareMatrix<D> id = SquareMatrix<D>::Identity();
  auto left = detail::checked_lu<D>(id - 0.5 * xi, "I - xi/2");
  const SquareMatrix<D> rt = (id + 0.5 * xi).transpose();
  auto right = detail::checked_lu<D>(rt, "I + xi/2");
  // X (I + xi/2)^{-1} = ((I + xi/2)^{-T} X^T)^T
  const SquareMatrix<D> at = left.solve(eta).transpose();
  return right.solve(at).transpose();
}

/// Inverse right-trivialized tangent: (I - xi/2) eta (I + xi/2).
template <int D>
SquareMatrix<D> dcay_inv_matrix(const SquareMatrix<D>& xi,
                                const SquareMatrix<D>& eta) {
  const SquareMatrix<D> id = SquareMatrix<D>::Identity();
  return (id - 0.5 * xi) * eta * (id + 0.5 * xi);
}

namespace so3 {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Basis matrix e_{gamma+1}, gamma in {0,1,2}.
Mat3 basis(int gamma);

Mat3 hat(const Vec3& xi);

/// Exact inverse of hat on skew-symmetric input (reads the off-diagonal
/// entries directly).
Vec3 vee(const Mat3& a);

/// Projects onto so(3) through the skew part before taking vee. Throws
/// std::logic_error if the symmetric residue exceeds 1e-12 relative to |a|;
/// callers only pass matrices that are skew in exact arithmetic.
Vec3 vee_projected(const Mat3& a);

Mat3 cay(const Vec3& xi);

/// Coordinates of cay^{-1}(g).
Vec3 cay_inv(const Mat3& g);

Vec3 dcay(const Vec3& xi, const Vec3& eta);
Vec3 dcay_inv(const Vec3& xi, const Vec3& eta);

/// Coordinate matrices of the linear maps eta -> dcay_xi(eta) and
/// eta -> dcay_xi^{-1}(eta); column gamma is the image of e_gamma.
Mat3 dcay_operator(const Vec3& xi);
Mat3 dcay_inv_operator(const Vec3& xi);

/// Ad_g(eta) = vee(g hat(eta) g^{-1}).
Vec3 Ad(const Mat3& g, const Vec3& eta);

/// Coordinate matrix of eta -> Ad_g(eta).
Mat3 Ad_operator(const Mat3& g);

/// Coadjoint action on covectors: <coAd_star(g, mu), eta> = <mu, Ad_g(eta)>.
Vec3 coAd_star(const Mat3& g, const Vec3& mu);

/// Coordinates of [hat(a), hat(b)].
Vec3 bracket(const Vec3& a, const Vec3& b);

}  // namespace so3
}  // namespace lgdm

#endif  // LGDM_RETRACTION_HPP
