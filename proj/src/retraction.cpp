#include "lgdm/retraction.hpp"

#include <cmath>
#include <stdexcept>

namespace lgdm::so3 {

Mat3 basis(int gamma) {
  Vec3 coords = Vec3::Zero();
  coords(gamma) = 1.0;
  return hat(coords);
}

Mat3 hat(const Vec3& xi) {
  Mat3 a;
  a << 0.0, -xi(2), xi(1),
       xi(2), 0.0, -xi(0),
       -xi(1), xi(0), 0.0;
  return a;
}

Vec3 vee(const Mat3& a) { return Vec3(a(2, 1), a(0, 2), a(1, 0)); }

Vec3 vee_projected(const Mat3& a) {
  const Mat3 skew = 0.5 * (a - a.transpose());
  const Mat3 sym = 0.5 * (a + a.transpose());
  if (sym.norm() > 1e-12 * std::max(1.0, a.norm())) {
    throw std::logic_error("vee_projected: matrix is not in so(3)");
  }
  return vee(skew);
}

Mat3 cay(const Vec3& xi) { return cay_matrix<3>(hat(xi)); }

// No skew check here: near half-turns (g + I)^{-1} amplifies the
// non-orthogonality of g, and the skew part is the nearest algebra element.
Vec3 cay_inv(const Mat3& g) {
  const Mat3 a = cay_inverse_matrix<3>(g);
  return vee(0.5 * (a - a.transpose()));
}

Vec3 dcay(const Vec3& xi, const Vec3& eta) {
  return vee_projected(dcay_matrix<3>(hat(xi), hat(eta)));
}

Vec3 dcay_inv(const Vec3& xi, const Vec3& eta) {
  return vee_projected(dcay_inv_matrix<3>(hat(xi), hat(eta)));
}

Mat3 dcay_operator(const Vec3& xi) {
  Mat3 op;
  for (int g = 0; g < 3; ++g) op.col(g) = dcay(xi, Vec3::Unit(g));
  return op;
}

Mat3 dcay_inv_operator(const Vec3& xi) {
  Mat3 op;
  for (int g = 0; g < 3; ++g) op.col(g) = dcay_inv(xi, Vec3::Unit(g));
  return op;
}

Vec3 Ad(const Mat3& g, const Vec3& eta) {
  return vee_projected(g * hat(eta) * g.inverse());
}

Mat3 Ad_operator(const Mat3& g) {
  Mat3 op;
  for (int c = 0; c < 3; ++c) op.col(c) = Ad(g, Vec3::Unit(c));
  return op;
}

Vec3 coAd_star(const Mat3& g, const Vec3& mu) {
  return Ad_operator(g).transpose() * mu;
}

Vec3 bracket(const Vec3& a, const Vec3& b) {
  const Mat3 A = hat(a);
  const Mat3 B = hat(b);
  return vee(A * B - B * A);
}

}  // namespace lgdm::so3
