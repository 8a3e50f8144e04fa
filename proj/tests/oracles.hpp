#ifndef LGDM_TESTS_ORACLES_HPP
#define LGDM_TESTS_ORACLES_HPP

// Test-side reference computations. Written directly from the defining
// formulas so they do not share code paths with the library.

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using V3 = Eigen::Vector3d;
using M3 = Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline M3 skew(const V3& a) {
  M3 m;
  m << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return m;
}

/// cay(hat(a)) in closed form: I + 4/(4 + |a|^2) (A + A^2 / 2).
inline M3 cayley(const V3& a) {
  const M3 A = skew(a);
  return M3::Identity() + (4.0 / (4.0 + a.squaredNorm())) * (A + 0.5 * A * A);
}

/// Inverse of cayley for a rotation with trace > -1: 2 (g - g^T) / (1 + tr g)
/// read as a vector.
inline V3 cayley_inverse(const M3& g) {
  const M3 s = (g - g.transpose()) * (2.0 / (1.0 + g.trace()));
  return V3(s(2, 1), s(0, 2), s(1, 0));
}

/// Scalar bisection on [a, b] with f(a) f(b) <= 0, to |b - a| < 1e-15 scale.
inline double bisect(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Implicit midpoint for q'' = -(k/m) q as the exact 2x2 linear solve.
struct Phase {
  double q;
  double p;
};

inline Phase oscillator_midpoint(double m, double k, double h, Phase s) {
  // [1, -h/(2m); h k/2, 1] [q1; p1] = [q + h p/(2m); p - h k q/2]
  Eigen::Matrix2d a;
  a << 1.0, -h / (2.0 * m), h * k / 2.0, 1.0;
  Eigen::Vector2d rhs(s.q + h * s.p / (2.0 * m), s.p - h * k * s.q / 2.0);
  const Eigen::Vector2d sol = a.fullPivLu().solve(rhs);
  return Phase{sol(0), sol(1)};
}

inline Phase oscillator_leapfrog(double m, double k, double h, Phase s) {
  const double half = s.p - 0.5 * h * k * s.q;
  const double q1 = s.q + h * half / m;
  return Phase{q1, half - 0.5 * h * k * q1};
}

/// Explicit midpoint Runge-Kutta for the oscillator.
inline Phase oscillator_rk2(double m, double k, double h, Phase s) {
  const double qm = s.q + 0.5 * h * s.p / m;
  const double pm = s.p - 0.5 * h * k * s.q;
  return Phase{s.q + h * pm / m, s.p - h * k * qm};
}

inline double oscillator_energy(double m, double k, Phase s) {
  return 0.5 * s.p * s.p / m + 0.5 * k * s.q * s.q;
}

/// Central-difference Jacobian with a fixed step.
inline MatrixXd numeric_jacobian(const std::function<VectorXd(const VectorXd&)>& f,
                                 const VectorXd& a, double step = 1e-5) {
  const VectorXd f0 = f(a);
  MatrixXd j(f0.size(), a.size());
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    VectorXd ap = a, am = a;
    ap(k) += step;
    am(k) -= step;
    j.col(k) = (f(ap) - f(am)) / (2.0 * step);
  }
  return j;
}

inline V3 random_ball(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u;
  V3 d(n(rng), n(rng), n(rng));
  return d.normalized() * radius * std::cbrt(u(rng));
}

inline V3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return V3(n(rng), n(rng), n(rng)).normalized();
}

/// Least-squares slope of ys against 0, 1, 2, ...
inline double slope(const std::vector<double>& ys) {
  const double n = static_cast<double>(ys.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double x = static_cast<double>(i);
    sx += x;
    sy += ys[i];
    sxx += x * x;
    sxy += x * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle

#endif  // LGDM_TESTS_ORACLES_HPP
