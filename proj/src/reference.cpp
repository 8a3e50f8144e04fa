#include "lgdm/reference.hpp"

#include <stdexcept>

namespace lgdm::reference {

PhaseState implicit_midpoint_step(const Matrix& mass, const Potential& v,
                                  double h, const PhaseState& s) {
  const auto minv = mass.ldlt();
  Vector q1 = s.q + h * minv.solve(s.p);
  Vector p1 = s.p;
  for (int it = 0; it < 200; ++it) {
    p1 = s.p - h * v.gradient(0.5 * (s.q + q1));
    const Vector next = s.q + 0.5 * h * minv.solve(s.p + p1);
    const double change = (next - q1).lpNorm<Eigen::Infinity>();
    q1 = next;
    if (change <= 1e-16 * (1.0 + q1.lpNorm<Eigen::Infinity>())) break;
  }
  p1 = s.p - h * v.gradient(0.5 * (s.q + q1));
  return PhaseState{q1, p1};
}

PhaseState leapfrog_step(const Matrix& mass, const Potential& v, double h,
                         const PhaseState& s) {
  const Vector half = s.p - 0.5 * h * v.gradient(s.q);
  const Vector q1 = s.q + h * mass.ldlt().solve(half);
  return PhaseState{q1, half - 0.5 * h * v.gradient(q1)};
}

PhaseState rk2_step(const Matrix& mass, const Potential& v, double h,
                    const PhaseState& s) {
  const auto minv = mass.ldlt();
  const Vector qm = s.q + 0.5 * h * minv.solve(s.p);
  const Vector pm = s.p - 0.5 * h * v.gradient(s.q);
  return PhaseState{s.q + h * minv.solve(pm), s.p - h * v.gradient(qm)};
}

double hamiltonian(const Matrix& mass, const Potential& v, const PhaseState& s) {
  return 0.5 * s.p.dot(mass.ldlt().solve(s.p)) + v.value(s.q);
}

}  // namespace lgdm::reference
