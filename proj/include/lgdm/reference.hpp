#ifndef LGDM_REFERENCE_HPP
#define LGDM_REFERENCE_HPP

// Classical one-step integrators in canonical (q, p) form for
// H = 1/2 p^T M^{-1} p + V(q). Written without any groupoid machinery so
// they can serve as independent baselines.

#include "lgdm/systems.hpp"

namespace lgdm::reference {

struct PhaseState {
  Vector q;
  Vector p;
};

/// q1 = q + h M^{-1} (p + p1)/2, p1 = p - h grad V((q + q1)/2), solved by
/// fixed-point iteration on q1.
PhaseState implicit_midpoint_step(const Matrix& mass, const Potential& v,
                                  double h, const PhaseState& s);

/// Kick-drift-kick leapfrog.
PhaseState leapfrog_step(const Matrix& mass, const Potential& v, double h,
                         const PhaseState& s);

/// Explicit midpoint Runge-Kutta (second order, not symplectic).
PhaseState rk2_step(const Matrix& mass, const Potential& v, double h,
                    const PhaseState& s);

double hamiltonian(const Matrix& mass, const Potential& v, const PhaseState& s);

}  // namespace lgdm::reference

#endif  // LGDM_REFERENCE_HPP
