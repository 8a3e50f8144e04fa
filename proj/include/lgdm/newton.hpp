#ifndef LGDM_NEWTON_HPP
#define LGDM_NEWTON_HPP

#include <functional>

#include "lgdm/groupoid.hpp"

namespace lgdm {

struct NewtonOptions {
  double tol = 1e-10;     // on the max-norm of the residual
  int max_iters = 50;
  int max_halvings = 8;
  double singular_condition = 1e12;
  // Extra iterations after convergence, kept only if they lower the residual.
  int polish_iters = 2;
};

struct NewtonResult {
  Vector root;
  double residual_norm = 0.0;
  int iterations = 0;
  double jacobian_condition = 0.0;
};

double condition_number(const Matrix& a);

/// Damped Newton: full steps, halved up to max_halvings times while the
/// residual grows. Throws RegularityError on a singular Jacobian and
/// SolverFailure (with the best iterate) when the tolerance is not reached.
NewtonResult newton_solve(const std::function<Vector(const Vector&)>& residual,
                          const std::function<Matrix(const Vector&)>& jacobian,
                          const Vector& guess, const NewtonOptions& opts);

}  // namespace lgdm

#endif  // LGDM_NEWTON_HPP
