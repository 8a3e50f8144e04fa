#ifndef LGDM_FINITE_DIFFERENCE_HPP
#define LGDM_FINITE_DIFFERENCE_HPP

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "lgdm/errors.hpp"

namespace lgdm::fd {

/// Central-difference step: max(1e-5, 1e-7 * (1 + |arg|)).
inline double step_for(const Eigen::VectorXd& arg) {
  return std::max(1e-5, 1e-7 * (1.0 + arg.norm()));
}

/// Central-difference Jacobian of f at a; column k is df/da_k.
template <typename F>
Eigen::MatrixXd jacobian(F&& f, const Eigen::VectorXd& a) {
  if (a.size() == 0) return Eigen::MatrixXd(f(a).size(), 0);
  const double s = step_for(a);
  Eigen::MatrixXd jac;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    Eigen::VectorXd ap = a;
    Eigen::VectorXd am = a;
    ap(k) += s;
    am(k) -= s;
    const double width = ap(k) - am(k);
    if (!(width > 0.0)) {
      throw NumericalDerivativeError("finite-difference step underflow");
    }
    const Eigen::VectorXd col = (f(ap) - f(am)) / width;
    if (!col.allFinite()) {
      throw NumericalDerivativeError("finite-difference produced non-finite values");
    }
    if (k == 0) jac.resize(col.size(), a.size());
    jac.col(k) = col;
  }
  return jac;
}

}  // namespace lgdm::fd

#endif  // LGDM_FINITE_DIFFERENCE_HPP
