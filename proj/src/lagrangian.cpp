#include "lgdm/lagrangian.hpp"

#include <algorithm>
#include <sstream>

#include "lgdm/finite_difference.hpp"

namespace lgdm {

Matrix DiscreteLagrangian::hessian_xu(const Vector&, const Vector&) const {
  throw std::logic_error("hessian_xu not provided by this Lagrangian");
}

Matrix DiscreteLagrangian::hessian_uu(const Vector&, const Vector&) const {
  throw std::logic_error("hessian_uu not provided by this Lagrangian");
}

FunctionLagrangian::FunctionLagrangian(LagrangianFunctions fns)
    : fns_(std::move(fns)) {
  if (!fns_.value || !fns_.gradient_x || !fns_.gradient_u) {
    throw ConfigurationError("Lagrangian needs value and both gradients");
  }
}

Matrix FunctionLagrangian::hessian_xu(const Vector& x, const Vector& u) const {
  if (!fns_.hessian_xu) return DiscreteLagrangian::hessian_xu(x, u);
  return fns_.hessian_xu(x, u);
}

Matrix FunctionLagrangian::hessian_uu(const Vector& x, const Vector& u) const {
  if (!fns_.hessian_uu) return DiscreteLagrangian::hessian_uu(x, u);
  return fns_.hessian_uu(x, u);
}

namespace {

double relative_gap(const Matrix& analytic, const Matrix& numeric) {
  if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i];
    const double n = numeric.data()[i];
    worst = std::max(worst, std::abs(a - n) / std::max(1.0, std::abs(n)));
  }
  return worst;
}

}  // namespace

double derivative_mismatch(const DiscreteLagrangian& l, const Vector& x,
                           const Vector& u) {
  auto value_x = [&](const Vector& a) {
    Vector out(1);
    out(0) = l.value(a, u);
    return out;
  };
  auto value_u = [&](const Vector& a) {
    Vector out(1);
    out(0) = l.value(x, a);
    return out;
  };
  double worst = 0.0;
  if (x.size() > 0) {
    worst = std::max(worst, relative_gap(l.gradient_x(x, u),
                                         fd::jacobian(value_x, x).transpose()));
  }
  worst = std::max(worst, relative_gap(l.gradient_u(x, u),
                                       fd::jacobian(value_u, u).transpose()));
  if (l.has_hessians()) {
    // column gamma of d(grad_u)/dx is row gamma of H_xu
    if (x.size() > 0) {
      const Matrix dgu_dx =
          fd::jacobian([&](const Vector& a) { return l.gradient_u(a, u); }, x);
      worst = std::max(worst, relative_gap(l.hessian_xu(x, u), dgu_dx.transpose()));
    }
    const Matrix dgu_du =
        fd::jacobian([&](const Vector& a) { return l.gradient_u(x, a); }, u);
    worst = std::max(worst, relative_gap(l.hessian_uu(x, u), dgu_du));
  }
  return worst;
}

DiscreteLagrangianSystem::DiscreteLagrangianSystem(
    ChartPtr chart, LagrangianPtr lagrangian,
    const std::vector<ChartPoint>& validation_points)
    : chart_(std::move(chart)), lagrangian_(std::move(lagrangian)) {
  if (!chart_ || !lagrangian_) {
    throw ConfigurationError("system needs a chart and a Lagrangian");
  }
  for (const auto& p : validation_points) {
    if (p.x.size() != chart_->base_dim() || p.u.size() != chart_->fiber_dim()) {
      throw ConfigurationError("validation point has wrong dimensions");
    }
    const double gap = derivative_mismatch(*lagrangian_, p.x, p.u);
    if (!(gap <= 1e-6)) {
      std::ostringstream msg;
      msg << "Lagrangian derivatives disagree with finite differences (gap "
          << gap << ")";
      throw ConfigurationError(msg.str());
    }
  }
}

}  // namespace lgdm
