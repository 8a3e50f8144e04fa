#ifndef LGDM_LAGRANGIAN_HPP
#define LGDM_LAGRANGIAN_HPP

#include <functional>
#include <memory>
#include <vector>

#include "lgdm/groupoid.hpp"

namespace lgdm {

/// A real function on the groupoid, in chart coordinates (x, u).
class DiscreteLagrangian {
 public:
  virtual ~DiscreteLagrangian() = default;

  virtual double value(const Vector& x, const Vector& u) const = 0;
  virtual Vector gradient_x(const Vector& x, const Vector& u) const = 0;
  virtual Vector gradient_u(const Vector& x, const Vector& u) const = 0;

  /// When false the solver differences the residual instead of calling the
  /// Hessian routines below.
  virtual bool has_hessians() const { return false; }
  /// d2 L / dx^i du^gamma, n x m.
  virtual Matrix hessian_xu(const Vector& x, const Vector& u) const;
  /// d2 L / du^nu du^gamma, m x m.
  virtual Matrix hessian_uu(const Vector& x, const Vector& u) const;
};

using LagrangianPtr = std::shared_ptr<const DiscreteLagrangian>;

struct LagrangianFunctions {
  std::function<double(const Vector&, const Vector&)> value;
  std::function<Vector(const Vector&, const Vector&)> gradient_x;
  std::function<Vector(const Vector&, const Vector&)> gradient_u;
  std::function<Matrix(const Vector&, const Vector&)> hessian_xu;  // optional
  std::function<Matrix(const Vector&, const Vector&)> hessian_uu;  // optional
};

class FunctionLagrangian final : public DiscreteLagrangian {
 public:
  explicit FunctionLagrangian(LagrangianFunctions fns);

  double value(const Vector& x, const Vector& u) const override {
    return fns_.value(x, u);
  }
  Vector gradient_x(const Vector& x, const Vector& u) const override {
    return fns_.gradient_x(x, u);
  }
  Vector gradient_u(const Vector& x, const Vector& u) const override {
    return fns_.gradient_u(x, u);
  }
  bool has_hessians() const override {
    return static_cast<bool>(fns_.hessian_xu) && static_cast<bool>(fns_.hessian_uu);
  }
  Matrix hessian_xu(const Vector& x, const Vector& u) const override;
  Matrix hessian_uu(const Vector& x, const Vector& u) const override;

 private:
  LagrangianFunctions fns_;
};

/// A chart together with a discrete Lagrangian on it. Construction compares
/// the supplied derivatives against central differences at the validation
/// points and throws ConfigurationError on a mismatch above 1e-6 relative.
class DiscreteLagrangianSystem {
 public:
  DiscreteLagrangianSystem(ChartPtr chart, LagrangianPtr lagrangian,
                           const std::vector<ChartPoint>& validation_points);

  const GroupoidChart& chart() const { return *chart_; }
  const ChartPtr& chart_ptr() const { return chart_; }
  const DiscreteLagrangian& lagrangian() const { return *lagrangian_; }
  const LagrangianPtr& lagrangian_ptr() const { return lagrangian_; }

 private:
  ChartPtr chart_;
  LagrangianPtr lagrangian_;
};

/// Largest relative mismatch between the analytic derivatives and central
/// differences at (x, u): |a - fd| / max(1, |fd|), over all entries.
double derivative_mismatch(const DiscreteLagrangian& l, const Vector& x,
                           const Vector& u);

}  // namespace lgdm

#endif  // LGDM_LAGRANGIAN_HPP
