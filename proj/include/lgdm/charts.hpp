#ifndef LGDM_CHARTS_HPP
#define LGDM_CHARTS_HPP

// Concrete groupoid charts: the pair groupoid M x M, SO(3) in Cayley
// coordinates (a groupoid over a point), and the action groupoid M x SO(3)
// of a right action on an ambient-coordinate manifold.

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>

#include "lgdm/groupoid.hpp"
#include "lgdm/retraction.hpp"

namespace lgdm {

/// u = (x2 - x1) / h. Target x + h u, product u + v, inversion -u.
class PairGroupoidChart final : public GroupoidChart {
 public:
  PairGroupoidChart(int dim, double h);

  std::string name() const override { return "pair"; }
  int base_dim() const override { return dim_; }
  int fiber_dim() const override { return dim_; }
  double time_step() const { return h_; }

  Vector target_map(const Vector& x, const Vector& u) const override;
  Vector product_map(const Vector& x, const Vector& u,
                     const Vector& v) const override;
  Vector inversion_map(const Vector& x, const Vector& u) const override;
  bool in_domain(const Vector& x, const Vector& u) const override;
  DerivativeMode derivative_mode() const override {
    return DerivativeMode::kAnalytic;
  }

  Matrix target_jacobian_u(const Vector& x, const Vector& u) const override;
  Matrix target_jacobian_x(const Vector& x, const Vector& u) const override;
  Matrix product_jacobian_u(const Vector& x, const Vector& u,
                            const Vector& v) const override;
  Matrix product_jacobian_v(const Vector& x, const Vector& u,
                            const Vector& v) const override;
  Matrix inversion_jacobian_u(const Vector& x, const Vector& u) const override;
  Matrix inversion_jacobian_x(const Vector& x, const Vector& u) const override;
  Matrix anchor(const Vector& x) const override;
  Matrix left_transport(const Vector& x, const Vector& u) const override;
  Matrix right_transport(const Vector& x, const Vector& v) const override;
  std::vector<Matrix> right_transport_derivative(const Vector& x,
                                                 const Vector& v) const override;
  std::vector<Matrix> structure_constants(const Vector& x) const override;

 private:
  int dim_;
  double h_;
};

/// SO(3) over a single point. Fiber coordinates eta stand for the rotation
/// cay(h * hat(eta)); the product is (1/h) cay^{-1}(cay(h u) cay(h v)).
///
/// The symmetric neighborhood is |h u| < radius (default 2, i.e. rotation
/// angles below pi/2), which keeps products of two chart elements away from
/// the half-turns where cay^{-1} is undefined. The enclosing neighborhood is
/// |h w| < 1e6, where cond(I - h hat(w) / 2) stays below 1e6.
class So3CayleyChart final : public GroupoidChart {
 public:
  explicit So3CayleyChart(double h, double radius = 2.0);

  std::string name() const override { return "so3"; }
  int base_dim() const override { return 0; }
  int fiber_dim() const override { return 3; }
  double time_step() const { return h_; }
  double radius() const { return radius_; }

  Vector target_map(const Vector& x, const Vector& u) const override;
  Vector product_map(const Vector& x, const Vector& u,
                     const Vector& v) const override;
  Vector inversion_map(const Vector& x, const Vector& u) const override;
  bool in_domain(const Vector& x, const Vector& u) const override;
  bool in_enclosing(const Vector& x, const Vector& u) const override;
  DerivativeMode derivative_mode() const override {
    return DerivativeMode::kAnalytic;
  }

  Matrix target_jacobian_u(const Vector& x, const Vector& u) const override;
  Matrix target_jacobian_x(const Vector& x, const Vector& u) const override;
  Matrix product_jacobian_u(const Vector& x, const Vector& u,
                            const Vector& v) const override;
  Matrix product_jacobian_v(const Vector& x, const Vector& u,
                            const Vector& v) const override;
  Matrix inversion_jacobian_u(const Vector& x, const Vector& u) const override;
  Matrix inversion_jacobian_x(const Vector& x, const Vector& u) const override;
  Matrix anchor(const Vector& x) const override;
  Matrix left_transport(const Vector& x, const Vector& u) const override;
  Matrix right_transport(const Vector& x, const Vector& v) const override;
  std::vector<Matrix> right_transport_derivative(const Vector& x,
                                                 const Vector& v) const override;
  std::vector<Matrix> structure_constants(const Vector& x) const override;

  /// cay(h hat(eta)).
  so3::Mat3 group_element(const Vector& eta) const;
  /// Inverse of group_element; throws RetractionDomainError at half-turns.
  Vector coordinates(const so3::Mat3& g) const;
  /// True if g is represented inside this chart's symmetric neighborhood.
  bool represents(const so3::Mat3& g) const;

 private:
  double h_;
  double radius_;
  double enclosing_radius_ = 1e6;
};

/// A right action of SO(3) on a manifold held in ambient coordinates.
struct RightAction {
  std::string name;
  int dim = 0;
  /// x . g
  std::function<Vector(const Vector&, const so3::Mat3&)> act;
  /// Infinitesimal generator (e_gamma)_M(x) = d/dt x . exp(t e_gamma) at 0.
  /// Optional; differenced from `act` when absent.
  std::function<Vector(const Vector&, int)> generator;
  /// Manifold membership of an ambient point.
  std::function<bool(const Vector&)> on_manifold;
  /// Random point on the manifold, used for validation and axiom sampling.
  std::function<Vector(std::mt19937_64&)> sample;
};

/// Row-vector action Gamma . g on the unit sphere in R^3.
RightAction sphere_row_action();

/// M x SO(3) over M with alpha(x, g) = x, beta(x, g) = x . g. Fiber
/// coordinates are those of the SO(3) Cayley chart; the base stays in
/// ambient coordinates.
class ActionGroupoidChart final : public GroupoidChart {
 public:
  ActionGroupoidChart(std::shared_ptr<const So3CayleyChart> group,
                      RightAction action);

  std::string name() const override { return "action"; }
  int base_dim() const override { return action_.dim; }
  int fiber_dim() const override { return 3; }
  double time_step() const { return group_->time_step(); }
  const So3CayleyChart& group_chart() const { return *group_; }
  const RightAction& action() const { return action_; }

  Vector target_map(const Vector& x, const Vector& u) const override;
  Vector product_map(const Vector& x, const Vector& u,
                     const Vector& v) const override;
  Vector inversion_map(const Vector& x, const Vector& u) const override;
  bool in_domain(const Vector& x, const Vector& u) const override;
  bool in_enclosing(const Vector& x, const Vector& u) const override;
  DerivativeMode derivative_mode() const override {
    return DerivativeMode::kAnalytic;
  }

  Matrix product_jacobian_u(const Vector& x, const Vector& u,
                            const Vector& v) const override;
  Matrix product_jacobian_v(const Vector& x, const Vector& u,
                            const Vector& v) const override;
  Matrix inversion_jacobian_u(const Vector& x, const Vector& u) const override;
  Matrix inversion_jacobian_x(const Vector& x, const Vector& u) const override;
  Matrix anchor(const Vector& x) const override;
  Matrix left_transport(const Vector& x, const Vector& u) const override;
  Matrix right_transport(const Vector& x, const Vector& v) const override;
  std::vector<Matrix> right_transport_derivative(const Vector& x,
                                                 const Vector& v) const override;
  std::vector<Matrix> structure_constants(const Vector& x) const override;

  /// x_{k+1} = x_k . cay(h eta).
  Vector base_update(const Vector& x, const Vector& eta) const;
  /// (e_gamma)_M(x).
  Vector infinitesimal_generator(const Vector& x, int gamma) const;

 private:
  std::shared_ptr<const So3CayleyChart> group_;
  RightAction action_;
};

std::shared_ptr<const PairGroupoidChart> make_pair_groupoid(int dim, double h);
std::shared_ptr<const So3CayleyChart> make_so3_group_chart(double h);
/// Validates the identity law of the action on sampled base points.
std::shared_ptr<const ActionGroupoidChart> make_action_groupoid(
    std::shared_ptr<const So3CayleyChart> group, RightAction action,
    std::uint64_t seed = 0);

/// Fiber vectors uniform in the ball |u| <= fiber_radius.
AxiomSampler so3_sampler(double fiber_radius);
/// Base points from the action's sampler, fibers as in so3_sampler.
AxiomSampler action_sampler(const ActionGroupoidChart& chart,
                            double fiber_radius);

}  // namespace lgdm

#endif  // LGDM_CHARTS_HPP
