#ifndef LGDM_GROUPOID_HPP
#define LGDM_GROUPOID_HPP

// Lie groupoids in coordinates adapted to the source map. An element g is a
// pair (x, u): x are coordinates of the source alpha(g) (length n, possibly
// zero) and u are fiber coordinates (length m) with identities at u = 0.
// The groupoid is encoded by three structure functions valid on a symmetric
// neighborhood of the identities:
//
//   target_map(x, u)     coordinates of beta(g)
//   product_map(x, u, v) fiber part of (x, u) . (target_map(x, u), v)
//   inversion_map(x, u)  fiber part of g^{-1}; its base is target_map(x, u)

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgdm/errors.hpp"

namespace lgdm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct ChartPoint {
  Vector x;
  Vector u;
};

enum class DerivativeMode { kAnalytic, kFiniteDifference };

class GroupoidChart {
 public:
  virtual ~GroupoidChart() = default;

  virtual std::string name() const = 0;
  virtual int base_dim() const = 0;
  virtual int fiber_dim() const = 0;

  virtual Vector target_map(const Vector& x, const Vector& u) const = 0;
  virtual Vector product_map(const Vector& x, const Vector& u,
                             const Vector& v) const = 0;
  virtual Vector inversion_map(const Vector& x, const Vector& u) const = 0;

  /// Membership in the symmetric neighborhood W.
  virtual bool in_domain(const Vector& x, const Vector& u) const = 0;

  /// Membership in the enclosing neighborhood U that must contain products
  /// of composable elements of W.
  virtual bool in_enclosing(const Vector& x, const Vector& u) const {
    return in_domain(x, u);
  }

  virtual DerivativeMode derivative_mode() const {
    return DerivativeMode::kFiniteDifference;
  }

  // Derivatives of the structure functions. Defaults are central
  // differences; charts with closed forms override them.

  /// d target_map / du, n x m.
  virtual Matrix target_jacobian_u(const Vector& x, const Vector& u) const;
  /// d target_map / dx, n x n.
  virtual Matrix target_jacobian_x(const Vector& x, const Vector& u) const;
  /// d product_map / du, m x m.
  virtual Matrix product_jacobian_u(const Vector& x, const Vector& u,
                                    const Vector& v) const;
  /// d product_map / dv, m x m.
  virtual Matrix product_jacobian_v(const Vector& x, const Vector& u,
                                    const Vector& v) const;
  /// d inversion_map / du, m x m.
  virtual Matrix inversion_jacobian_u(const Vector& x, const Vector& u) const;
  /// d inversion_map / dx, m x n.
  virtual Matrix inversion_jacobian_x(const Vector& x, const Vector& u) const;

  /// Anchor rho(x) = d target_map / du at (x, 0), n x m.
  virtual Matrix anchor(const Vector& x) const;
  /// L(x, u) = d product_map / dv at (x, u, 0); entry (gamma, mu).
  virtual Matrix left_transport(const Vector& x, const Vector& u) const;
  /// R(x, v) = d product_map / du at (x, 0, v); entry (gamma, mu).
  virtual Matrix right_transport(const Vector& x, const Vector& v) const;
  /// Element k is dR/dv^k at (x, v).
  virtual std::vector<Matrix> right_transport_derivative(const Vector& x,
                                                         const Vector& v) const;
  /// Element gamma holds C^gamma_{mu nu}(x) at (mu, nu).
  virtual std::vector<Matrix> structure_constants(const Vector& x) const;

  Vector zero_fiber() const { return Vector::Zero(fiber_dim()); }
};

using ChartPtr = std::shared_ptr<const GroupoidChart>;

/// Structure functions given as callables; all derivatives by differencing.
struct ChartFunctions {
  std::string name;
  int base_dim = 0;
  int fiber_dim = 0;
  std::function<Vector(const Vector&, const Vector&)> target;
  std::function<Vector(const Vector&, const Vector&, const Vector&)> product;
  std::function<Vector(const Vector&, const Vector&)> inversion;
  std::function<bool(const Vector&, const Vector&)> in_domain;
};

class FunctionChart final : public GroupoidChart {
 public:
  explicit FunctionChart(ChartFunctions fns);

  std::string name() const override { return fns_.name; }
  int base_dim() const override { return fns_.base_dim; }
  int fiber_dim() const override { return fns_.fiber_dim; }
  Vector target_map(const Vector& x, const Vector& u) const override {
    return fns_.target(x, u);
  }
  Vector product_map(const Vector& x, const Vector& u,
                     const Vector& v) const override {
    return fns_.product(x, u, v);
  }
  Vector inversion_map(const Vector& x, const Vector& u) const override {
    return fns_.inversion(x, u);
  }
  bool in_domain(const Vector& x, const Vector& u) const override {
    return fns_.in_domain ? fns_.in_domain(x, u) : true;
  }

 private:
  ChartFunctions fns_;
};

// ---------------------------------------------------------------------------
// Checked operations

ChartPoint identity(const GroupoidChart& chart, const Vector& x);

/// Coordinates of beta(g). Throws OutOfChartError outside W.
Vector target(const GroupoidChart& chart, const ChartPoint& g);

/// Fiber coordinates of g . (target(g), v). Both factors must lie in W and
/// the composite in U.
Vector product(const GroupoidChart& chart, const ChartPoint& g,
               const Vector& v);

/// g^{-1} = (target(g), inversion_map(g)).
ChartPoint inverse(const GroupoidChart& chart, const ChartPoint& g);

struct StructureTensors {
  Matrix rho;                  // n x m, at x
  Matrix left;                 // m x m, L(x, u)
  Matrix right;                // m x m, R(x, v)
  std::vector<Matrix> constants;  // C^gamma_{mu nu}(x), indexed [gamma](mu, nu)
};

StructureTensors structure_tensors(const GroupoidChart& chart, const Vector& x,
                                   const Vector& u, const Vector& v);

struct TangentVector {
  Vector base;
  Vector fiber;
};

/// Left-invariant fields at g: base part 0, fiber part column gamma of L(x,u).
std::vector<TangentVector> left_invariant_basis(const GroupoidChart& chart,
                                                const ChartPoint& g);

/// Right-invariant fields at g: base part -rho_gamma(x), fiber part column
/// gamma of R(x,u).
std::vector<TangentVector> right_invariant_basis(const GroupoidChart& chart,
                                                 const ChartPoint& g);

// ---------------------------------------------------------------------------
// Axiom checking

/// A base point and three fiber vectors. The checker forms the composable
/// triple (x,u), (b(x,u), v), (b(b(x,u),v), w).
struct AxiomSample {
  Vector x;
  Vector u;
  Vector v;
  Vector w;
};

using AxiomSampler = std::function<AxiomSample(std::mt19937_64&)>;

struct AxiomResult {
  std::string name;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct AxiomReport {
  std::vector<AxiomResult> axioms;
  int samples = 0;
  int rejected = 0;

  bool passed() const;
  const AxiomResult* find(const std::string& name) const;
  std::vector<std::string> failed() const;
};

/// Evaluates every groupoid identity on `count` in-domain samples. Identities
/// computed from the chart's derivative routines use `tol` when the chart is
/// analytic and max(tol, 1e-6) when it differences. Throws SamplingError if
/// the sampler keeps producing out-of-domain triples.
AxiomReport check_axioms(const GroupoidChart& chart, const AxiomSampler& sampler,
                         int count, double tol, std::uint64_t seed = 0);

/// Uniform samples in boxes |x_i| <= base_radius, |u_i| <= fiber_radius.
AxiomSampler box_sampler(int base_dim, int fiber_dim, double base_radius,
                         double fiber_radius);

/// Like box_sampler, but every coordinate is a multiple of 2^-bits, so
/// affine structure functions with dyadic coefficients evaluate exactly.
AxiomSampler dyadic_sampler(int base_dim, int fiber_dim, double base_radius,
                            double fiber_radius, int bits = 8);

}  // namespace lgdm

#endif  // LGDM_GROUPOID_HPP
