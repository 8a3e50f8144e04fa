#ifndef LGDM_SYSTEMS_HPP
#define LGDM_SYSTEMS_HPP

// Concrete discrete Lagrangians with analytic derivatives, their energy
// observables, and the explicit component equations for SO(3) and the heavy
// top used as independent oracles.

#include <functional>
#include <memory>
#include <string>

#include "lgdm/charts.hpp"
#include "lgdm/lagrangian.hpp"

namespace lgdm {

struct Potential {
  std::string name;
  int dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;  // optional
};

/// V(x) = 1/2 x^T K x.
Potential harmonic_potential(const Matrix& stiffness);
/// V(x) = c . x, e.g. c = m g e_z for uniform gravity.
Potential linear_potential(const Vector& slope);
Potential zero_potential(int dim);

/// Shared checks: M square, symmetric, cond(M) < 1e10; V matches M's size.
void validate_mass_and_potential(const Matrix& mass, const Potential& v);

/// L_d(x, u) = (h/2) u^T M u - h V(x + (h/2) u).
class MidpointLagrangian final : public DiscreteLagrangian {
 public:
  MidpointLagrangian(Matrix mass, Potential potential, double h);

  double value(const Vector& x, const Vector& u) const override;
  Vector gradient_x(const Vector& x, const Vector& u) const override;
  Vector gradient_u(const Vector& x, const Vector& u) const override;
  bool has_hessians() const override { return static_cast<bool>(v_.hessian); }
  Matrix hessian_xu(const Vector& x, const Vector& u) const override;
  Matrix hessian_uu(const Vector& x, const Vector& u) const override;

 private:
  Matrix m_;
  Potential v_;
  double h_;
};

/// L_d(x, u) = (h/2) (L(x, u) + L(x + h u, u)) with L = 1/2 u^T M u - V(x).
class StormerVerletLagrangian final : public DiscreteLagrangian {
 public:
  StormerVerletLagrangian(Matrix mass, Potential potential, double h);

  double value(const Vector& x, const Vector& u) const override;
  Vector gradient_x(const Vector& x, const Vector& u) const override;
  Vector gradient_u(const Vector& x, const Vector& u) const override;
  bool has_hessians() const override { return static_cast<bool>(v_.hessian); }
  Matrix hessian_xu(const Vector& x, const Vector& u) const override;
  Matrix hessian_uu(const Vector& x, const Vector& u) const override;

 private:
  Matrix m_;
  Potential v_;
  double h_;
};

/// l(eta) = 1/2 eta^T I eta on the SO(3) chart (empty base).
class RigidBodyLagrangian final : public DiscreteLagrangian {
 public:
  explicit RigidBodyLagrangian(const so3::Vec3& inertia);

  double value(const Vector& x, const Vector& u) const override;
  Vector gradient_x(const Vector& x, const Vector& u) const override;
  Vector gradient_u(const Vector& x, const Vector& u) const override;
  bool has_hessians() const override { return true; }
  Matrix hessian_xu(const Vector& x, const Vector& u) const override;
  Matrix hessian_uu(const Vector& x, const Vector& u) const override;

  const so3::Vec3& inertia() const { return inertia_; }

 private:
  so3::Vec3 inertia_;
};

struct HeavyTopParameters {
  so3::Vec3 inertia{1.0, 1.0, 1.0};
  double mass = 1.0;
  double gravity = 9.81;
  double distance = 1.0;
  so3::Vec3 body_axis{0.0, 0.0, 1.0};  // unit vector e

  double mgd() const { return mass * gravity * distance; }
};

/// L(Gamma, Omega) = 1/2 Omega . I Omega - m g d Gamma . e on the action
/// groupoid S^2 x SO(3), Gamma in ambient coordinates.
class HeavyTopLagrangian final : public DiscreteLagrangian {
 public:
  explicit HeavyTopLagrangian(const HeavyTopParameters& params);

  double value(const Vector& x, const Vector& u) const override;
  Vector gradient_x(const Vector& x, const Vector& u) const override;
  Vector gradient_u(const Vector& x, const Vector& u) const override;
  bool has_hessians() const override { return true; }
  Matrix hessian_xu(const Vector& x, const Vector& u) const override;
  Matrix hessian_uu(const Vector& x, const Vector& u) const override;

  const HeavyTopParameters& parameters() const { return p_; }

 private:
  HeavyTopParameters p_;
};

// ---------------------------------------------------------------------------
// Ready-made systems (chart + Lagrangian, derivatives validated)

std::shared_ptr<const DiscreteLagrangianSystem> make_midpoint_system(
    const Matrix& mass, const Potential& potential, double h);
std::shared_ptr<const DiscreteLagrangianSystem> make_stormer_verlet_system(
    const Matrix& mass, const Potential& potential, double h);
std::shared_ptr<const DiscreteLagrangianSystem> make_rigid_body_system(
    const so3::Vec3& inertia, double h);
std::shared_ptr<const DiscreteLagrangianSystem> make_heavy_top_system(
    const HeavyTopParameters& params, double h);

// ---------------------------------------------------------------------------
// Energy observables, from the momentum F-(x_k, u_k)

/// p = mu / h, E = 1/2 p^T M^{-1} p + V(q).
double pair_energy(const Matrix& mass, const Potential& potential, double h,
                   const Vector& q, const Vector& mu);
double rigid_body_energy(const so3::Vec3& inertia, const Vector& mu);
double heavy_top_energy(const HeavyTopParameters& params, const Vector& gamma,
                        const Vector& mu);

// ---------------------------------------------------------------------------
// Explicit discrete Euler-Poincare equations on SO(3)

enum class Transcription {
  /// Exactly as displayed, including the h^2 z / 4 factor in the third
  /// equation (z where z^2 belongs) and, for the heavy top, the displayed
  /// sign of the m g d terms.
  kVerbatim,
  /// Factors and signs repaired to agree with the bracketed pairing form.
  kCorrected,
};

using Gradient3 = std::function<so3::Vec3(const so3::Vec3&)>;

/// Pairing form
///   < e_g - (h/2)[e_g, A_k] - (h^2/4) A_k e_g A_k, dl(eta_k) >
/// - < e_g + (h/2)[e_g, A_1] - (h^2/4) A_1 e_g A_1, dl(eta_1) >
/// with A = hat(eta) and <X, p> = vee(X) . p.
so3::Vec3 so3_explicit_dep_residual(double h, const so3::Vec3& eta_k,
                                    const so3::Vec3& eta_next,
                                    const Gradient3& dl);

/// The three long (x, y, z) component equations.
so3::Vec3 so3_component_residual(double h, const so3::Vec3& eta_k,
                                 const so3::Vec3& eta_next, const Gradient3& dl,
                                 Transcription form);

struct HeavyTopResidual {
  so3::Vec3 dynamics;
  so3::Vec3 gamma_update;  // Gamma_{k+1} - Gamma_k cay(h eta_k), row form
};

/// Pairing form with the gravity term + h (Gamma_{k+1} e_g) . dL/dGamma.
HeavyTopResidual heavy_top_pairing_residual(const HeavyTopParameters& params,
                                            double h, const so3::Vec3& gamma_k,
                                            const so3::Vec3& omega_k,
                                            const so3::Vec3& gamma_next,
                                            const so3::Vec3& omega_next);

/// The three displayed I1, I2, I3 component equations and the Gamma update.
HeavyTopResidual heavy_top_explicit_residual(const HeavyTopParameters& params,
                                             double h, const so3::Vec3& gamma_k,
                                             const so3::Vec3& omega_k,
                                             const so3::Vec3& gamma_next,
                                             const so3::Vec3& omega_next,
                                             Transcription form);

}  // namespace lgdm

#endif  // LGDM_SYSTEMS_HPP
