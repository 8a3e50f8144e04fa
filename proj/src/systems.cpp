#include "lgdm/systems.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "lgdm/newton.hpp"

namespace lgdm {

using so3::Mat3;
using so3::Vec3;

Potential harmonic_potential(const Matrix& stiffness) {
  if (stiffness.rows() != stiffness.cols() || stiffness.rows() < 1) {
    throw ConfigurationError("stiffness must be a non-empty square matrix");
  }
  Potential v;
  v.name = "harmonic";
  v.dim = static_cast<int>(stiffness.rows());
  v.value = [stiffness](const Vector& x) { return 0.5 * x.dot(stiffness * x); };
  v.gradient = [stiffness](const Vector& x) -> Vector {
    return 0.5 * (stiffness + stiffness.transpose()) * x;
  };
  v.hessian = [stiffness](const Vector&) -> Matrix {
    return 0.5 * (stiffness + stiffness.transpose());
  };
  return v;
}

Potential linear_potential(const Vector& slope) {
  Potential v;
  v.name = "linear";
  v.dim = static_cast<int>(slope.size());
  v.value = [slope](const Vector& x) { return slope.dot(x); };
  v.gradient = [slope](const Vector&) -> Vector { return slope; };
  const auto n = slope.size();
  v.hessian = [n](const Vector&) -> Matrix { return Matrix::Zero(n, n); };
  return v;
}

Potential zero_potential(int dim) {
  Potential v = linear_potential(Vector::Zero(dim));
  v.name = "zero";
  return v;
}

void validate_mass_and_potential(const Matrix& mass, const Potential& v) {
  if (mass.rows() != mass.cols() || mass.rows() < 1) {
    throw ConfigurationError("mass matrix must be square and non-empty");
  }
  if (!mass.allFinite() ||
      (mass - mass.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(1.0, mass.cwiseAbs().maxCoeff())) {
    throw ConfigurationError("mass matrix must be symmetric");
  }
  if (!(condition_number(mass) < 1e10)) {
    throw ConfigurationError("mass matrix is singular or badly conditioned");
  }
  if (v.dim != mass.rows() || !v.value || !v.gradient) {
    throw ConfigurationError("potential does not match the mass matrix size");
  }
}

// ---------------------------------------------------------------------------

MidpointLagrangian::MidpointLagrangian(Matrix mass, Potential potential, double h)
    : m_(std::move(mass)), v_(std::move(potential)), h_(h) {
  validate_mass_and_potential(m_, v_);
  if (!(h_ > 0.0)) throw ConfigurationError("h must be positive");
}

double MidpointLagrangian::value(const Vector& x, const Vector& u) const {
  return 0.5 * h_ * u.dot(m_ * u) - h_ * v_.value(x + 0.5 * h_ * u);
}

Vector MidpointLagrangian::gradient_x(const Vector& x, const Vector& u) const {
  return -h_ * v_.gradient(x + 0.5 * h_ * u);
}

Vector MidpointLagrangian::gradient_u(const Vector& x, const Vector& u) const {
  return h_ * (m_ * u) - 0.5 * h_ * h_ * v_.gradient(x + 0.5 * h_ * u);
}

Matrix MidpointLagrangian::hessian_xu(const Vector& x, const Vector& u) const {
  return -0.5 * h_ * h_ * v_.hessian(x + 0.5 * h_ * u);
}

Matrix MidpointLagrangian::hessian_uu(const Vector& x, const Vector& u) const {
  return h_ * m_ - 0.25 * h_ * h_ * h_ * v_.hessian(x + 0.5 * h_ * u);
}

StormerVerletLagrangian::StormerVerletLagrangian(Matrix mass, Potential potential,
                                                 double h)
    : m_(std::move(mass)), v_(std::move(potential)), h_(h) {
  validate_mass_and_potential(m_, v_);
  if (!(h_ > 0.0)) throw ConfigurationError("h must be positive");
}

double StormerVerletLagrangian::value(const Vector& x, const Vector& u) const {
  return 0.5 * h_ * u.dot(m_ * u) -
         0.5 * h_ * (v_.value(x) + v_.value(x + h_ * u));
}

Vector StormerVerletLagrangian::gradient_x(const Vector& x, const Vector& u) const {
  return -0.5 * h_ * (v_.gradient(x) + v_.gradient(x + h_ * u));
}

Vector StormerVerletLagrangian::gradient_u(const Vector& x, const Vector& u) const {
  return h_ * (m_ * u) - 0.5 * h_ * h_ * v_.gradient(x + h_ * u);
}

Matrix StormerVerletLagrangian::hessian_xu(const Vector& x, const Vector& u) const {
  return -0.5 * h_ * h_ * v_.hessian(x + h_ * u);
}

Matrix StormerVerletLagrangian::hessian_uu(const Vector& x, const Vector& u) const {
  return h_ * m_ - 0.5 * h_ * h_ * h_ * v_.hessian(x + h_ * u);
}

RigidBodyLagrangian::RigidBodyLagrangian(const Vec3& inertia) : inertia_(inertia) {
  if (!(inertia_.minCoeff() > 0.0) || !inertia_.allFinite()) {
    throw ConfigurationError("principal moments of inertia must be positive");
  }
}

double RigidBodyLagrangian::value(const Vector&, const Vector& u) const {
  return 0.5 * u.dot(inertia_.cwiseProduct(Vec3(u)));
}

Vector RigidBodyLagrangian::gradient_x(const Vector&, const Vector&) const {
  return Vector(0);
}

Vector RigidBodyLagrangian::gradient_u(const Vector&, const Vector& u) const {
  return inertia_.cwiseProduct(Vec3(u));
}

Matrix RigidBodyLagrangian::hessian_xu(const Vector&, const Vector&) const {
  return Matrix::Zero(0, 3);
}

Matrix RigidBodyLagrangian::hessian_uu(const Vector&, const Vector&) const {
  return Matrix(inertia_.asDiagonal());
}

HeavyTopLagrangian::HeavyTopLagrangian(const HeavyTopParameters& params)
    : p_(params) {
  if (!(p_.inertia.minCoeff() > 0.0) || !p_.inertia.allFinite()) {
    throw ConfigurationError("principal moments of inertia must be positive");
  }
  if (std::abs(p_.body_axis.norm() - 1.0) > 1e-12) {
    throw ConfigurationError("body axis e must be a unit vector");
  }
  if (!std::isfinite(p_.mgd())) {
    throw ConfigurationError("m, g, d must be finite");
  }
}

double HeavyTopLagrangian::value(const Vector& x, const Vector& u) const {
  return 0.5 * u.dot(p_.inertia.cwiseProduct(Vec3(u))) -
         p_.mgd() * Vec3(x).dot(p_.body_axis);
}

Vector HeavyTopLagrangian::gradient_x(const Vector&, const Vector&) const {
  return -p_.mgd() * p_.body_axis;
}

Vector HeavyTopLagrangian::gradient_u(const Vector&, const Vector& u) const {
  return p_.inertia.cwiseProduct(Vec3(u));
}

Matrix HeavyTopLagrangian::hessian_xu(const Vector&, const Vector&) const {
  return Matrix::Zero(3, 3);
}

Matrix HeavyTopLagrangian::hessian_uu(const Vector&, const Vector&) const {
  return Matrix(p_.inertia.asDiagonal());
}

// ---------------------------------------------------------------------------

namespace {

std::vector<ChartPoint> pair_points(int n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<ChartPoint> pts;
  for (int k = 0; k < 3; ++k) {
    ChartPoint p{Vector(n), Vector(n)};
    for (int i = 0; i < n; ++i) {
      p.x(i) = unit(rng);
      p.u(i) = unit(rng);
    }
    pts.push_back(p);
  }
  return pts;
}

std::vector<ChartPoint> so3_points(int base_dim) {
  std::vector<ChartPoint> pts;
  const Vec3 etas[] = {Vec3(0.3, -0.2, 0.5), Vec3(-1.0, 0.4, 0.1)};
  for (const auto& e : etas) {
    Vector x(base_dim);
    if (base_dim == 3) x = Vec3(0.6, 0.0, 0.8);
    pts.push_back(ChartPoint{x, Vector(e)});
  }
  return pts;
}

}  // namespace

std::shared_ptr<const DiscreteLagrangianSystem> make_midpoint_system(
    const Matrix& mass, const Potential& potential, double h) {
  auto l = std::make_shared<const MidpointLagrangian>(mass, potential, h);
  const int n = static_cast<int>(mass.rows());
  return std::make_shared<const DiscreteLagrangianSystem>(
      make_pair_groupoid(n, h), l, pair_points(n));
}

std::shared_ptr<const DiscreteLagrangianSystem> make_stormer_verlet_system(
    const Matrix& mass, const Potential& potential, double h) {
  auto l = std::make_shared<const StormerVerletLagrangian>(mass, potential, h);
  const int n = static_cast<int>(mass.rows());
  return std::make_shared<const DiscreteLagrangianSystem>(
      make_pair_groupoid(n, h), l, pair_points(n));
}

std::shared_ptr<const DiscreteLagrangianSystem> make_rigid_body_system(
    const Vec3& inertia, double h) {
  auto l = std::make_shared<const RigidBodyLagrangian>(inertia);
  return std::make_shared<const DiscreteLagrangianSystem>(
      make_so3_group_chart(h), l, so3_points(0));
}

std::shared_ptr<const DiscreteLagrangianSystem> make_heavy_top_system(
    const HeavyTopParameters& params, double h) {
  auto l = std::make_shared<const HeavyTopLagrangian>(params);
  auto chart = make_action_groupoid(make_so3_group_chart(h), sphere_row_action());
  return std::make_shared<const DiscreteLagrangianSystem>(chart, l, so3_points(3));
}

double pair_energy(const Matrix& mass, const Potential& potential, double h,
                   const Vector& q, const Vector& mu) {
  const Vector p = mu / h;
  return 0.5 * p.dot(mass.ldlt().solve(p)) + potential.value(q);
}

double rigid_body_energy(const Vec3& inertia, const Vector& mu) {
  return 0.5 * Vec3(mu).dot(Vec3(mu).cwiseQuotient(inertia));
}

double heavy_top_energy(const HeavyTopParameters& params, const Vector& gamma,
                        const Vector& mu) {
  return rigid_body_energy(params.inertia, mu) +
         params.mgd() * Vec3(gamma).dot(params.body_axis);
}

// ---------------------------------------------------------------------------

so3::Vec3 so3_explicit_dep_residual(double h, const Vec3& eta_k,
                                    const Vec3& eta_next, const Gradient3& dl) {
  const Mat3 ak = so3::hat(eta_k);
  const Mat3 a1 = so3::hat(eta_next);
  const Vec3 pk = dl(eta_k);
  const Vec3 p1 = dl(eta_next);
  Vec3 out;
  for (int g = 0; g < 3; ++g) {
    const Mat3 e = so3::basis(g);
    const Mat3 left = e - 0.5 * h * (e * ak - ak * e) - 0.25 * h * h * ak * e * ak;
    const Mat3 right = e + 0.5 * h * (e * a1 - a1 * e) - 0.25 * h * h * a1 * e * a1;
    out(g) = so3::vee_projected(left).dot(pk) - so3::vee_projected(right).dot(p1);
  }
  return out;
}

namespace {

// Kinetic part of the component equations with generic partials (Lx, Ly, Lz).
Vec3 component_kinetic(double h, const Vec3& k, const Vec3& dk, const Vec3& n,
                       const Vec3& dn, Transcription form) {
  const double x = k(0), y = k(1), z = k(2);
  const double x1 = n(0), y1 = n(1), z1 = n(2);
  const double h2 = h * h;
  // the third equation carries z instead of z^2 as displayed
  const bool verbatim = form == Transcription::kVerbatim;
  const double zq = verbatim ? z : z * z;
  const double zq1 = verbatim ? z1 : z1 * z1;
  Vec3 r;
  r(0) = (1 + h2 * x * x / 4) * dk(0) + (h2 * x * y / 4 + h * z / 2) * dk(1) -
         (h * y / 2 - h2 * x * z / 4) * dk(2) - (1 + h2 * x1 * x1 / 4) * dn(0) +
         (h * z1 / 2 - h2 * x1 * y1 / 4) * dn(1) -
         (h * y1 / 2 + h2 * x1 * z1 / 4) * dn(2);
  // displayed with a dangling "+" inside the first bracket; it adds nothing
  r(1) = (h2 * x * y / 4 - h * z / 2) * dk(0) + (1 + h2 * y * y / 4) * dk(1) +
         (h * x / 2 + h2 * y * z / 4) * dk(2) -
         (h * z1 / 2 + h2 * x1 * y1 / 4) * dn(0) -
         (1 + h2 * y1 * y1 / 4) * dn(1) + (h * x1 / 2 - h2 * y1 * z1 / 4) * dn(2);
  r(2) = (h * y / 2 + h2 * x * z / 4) * dk(0) - (h * x / 2 - h2 * y * z / 4) * dk(1) +
         (1 + h2 * zq / 4) * dk(2) + (h * y1 / 2 - h2 * x1 * z1 / 4) * dn(0) -
         (h * x1 / 2 + h2 * y1 * z1 / 4) * dn(1) - (1 + h2 * zq1 / 4) * dn(2);
  return r;
}

Vec3 gamma_update_defect(double h, const Vec3& gamma_k, const Vec3& omega_k,
                         const Vec3& gamma_next) {
  const Mat3 id = Mat3::Identity();
  const Mat3 a = so3::hat(h * omega_k);
  const Mat3 c = (id - 0.5 * a).inverse() * (id + 0.5 * a);
  // row vector times matrix
  return gamma_next - (gamma_k.transpose() * c).transpose();
}

}  // namespace

so3::Vec3 so3_component_residual(double h, const Vec3& eta_k,
                                 const Vec3& eta_next, const Gradient3& dl,
                                 Transcription form) {
  return component_kinetic(h, eta_k, dl(eta_k), eta_next, dl(eta_next), form);
}

HeavyTopResidual heavy_top_pairing_residual(const HeavyTopParameters& params,
                                            double h, const Vec3& gamma_k,
                                            const Vec3& omega_k,
                                            const Vec3& gamma_next,
                                            const Vec3& omega_next) {
  const Vec3 inertia = params.inertia;
  HeavyTopResidual r;
  r.dynamics = so3_explicit_dep_residual(
      h, omega_k, omega_next,
      [&](const Vec3& w) -> Vec3 { return inertia.cwiseProduct(w); });
  const Vec3 dgamma = -params.mgd() * params.body_axis;
  for (int g = 0; g < 3; ++g) {
    const Vec3 row = (gamma_next.transpose() * so3::basis(g)).transpose();
    r.dynamics(g) += h * row.dot(dgamma);
  }
  r.gamma_update = gamma_update_defect(h, gamma_k, omega_k, gamma_next);
  return r;
}

HeavyTopResidual heavy_top_explicit_residual(const HeavyTopParameters& params,
                                             double h, const Vec3& gamma_k,
                                             const Vec3& omega_k,
                                             const Vec3& gamma_next,
                                             const Vec3& omega_next,
                                             Transcription form) {
  const Vec3& in = params.inertia;
  HeavyTopResidual r;
  r.dynamics = component_kinetic(h, omega_k, in.cwiseProduct(omega_k), omega_next,
                                 in.cwiseProduct(omega_next), form);
  const double X = gamma_next(0), Y = gamma_next(1), Z = gamma_next(2);
  const Vec3& e = params.body_axis;
  Vec3 gravity(Z * e(1) - Y * e(2), X * e(2) - Z * e(0), -(X * e(1) - Y * e(0)));
  gravity *= h * params.mgd();
  // The displayed gravity terms have the opposite sign to the pairing form
  // + h Gamma e_g . dL/dGamma with dL/dGamma = -mgd e.
  r.dynamics += form == Transcription::kVerbatim ? gravity : Vec3(-gravity);
  r.gamma_update = gamma_update_defect(h, gamma_k, omega_k, gamma_next);
  return r;
}

}  // namespace lgdm
