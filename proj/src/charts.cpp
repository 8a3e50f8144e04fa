#include "lgdm/charts.hpp"

#include <algorithm>
#include <cmath>

#include "lgdm/finite_difference.hpp"

namespace lgdm {

namespace {

using so3::Mat3;
using so3::Vec3;

Vec3 as_vec3(const Vector& v) { return Vec3(v(0), v(1), v(2)); }
Vector as_vector(const Vec3& v) { return Vector(v); }

std::vector<Matrix> zeros(int count, int rows, int cols) {
  return std::vector<Matrix>(count, Matrix::Zero(rows, cols));
}

Vec3 uniform_ball(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  Vec3 dir(normal(rng), normal(rng), normal(rng));
  while (dir.norm() == 0.0) dir = Vec3(normal(rng), normal(rng), normal(rng));
  return dir.normalized() * radius * std::cbrt(unit(rng));
}

}  // namespace

// ---------------------------------------------------------------------------
// Pair groupoid

PairGroupoidChart::PairGroupoidChart(int dim, double h) : dim_(dim), h_(h) {
  if (dim < 1) throw ConfigurationError("pair groupoid: dim must be >= 1");
  if (!(h > 0.0)) throw ConfigurationError("pair groupoid: h must be positive");
}

Vector PairGroupoidChart::target_map(const Vector& x, const Vector& u) const {
  return x + h_ * u;
}

Vector PairGroupoidChart::product_map(const Vector&, const Vector& u,
                                      const Vector& v) const {
  return u + v;
}

Vector PairGroupoidChart::inversion_map(const Vector&, const Vector& u) const {
  return -u;
}

bool PairGroupoidChart::in_domain(const Vector& x, const Vector& u) const {
  return x.size() == dim_ && u.size() == dim_ && x.allFinite() && u.allFinite();
}

Matrix PairGroupoidChart::target_jacobian_u(const Vector&, const Vector&) const {
  return h_ * Matrix::Identity(dim_, dim_);
}

Matrix PairGroupoidChart::target_jacobian_x(const Vector&, const Vector&) const {
  return Matrix::Identity(dim_, dim_);
}

Matrix PairGroupoidChart::product_jacobian_u(const Vector&, const Vector&,
                                             const Vector&) const {
  return Matrix::Identity(dim_, dim_);
}

Matrix PairGroupoidChart::product_jacobian_v(const Vector&, const Vector&,
                                             const Vector&) const {
  return Matrix::Identity(dim_, dim_);
}

Matrix PairGroupoidChart::inversion_jacobian_u(const Vector&,
                                               const Vector&) const {
  return -Matrix::Identity(dim_, dim_);
}

Matrix PairGroupoidChart::inversion_jacobian_x(const Vector&,
                                               const Vector&) const {
  return Matrix::Zero(dim_, dim_);
}

Matrix PairGroupoidChart::anchor(const Vector&) const {
  return h_ * Matrix::Identity(dim_, dim_);
}

Matrix PairGroupoidChart::left_transport(const Vector&, const Vector&) const {
  return Matrix::Identity(dim_, dim_);
}

Matrix PairGroupoidChart::right_transport(const Vector&, const Vector&) const {
  return Matrix::Identity(dim_, dim_);
}

std::vector<Matrix> PairGroupoidChart::right_transport_derivative(
    const Vector&, const Vector&) const {
  return zeros(dim_, dim_, dim_);
}

std::vector<Matrix> PairGroupoidChart::structure_constants(const Vector&) const {
  return zeros(dim_, dim_, dim_);
}

// ---------------------------------------------------------------------------
// SO(3) with Cayley coordinates

So3CayleyChart::So3CayleyChart(double h, double radius)
    : h_(h), radius_(radius) {
  if (!(h > 0.0)) throw ConfigurationError("so3 chart: h must be positive");
  if (!(radius > 0.0)) throw ConfigurationError("so3 chart: radius must be positive");
}

Vector So3CayleyChart::target_map(const Vector&, const Vector&) const {
  return Vector(0);
}

Vector So3CayleyChart::product_map(const Vector&, const Vector& u,
                                   const Vector& v) const {
  return coordinates(group_element(u) * group_element(v));
}

Vector So3CayleyChart::inversion_map(const Vector&, const Vector& u) const {
  return -u;
}

bool So3CayleyChart::in_domain(const Vector& x, const Vector& u) const {
  return x.size() == 0 && u.size() == 3 && u.allFinite() &&
         h_ * u.norm() < radius_;
}

bool So3CayleyChart::in_enclosing(const Vector& x, const Vector& u) const {
  return x.size() == 0 && u.size() == 3 && u.allFinite() &&
         h_ * u.norm() < enclosing_radius_;
}

Matrix So3CayleyChart::target_jacobian_u(const Vector&, const Vector&) const {
  return Matrix::Zero(0, 3);
}

Matrix So3CayleyChart::target_jacobian_x(const Vector&, const Vector&) const {
  return Matrix::Zero(0, 0);
}

Matrix So3CayleyChart::product_jacobian_u(const Vector&, const Vector& u,
                                          const Vector& v) const {
  const Vector p = product_map(Vector(0), u, v);
  const Mat3 j = so3::dcay_inv_operator(h_ * as_vec3(p)) *
                 so3::dcay_operator(h_ * as_vec3(u));
  return j;
}

Matrix So3CayleyChart::product_jacobian_v(const Vector&, const Vector& u,
                                          const Vector& v) const {
  const Vector p = product_map(Vector(0), u, v);
  const Mat3 j = so3::dcay_inv_operator(h_ * as_vec3(p)) *
                 so3::Ad_operator(group_element(u)) *
                 so3::dcay_operator(h_ * as_vec3(v));
  return j;
}

Matrix So3CayleyChart::inversion_jacobian_u(const Vector&, const Vector&) const {
  return -Matrix::Identity(3, 3);
}

Matrix So3CayleyChart::inversion_jacobian_x(const Vector&, const Vector&) const {
  return Matrix::Zero(3, 0);
}

Matrix So3CayleyChart::anchor(const Vector&) const { return Matrix::Zero(0, 3); }

Matrix So3CayleyChart::left_transport(const Vector&, const Vector& u) const {
  // column gamma: (I + h u/2) e_gamma (I - h u/2)
  const Mat3 a = so3::hat(h_ * as_vec3(u));
  const Mat3 id = Mat3::Identity();
  Mat3 l;
  for (int g = 0; g < 3; ++g) {
    l.col(g) = so3::vee_projected((id + 0.5 * a) * so3::basis(g) * (id - 0.5 * a));
  }
  return l;
}

Matrix So3CayleyChart::right_transport(const Vector&, const Vector& v) const {
  return Matrix(so3::dcay_inv_operator(h_ * as_vec3(v)));
}

std::vector<Matrix> So3CayleyChart::right_transport_derivative(
    const Vector&, const Vector& v) const {
  // d/dv^k of (I - h v/2) e_mu (I + h v/2)
  const Mat3 a = so3::hat(h_ * as_vec3(v));
  const Mat3 id = Mat3::Identity();
  std::vector<Matrix> out;
  for (int k = 0; k < 3; ++k) {
    const Mat3 ek = so3::basis(k);
    Mat3 d;
    for (int mu = 0; mu < 3; ++mu) {
      const Mat3 emu = so3::basis(mu);
      const Mat3 m = -0.5 * h_ * ek * emu * (id + 0.5 * a) +
                     (id - 0.5 * a) * emu * (0.5 * h_ * ek);
      d.col(mu) = so3::vee_projected(m);
    }
    out.emplace_back(d);
  }
  return out;
}

std::vector<Matrix> So3CayleyChart::structure_constants(const Vector&) const {
  // C^gamma_{mu nu} = h [e_mu, e_nu]^gamma
  std::vector<Matrix> c(3, Matrix::Zero(3, 3));
  for (int mu = 0; mu < 3; ++mu) {
    for (int nu = 0; nu < 3; ++nu) {
      const Vec3 b = so3::bracket(Vec3::Unit(mu), Vec3::Unit(nu));
      for (int g = 0; g < 3; ++g) c[g](mu, nu) = h_ * b(g);
    }
  }
  return c;
}

Mat3 So3CayleyChart::group_element(const Vector& eta) const {
  return so3::cay(h_ * as_vec3(eta));
}

Vector So3CayleyChart::coordinates(const Mat3& g) const {
  return as_vector(so3::cay_inv(g) / h_);
}

bool So3CayleyChart::represents(const Mat3& g) const {
  // |cay^{-1}(g)| = 2 tan(theta / 2) for a rotation by theta
  const double c = std::clamp(0.5 * (g.trace() - 1.0), -1.0, 1.0);
  if (c <= -1.0) return false;
  const double norm = 2.0 * std::sqrt((1.0 - c) / (1.0 + c));
  return norm < radius_;
}

// ---------------------------------------------------------------------------
// Action groupoid

RightAction sphere_row_action() {
  RightAction a;
  a.name = "sphere_row";
  a.dim = 3;
  a.act = [](const Vector& x, const Mat3& g) -> Vector {
    return Vector(g.transpose() * as_vec3(x));
  };
  a.generator = [](const Vector& x, int gamma) -> Vector {
    return Vector(so3::basis(gamma).transpose() * as_vec3(x));
  };
  a.on_manifold = [](const Vector& x) {
    return x.size() == 3 && x.allFinite() && std::abs(x.norm() - 1.0) <= 1e-9;
  };
  a.sample = [](std::mt19937_64& rng) -> Vector {
    std::normal_distribution<double> normal;
    Vec3 v(normal(rng), normal(rng), normal(rng));
    while (v.norm() == 0.0) v = Vec3(normal(rng), normal(rng), normal(rng));
    return Vector(v.normalized());
  };
  return a;
}

ActionGroupoidChart::ActionGroupoidChart(
    std::shared_ptr<const So3CayleyChart> group, RightAction action)
    : group_(std::move(group)), action_(std::move(action)) {
  if (!group_) throw ConfigurationError("action groupoid: missing group chart");
  if (!action_.act || action_.dim < 1) {
    throw ConfigurationError("action groupoid: action map is required");
  }
}

Vector ActionGroupoidChart::target_map(const Vector& x, const Vector& u) const {
  return action_.act(x, group_->group_element(u));
}

Vector ActionGroupoidChart::product_map(const Vector&, const Vector& u,
                                        const Vector& v) const {
  return group_->product_map(Vector(0), u, v);
}

Vector ActionGroupoidChart::inversion_map(const Vector&, const Vector& u) const {
  return -u;
}

bool ActionGroupoidChart::in_domain(const Vector& x, const Vector& u) const {
  if (x.size() != action_.dim) return false;
  if (action_.on_manifold && !action_.on_manifold(x)) return false;
  return group_->in_domain(Vector(0), u);
}

bool ActionGroupoidChart::in_enclosing(const Vector& x, const Vector& u) const {
  if (x.size() != action_.dim) return false;
  return group_->in_enclosing(Vector(0), u);
}

Matrix ActionGroupoidChart::product_jacobian_u(const Vector&, const Vector& u,
                                               const Vector& v) const {
  return group_->product_jacobian_u(Vector(0), u, v);
}

Matrix ActionGroupoidChart::product_jacobian_v(const Vector&, const Vector& u,
                                               const Vector& v) const {
  return group_->product_jacobian_v(Vector(0), u, v);
}

Matrix ActionGroupoidChart::inversion_jacobian_u(const Vector&,
                                                 const Vector&) const {
  return -Matrix::Identity(3, 3);
}

Matrix ActionGroupoidChart::inversion_jacobian_x(const Vector&,
                                                 const Vector&) const {
  return Matrix::Zero(3, action_.dim);
}

Matrix ActionGroupoidChart::anchor(const Vector& x) const {
  // d/du^gamma x . cay(h u) at u = 0 is h (e_gamma)_M(x)
  Matrix rho(action_.dim, 3);
  for (int g = 0; g < 3; ++g) {
    rho.col(g) = group_->time_step() * infinitesimal_generator(x, g);
  }
  return rho;
}

Matrix ActionGroupoidChart::left_transport(const Vector&, const Vector& u) const {
  return group_->left_transport(Vector(0), u);
}

Matrix ActionGroupoidChart::right_transport(const Vector&, const Vector& v) const {
  return group_->right_transport(Vector(0), v);
}

std::vector<Matrix> ActionGroupoidChart::right_transport_derivative(
    const Vector&, const Vector& v) const {
  return group_->right_transport_derivative(Vector(0), v);
}

std::vector<Matrix> ActionGroupoidChart::structure_constants(
    const Vector&) const {
  return group_->structure_constants(Vector(0));
}

Vector ActionGroupoidChart::base_update(const Vector& x, const Vector& eta) const {
  return target_map(x, eta);
}

Vector ActionGroupoidChart::infinitesimal_generator(const Vector& x,
                                                    int gamma) const {
  if (action_.generator) return action_.generator(x, gamma);
  // cay(t e) agrees with exp(t e) to second order, so its derivative at 0
  // is the generator.
  const Vector t0 = Vector::Zero(1);
  const Matrix d = fd::jacobian(
      [&](const Vector& t) {
        return action_.act(x, so3::cay(t(0) * Vec3::Unit(gamma)));
      },
      t0);
  return d.col(0);
}

// ---------------------------------------------------------------------------
// Factories and samplers

std::shared_ptr<const PairGroupoidChart> make_pair_groupoid(int dim, double h) {
  return std::make_shared<const PairGroupoidChart>(dim, h);
}

std::shared_ptr<const So3CayleyChart> make_so3_group_chart(double h) {
  return std::make_shared<const So3CayleyChart>(h);
}

std::shared_ptr<const ActionGroupoidChart> make_action_groupoid(
    std::shared_ptr<const So3CayleyChart> group, RightAction action,
    std::uint64_t seed) {
  if (action.sample) {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 16; ++i) {
      const Vector x = action.sample(rng);
      const Vector back = action.act(x, Mat3::Identity());
      if ((back - x).norm() > 1e-12 * (1.0 + x.norm())) {
        throw ConfigurationError("action groupoid: action(x, e) != x for action " +
                                 action.name);
      }
    }
  }
  return std::make_shared<const ActionGroupoidChart>(std::move(group),
                                                     std::move(action));
}

AxiomSampler so3_sampler(double fiber_radius) {
  return [=](std::mt19937_64& rng) {
    AxiomSample s;
    s.x = Vector(0);
    s.u = Vector(uniform_ball(rng, fiber_radius));
    s.v = Vector(uniform_ball(rng, fiber_radius));
    s.w = Vector(uniform_ball(rng, fiber_radius));
    return s;
  };
}

AxiomSampler action_sampler(const ActionGroupoidChart& chart,
                            double fiber_radius) {
  auto sample = chart.action().sample;
  if (!sample) throw SamplingError("action_sampler: action has no base sampler");
  return [=](std::mt19937_64& rng) {
    AxiomSample s;
    s.x = sample(rng);
    s.u = Vector(uniform_ball(rng, fiber_radius));
    s.v = Vector(uniform_ball(rng, fiber_radius));
    s.w = Vector(uniform_ball(rng, fiber_radius));
    return s;
  };
}

}  // namespace lgdm
