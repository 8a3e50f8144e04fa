#include <doctest.h>

#include <random>

#include "lgdm/del.hpp"
#include "lgdm/reference.hpp"
#include "lgdm/systems.hpp"
#include "oracles.hpp"

using namespace lgdm;
using so3::Mat3;
using so3::Vec3;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

double max_abs(const Matrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

Matrix one(double a) { return Matrix::Constant(1, 1, a); }

std::shared_ptr<const DiscreteLagrangianSystem> oscillator(double h) {
  return make_midpoint_system(one(1.0), harmonic_potential(one(1.0)), h);
}

// V(x) = x1^4 / 4 + x1 x2 + x2^2, a non-quadratic two-dimensional potential
Potential quartic_potential() {
  Potential v;
  v.name = "quartic";
  v.dim = 2;
  v.value = [](const Vector& x) {
    return std::pow(x(0), 4) / 4 + x(0) * x(1) + x(1) * x(1);
  };
  v.gradient = [](const Vector& x) {
    return vec({std::pow(x(0), 3) + x(1), x(0) + 2 * x(1)});
  };
  v.hessian = [](const Vector& x) {
    Matrix hs(2, 2);
    hs << 3 * x(0) * x(0), 1, 1, 2;
    return hs;
  };
  return v;
}

Matrix random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
  return a * a.transpose() + n * Matrix::Identity(n, n);
}

std::shared_ptr<const DiscreteLagrangianSystem> quadratic_system(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  LagrangianFunctions f;
  f.value = [a](const Vector&, const Vector& u) { return 0.5 * u.dot(a * u); };
  f.gradient_x = [n](const Vector&, const Vector&) { return Vector::Zero(n); };
  f.gradient_u = [a](const Vector&, const Vector& u) -> Vector { return a * u; };
  f.hessian_xu = [n](const Vector&, const Vector&) { return Matrix::Zero(n, n); };
  f.hessian_uu = [a](const Vector&, const Vector&) { return a; };
  return std::make_shared<const DiscreteLagrangianSystem>(
      make_pair_groupoid(n, 0.1), std::make_shared<const FunctionLagrangian>(f),
      std::vector<ChartPoint>{{Vector::Zero(n), Vector::Ones(n)}});
}

// midpoint Lagrangian as bare callables, so the Jacobian is differenced
std::shared_ptr<const DiscreteLagrangianSystem> hessian_free_system(const Matrix& m,
                                                                    double h) {
  const Potential v = quartic_potential();
  LagrangianFunctions f;
  f.value = [=](const Vector& x, const Vector& u) {
    return 0.5 * h * u.dot(m * u) - h * v.value(x + 0.5 * h * u);
  };
  f.gradient_x = [=](const Vector& x, const Vector& u) -> Vector {
    return -h * v.gradient(x + 0.5 * h * u);
  };
  f.gradient_u = [=](const Vector& x, const Vector& u) -> Vector {
    return h * m * u - 0.5 * h * h * v.gradient(x + 0.5 * h * u);
  };
  return std::make_shared<const DiscreteLagrangianSystem>(
      make_pair_groupoid(2, h), std::make_shared<const FunctionLagrangian>(f),
      std::vector<ChartPoint>{{vec({0.3, -0.2}), vec({1.0, 0.5})}});
}

HeavyTopParameters top_parameters() {
  HeavyTopParameters p;
  p.inertia = Vec3(1.0, 1.5, 0.7);
  p.mass = 1.0;
  p.gravity = 9.81;
  p.distance = 0.3;
  p.body_axis = Vec3(0.0, 0.0, 1.0);
  return p;
}

// Oracle for the scalar midpoint oscillator: F+(x, u) - F-(x + h u, v),
// expanded by hand from L_d = h u^2 / 2 - h (x + h u / 2)^2 / 2.
double midpoint_relation(double h, double x, double u, double v) {
  const double plus = h * u - 0.5 * h * h * (x + 0.5 * h * u);
  const double y = x + h * u;
  const double ym = y + 0.5 * h * v;
  // -rho dL/dx = h * h * ym
  const double minus = h * h * ym + h * v - 0.5 * h * h * ym;
  return plus - minus;
}

// dcay^{-1}_{a} as a matrix, column g = vee((I - A/2) e_g (I + A/2))
oracle::M3 dcay_inv_oracle(const oracle::V3& a) {
  const oracle::M3 A = oracle::skew(a);
  oracle::M3 out;
  for (int g = 0; g < 3; ++g) {
    const oracle::M3 m = (oracle::M3::Identity() - 0.5 * A) * oracle::skew(oracle::V3::Unit(g)) *
                         (oracle::M3::Identity() + 0.5 * A);
    out.col(g) = oracle::V3(m(2, 1), m(0, 2), m(1, 0));
  }
  return out;
}

}  // namespace

TEST_CASE("residual identity with the Legendre transforms") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> un(-2, 2);
  const auto pair = make_midpoint_system(random_spd(rng, 2), quartic_potential(), 0.1);
  const auto rb = make_rigid_body_system(Vec3(1, 2, 3), 0.1);
  const auto top = make_heavy_top_system(top_parameters(), 0.1);
  for (int i = 0; i < 50; ++i) {
    const Vector x = vec({un(rng), un(rng)}), u = vec({un(rng), un(rng)}),
                 v = vec({un(rng), un(rng)});
    const Vector y = x + 0.1 * u;
    const Vector lam = del_residual(*pair, x, u, v);
    CHECK(max_abs(lam - (legendre_plus(*pair, x, u).mu - legendre_minus(*pair, y, v).mu)) <=
          1e-13);

    const Vector eu = oracle::random_ball(rng, 5.0), ev = oracle::random_ball(rng, 5.0);
    CHECK(max_abs(del_residual(*rb, Vector(0), eu, ev) -
                  (legendre_plus(*rb, Vector(0), eu).mu -
                   legendre_minus(*rb, Vector(0), ev).mu)) <= 1e-13);

    const Vector g = oracle::random_unit(rng);
    const Vector gy = top->chart().target_map(g, eu);
    CHECK(max_abs(del_residual(*top, g, eu, ev) -
                  (legendre_plus(*top, g, eu).mu - legendre_minus(*top, gy, ev).mu)) <= 1e-13);
  }
}

TEST_CASE("Legendre transforms carry the right base points") {
  const auto sys = make_midpoint_system(one(1.0), zero_potential(1), 0.1);
  const Momentum minus = legendre_minus(*sys, vec({1.0}), vec({2.0}));
  const Momentum plus = legendre_plus(*sys, vec({1.0}), vec({2.0}));
  CHECK(minus.base(0) == 1.0);
  CHECK(plus.base(0) == doctest::Approx(1.2));
  // free particle: both are h u
  CHECK(minus.mu(0) == doctest::Approx(0.2));
  CHECK(plus.mu(0) == doctest::Approx(0.2));
}

TEST_CASE("free particle residual vanishes for equal velocities") {
  const auto sys = make_midpoint_system(Matrix::Identity(3, 3), zero_potential(3), 0.1);
  const Vector x = vec({1, 2, 3}), u = vec({0.5, -1, 4});
  CHECK(max_abs(del_residual(*sys, x, u, u)) == 0.0);
}

TEST_CASE("midpoint oscillator residual at the bisection root") {
  const double h = 0.1;
  const auto sys = oscillator(h);
  const double x = 1.0, u = 0.0;
  const double root = oracle::bisect([&](double v) { return midpoint_relation(h, x, u, v); },
                                     -100, 100);
  CHECK(std::abs(del_residual(*sys, vec({x}), vec({u}), vec({root}))(0)) <= 1e-12);
  const StepResult r = del_step(*sys, vec({x}), vec({u}));
  CHECK(std::abs(r.v(0) - root) <= 1e-10);
  CHECK(r.y(0) == doctest::Approx(x + h * u));
  CHECK(r.diagnostics.residual_norm <= 1e-10);
}

TEST_CASE("Jacobian of the pair groupoid") {
  const double h = 0.1;
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> un(-2, 2);
  const Matrix m = random_spd(rng, 2);
  const Potential v = quartic_potential();
  const MidpointLagrangian ld(m, v, h);
  const auto sys = make_midpoint_system(m, v, h);
  for (int i = 0; i < 20; ++i) {
    const Vector y = vec({un(rng), un(rng)}), w = vec({un(rng), un(rng)});
    const Matrix j = del_jacobian(*sys, y, w);
    CHECK(max_abs(j - (h * ld.hessian_xu(y, w) - ld.hessian_uu(y, w))) <= 1e-10);
  }
  const auto osc = oscillator(h);
  // L_d = h u^2/2 - h (x + h u/2)^2/2: d2/dxdu = -h^2/2, d2/du2 = h - h^3/4
  const double expected = h * (-h * h / 2) - (h - h * h * h / 4);
  CHECK(del_jacobian(*osc, vec({0.7}), vec({-0.3}))(0, 0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("Jacobian agrees with differences of the residual") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> un(-1.5, 1.5);
  const auto pair = make_midpoint_system(random_spd(rng, 2), quartic_potential(), 0.05);
  const auto sv = make_stormer_verlet_system(random_spd(rng, 2), quartic_potential(), 0.05);
  const auto free_hess = hessian_free_system(random_spd(rng, 2), 0.05);
  const auto rb = make_rigid_body_system(Vec3(1, 2, 3), 0.1);
  const auto top = make_heavy_top_system(top_parameters(), 0.1);

  for (int i = 0; i < 20; ++i) {
    const Vector x = vec({un(rng), un(rng)}), u = vec({un(rng), un(rng)}),
                 v = vec({un(rng), un(rng)});
    for (const auto* s : {pair.get(), sv.get(), free_hess.get()}) {
      const Vector y = s->chart().target_map(x, u);
      const Matrix fd = oracle::numeric_jacobian(
          [&](const Eigen::VectorXd& w) { return del_residual(*s, x, u, w); }, v);
      CHECK(max_abs(del_jacobian(*s, y, v) - fd) <= 1e-6);
    }
    const Vector eu = oracle::random_ball(rng, 8.0), ev = oracle::random_ball(rng, 8.0);
    const Matrix fd_rb = oracle::numeric_jacobian(
        [&](const Eigen::VectorXd& w) { return del_residual(*rb, Vector(0), eu, w); }, ev);
    CHECK(max_abs(del_jacobian(*rb, Vector(0), ev) - fd_rb) <= 1e-6);

    const Vector g = oracle::random_unit(rng);
    const Vector gy = top->chart().target_map(g, eu);
    const Matrix fd_top = oracle::numeric_jacobian(
        [&](const Eigen::VectorXd& w) { return del_residual(*top, g, eu, w); }, ev);
    CHECK(max_abs(del_jacobian(*top, gy, ev) - fd_top) <= 1e-6);
  }
}

TEST_CASE("quadratic Lagrangian: constant Jacobian and its condition") {
  Matrix a(2, 2);
  a << 4, 1, 1, 3;
  const auto sys = quadratic_system(a);
  const Matrix j = del_jacobian(*sys, vec({1, 2}), vec({-1, 0.5}));
  CHECK(max_abs(j + a) == 0.0);
  const Regularity r = regularity(*sys, vec({0, 0}), vec({1, 1}));
  Eigen::JacobiSVD<Matrix> svd(a);
  CHECK(r.condition == doctest::Approx(svd.singularValues()(0) / svd.singularValues()(1)));
  CHECK(r.regular);
}

TEST_CASE("degenerate Lagrangian is singular") {
  LagrangianFunctions f;
  f.value = [](const Vector&, const Vector&) { return 0.0; };
  f.gradient_x = [](const Vector&, const Vector&) { return Vector::Zero(1); };
  f.gradient_u = [](const Vector&, const Vector&) { return Vector::Zero(1); };
  const DiscreteLagrangianSystem sys(make_pair_groupoid(1, 0.1),
                                     std::make_shared<const FunctionLagrangian>(f),
                                     {{vec({0.0}), vec({0.0})}});
  const Regularity r = regularity(sys, vec({0.0}), vec({1.0}));
  CHECK_FALSE(r.regular);
  CHECK_THROWS_AS(del_step(sys, vec({0.0}), vec({1.0})), RegularityError);
}

TEST_CASE("midpoint oscillator is regular on sampled points") {
  const auto sys = oscillator(0.01);
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> un(-10, 10);
  for (int i = 0; i < 100; ++i) {
    CHECK(regularity(*sys, vec({un(rng)}), vec({un(rng)})).regular);
  }
}

TEST_CASE("Omega matrix relations") {
  const auto rb = make_rigid_body_system(Vec3(1, 2, 3), 0.1);
  const auto pair = make_midpoint_system(Matrix::Identity(2, 2), quartic_potential(), 0.1);
  const auto top = make_heavy_top_system(top_parameters(), 0.1);
  std::mt19937_64 rng(25);
  for (int i = 0; i < 20; ++i) {
    struct Case {
      const DiscreteLagrangianSystem* sys;
      Vector x;
      Vector u;
    };
    const Vector e = oracle::random_ball(rng, 6.0);
    const Vector p = oracle::random_ball(rng, 2.0);
    for (const Case& c : {Case{rb.get(), Vector(0), e},
                          Case{pair.get(), p.head(2), e.head(2)},
                          Case{top.get(), Vector(oracle::random_unit(rng)), e}}) {
      const Matrix omega = omega_matrix(*c.sys, c.x, c.u);
      const Matrix j = del_jacobian(*c.sys, c.x, c.u);
      const Matrix l = c.sys->chart().left_transport(c.x, c.u);
      CHECK(max_abs(omega + j * l) <= 1e-8);
      const double det_expected = l.determinant() * j.determinant();
      CHECK(std::abs(std::abs(omega.determinant()) - std::abs(det_expected)) <=
            1e-8 * std::abs(det_expected));
      // Omega(g, m) = L^t_m dF-_g / du^t by differences of F-
      const Matrix dminus = oracle::numeric_jacobian(
          [&](const Eigen::VectorXd& w) { return legendre_minus(*c.sys, c.x, w).mu; }, c.u);
      CHECK(max_abs(omega - dminus * l) <= 1e-6);
    }
  }
  // at identities L = I
  const Vector zero = Vector::Zero(3);
  CHECK(max_abs(omega_matrix(*rb, Vector(0), zero) + del_jacobian(*rb, Vector(0), zero)) == 0.0);
}

TEST_CASE("free particle steps are exact") {
  const auto sys = make_midpoint_system(Matrix::Identity(2, 2), zero_potential(2), 0.1);
  const Vector x = vec({1, -1}), u = vec({0.5, 2});
  const StepResult r = del_step(*sys, x, u);
  CHECK((r.v - u).norm() == 0.0);
  CHECK(r.diagnostics.newton_iters <= 1);

  const Trajectory t = simulate(*sys, x, u, 50);
  REQUIRE(t.completed());
  REQUIRE(t.steps.size() == 50);
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    CHECK((t.steps[k].point.u - u).norm() == 0.0);
    CHECK((t.steps[k].point.x - (x + kk * 0.1 * u)).norm() <= 1e-13);
  }
}

TEST_CASE("Stormer-Verlet step is the explicit leapfrog update") {
  const double h = 0.1;
  Matrix m(2, 2);
  m << 2, 0.5, 0.5, 1;
  const Potential v = quartic_potential();
  const auto sys = make_stormer_verlet_system(m, v, h);
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> un(-1, 1);
  for (int i = 0; i < 20; ++i) {
    const Vector x = vec({un(rng), un(rng)}), u = vec({un(rng), un(rng)});
    const StepResult r = del_step(*sys, x, u);
    const Vector closed = u - h * m.ldlt().solve(v.gradient(x + h * u));
    CHECK(max_abs(r.v - closed) <= 1e-12);
    CHECK(r.diagnostics.newton_iters <= 2);
  }
}

TEST_CASE("simulate matches the classical implicit midpoint rule") {
  const double h = 0.01;
  const auto sys = oscillator(h);
  const Trajectory t = simulate(*sys, vec({1.0}), vec({0.0}), 1000);
  REQUIRE(t.completed());
  // map (q_k, p_k) with p_k = F-(g_k)/h
  oracle::Phase s{1.0, legendre_minus(*sys, vec({1.0}), vec({0.0})).mu(0) / h};
  double worst = 0.0;
  for (const auto& e : t.steps) {
    s = oracle::oscillator_midpoint(1.0, 1.0, h, s);
    const double p = legendre_minus(*sys, e.point.x, e.point.u).mu(0) / h;
    worst = std::max({worst, std::abs(e.point.x(0) - s.q), std::abs(p - s.p)});
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("simulate keeps consecutive elements composable and momenta matched") {
  const auto top = make_heavy_top_system(top_parameters(), 0.05);
  const auto pair = make_midpoint_system(Matrix::Identity(2, 2), quartic_potential(), 0.05);
  const auto rb = make_rigid_body_system(Vec3(1, 2, 3), 0.05);
  struct Case {
    const DiscreteLagrangianSystem* sys;
    Vector x;
    Vector u;
  };
  for (const Case& c : {Case{pair.get(), vec({1, 0.5}), vec({0, 1})},
                        Case{rb.get(), Vector(0), vec({1, 0.1, 0.1})},
                        Case{top.get(), vec({0.6, 0, 0.8}), vec({0.5, -0.2, 3})}}) {
    int observed = 0;
    const Trajectory t = simulate(*c.sys, c.x, c.u, 200, {},
                                  [&](int, const TrajectoryEntry&) { ++observed; });
    REQUIRE(t.completed());
    CHECK(observed == 200);
    ChartPoint prev = t.initial;
    for (const auto& e : t.steps) {
      CHECK(max_abs(e.point.x - c.sys->chart().target_map(prev.x, prev.u)) <= 1e-12);
      const Vector plus = legendre_plus(*c.sys, prev.x, prev.u).mu;
      const Vector minus = legendre_minus(*c.sys, e.point.x, e.point.u).mu;
      CHECK(max_abs(plus - minus) <= 1e-10);
      CHECK(e.diagnostics.residual_norm <= 1e-10);
      prev = e.point;
    }
  }
}

TEST_CASE("simulate stops with a partial trajectory on failure") {
  const auto sys = oscillator(0.1);
  NewtonOptions opts;
  opts.tol = -1.0;
  opts.max_iters = 3;
  const Trajectory t = simulate(*sys, vec({1.0}), vec({0.0}), 10, opts);
  REQUIRE_FALSE(t.completed());
  CHECK(t.failure->step == 1);
  CHECK(t.failure->kind == "solver");
  CHECK(t.steps.empty());
  CHECK_THROWS_AS(del_step(*sys, vec({1.0}), vec({0.0}), {}, opts), SolverFailure);
  try {
    del_step(*sys, vec({1.0}), vec({0.0}), {}, opts);
  } catch (const SolverFailure& e) {
    CHECK(e.best_iterate().size() == 1);
    CHECK(e.residual_norm() < 1e-12);
  }
}

TEST_CASE("del_step rejects out-of-domain input") {
  const auto rb = make_rigid_body_system(Vec3(1, 2, 3), 0.1);
  CHECK_THROWS_AS(del_step(*rb, Vector(0), vec({50, 0, 0})), OutOfChartError);
  const auto top = make_heavy_top_system(top_parameters(), 0.1);
  CHECK_THROWS_AS(del_step(*top, vec({0, 0, 2}), vec({0, 0, 0})), OutOfChartError);
}

TEST_CASE("forward then backward returns the initial element") {
  std::mt19937_64 rng(27);
  const auto pair = make_midpoint_system(Matrix::Identity(2, 2), quartic_potential(), 0.05);
  const auto sv = make_stormer_verlet_system(Matrix::Identity(2, 2), quartic_potential(), 0.05);
  const auto rb = make_rigid_body_system(Vec3(1, 2, 3), 0.1);
  const auto top = make_heavy_top_system(top_parameters(), 0.1);
  for (int i = 0; i < 10; ++i) {
    const Vector x2 = oracle::random_ball(rng, 1.0).head(2);
    const Vector u2 = oracle::random_ball(rng, 2.0).head(2);
    for (const auto* s : {pair.get(), sv.get()}) {
      const StepResult f = del_step(*s, x2, u2);
      const BackwardResult b = del_step_backward(*s, f.y, f.v);
      CHECK(max_abs(b.x - x2) <= 1e-9);
      CHECK(max_abs(b.u - u2) <= 1e-9);
    }
    const Vector e = oracle::random_ball(rng, 5.0);
    const StepResult f = del_step(*rb, Vector(0), e);
    const BackwardResult b = del_step_backward(*rb, f.y, f.v);
    CHECK(max_abs(b.u - e) <= 1e-9);

    const Vector g = oracle::random_unit(rng);
    const StepResult ft = del_step(*top, g, e);
    const BackwardResult bt = del_step_backward(*top, ft.y, ft.v);
    CHECK(max_abs(bt.x - g) <= 1e-9);
    CHECK(max_abs(bt.u - e) <= 1e-9);
  }
}

TEST_CASE("rigid body momentum is the pulled-back gradient") {
  const double h = 0.1;
  const Vec3 inertia(1, 2, 3);
  const auto rb = make_rigid_body_system(inertia, h);
  std::mt19937_64 rng(28);
  for (int i = 0; i < 50; ++i) {
    const oracle::V3 eta = oracle::random_ball(rng, 1.0 / h);
    const oracle::V3 expected = dcay_inv_oracle(h * eta).transpose() * inertia.cwiseProduct(eta);
    CHECK(max_abs(legendre_minus(*rb, Vector(0), eta).mu - expected) <= 1e-12);
  }
}

TEST_CASE("Lie-Poisson step agrees with the DEL step") {
  const double h = 0.01;
  const auto rb = make_rigid_body_system(Vec3(1, 2, 3), h);
  Vector a = vec({1, 0.1, 0.1});
  Vector b = a;
  const double norm0 = legendre_minus(*rb, Vector(0), a).mu.norm();
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vector mu_k = legendre_minus(*rb, Vector(0), a).mu;
    const LiePoissonResult lp = lie_poisson_step(*rb, a);
    CHECK(std::abs(lp.mu.norm() - mu_k.norm()) <= 1e-14 * mu_k.norm() + 1e-15);
    const oracle::V3 expected_mu = oracle::cayley(h * oracle::V3(a)).transpose() * oracle::V3(mu_k);
    CHECK(max_abs(lp.mu - expected_mu) <= 1e-13);
    const StepResult d = del_step(*rb, Vector(0), b);
    a = lp.eta;
    b = d.v;
    worst = std::max(worst, max_abs(a - b));
  }
  CHECK(worst <= 1e-9);
  CHECK(std::abs(legendre_minus(*rb, Vector(0), a).mu.norm() - norm0) <= 1e-12);
  CHECK_THROWS_AS(lie_poisson_step(*oscillator(0.1), vec({1.0})), ConfigurationError);
}

TEST_CASE("trivialized action residual matches the chart residual") {
  const auto top = make_heavy_top_system(top_parameters(), 0.1);
  std::mt19937_64 rng(29);
  for (int i = 0; i < 50; ++i) {
    const Vector g = oracle::random_unit(rng);
    const Vector eu = oracle::random_ball(rng, 8.0), ev = oracle::random_ball(rng, 8.0);
    CHECK(max_abs(action_del_residual(*top, g, eu, ev) - del_residual(*top, g, eu, ev)) <=
          1e-12);
  }
  const Vector g = vec({0.6, 0, 0.8}), e = vec({0.5, -0.2, 3});
  const StepResult a = action_del_step(*top, g, e);
  const StepResult d = del_step(*top, g, e);
  CHECK(max_abs(a.v - d.v) <= 1e-9);
  CHECK(max_abs(a.y - d.y) <= 1e-15);
}

TEST_CASE("anchored stepping") {
  const double h = 0.01;
  const auto rb = make_rigid_body_system(Vec3(1, 2, 3), h);

  SUBCASE("one step from the identity anchor is a plain step") {
    const Vector eta = vec({1, 0.1, 0.1});
    const AnchoredTrajectory t = reanchored_simulate(*rb, Mat3::Identity(), Vector(0), eta, 1);
    REQUIRE(t.completed());
    const StepResult d = del_step(*rb, Vector(0), eta);
    CHECK(max_abs(t.steps[0].state.eta - d.v) == 0.0);
    CHECK(max_abs(t.steps[0].state.anchor - so3::cay(h * Vec3(eta))) <= 1e-15);
    CHECK_FALSE(t.steps[0].diagnostics.reanchored);
  }
  SUBCASE("long run leaves the identity chart") {
    const Vector eta = vec({0.2, 5.0, 0.2});
    const AnchoredTrajectory t = reanchored_simulate(*rb, Mat3::Identity(), Vector(0), eta, 2000);
    REQUIRE(t.completed());
    const double n0 = legendre_minus(*rb, Vector(0), eta).mu.norm();
    bool left = false;
    double drift = 0.0;
    Mat3 g = Mat3::Identity();
    Vector prev = eta;
    for (const auto& e : t.steps) {
      left = left || e.diagnostics.reanchored;
      CHECK(rb->chart().in_domain(Vector(0), e.state.eta));
      drift = std::max(drift, std::abs(legendre_minus(*rb, Vector(0), e.state.eta).mu.norm() - n0));
      g = g * oracle::cayley(h * oracle::V3(prev));
      prev = e.state.eta;
    }
    CHECK(left);
    CHECK(drift <= 1e-9);
    CHECK(max_abs(t.steps.back().state.anchor - g) <= 1e-10);
  }
  SUBCASE("anchor does not change the increments") {
    const Vector eta = vec({1, 0.1, 0.1});
    const Mat3 far = so3::cay(Vec3(0, 0, 100));
    const auto a = reanchored_simulate(*rb, far, Vector(0), eta, 20);
    const auto b = reanchored_simulate(*rb, Mat3::Identity(), Vector(0), eta, 20);
    CHECK(max_abs(a.steps.back().state.eta - b.steps.back().state.eta) == 0.0);
    CHECK(a.steps.front().diagnostics.reanchored);
  }
  SUBCASE("heavy top keeps the sphere") {
    const auto top = make_heavy_top_system(top_parameters(), h);
    const AnchoredTrajectory t =
        reanchored_simulate(*top, Mat3::Identity(), vec({0.6, 0, 0.8}), vec({0.5, -0.2, 3}), 1000);
    REQUIRE(t.completed());
    for (const auto& e : t.steps) CHECK(std::abs(e.state.base.norm() - 1.0) <= 1e-11);
  }
  SUBCASE("plain pair systems are refused") {
    CHECK_THROWS_AS(reanchored_simulate(*oscillator(0.1), Mat3::Identity(), vec({0}), vec({0}), 1),
                    ConfigurationError);
  }
}

TEST_CASE("translated residual matches the invariant-field derivatives") {
  // f(g) = tr(K g); left and right invariant derivatives are h tr(K g e)
  // and h tr(K e g)
  const double h = 0.1;
  const auto chart = make_so3_group_chart(h);
  std::mt19937_64 rng(30);
  std::normal_distribution<double> nd;
  Mat3 k;
  for (int i = 0; i < 9; ++i) k(i / 3, i % 3) = nd(rng);
  auto f = [&](const Mat3& g) { return (k * g).trace(); };
  for (int i = 0; i < 20; ++i) {
    const Mat3 left = oracle::cayley(oracle::random_ball(rng, 20.0));
    const Mat3 right = oracle::cayley(oracle::random_ball(rng, 20.0));
    const oracle::V3 u = oracle::random_ball(rng, 10.0), v = oracle::random_ball(rng, 10.0);
    const Mat3 gk = left * oracle::cayley(h * u);
    const Mat3 g1 = oracle::cayley(h * v) * right;
    Vector expected(3);
    for (int c = 0; c < 3; ++c) {
      const Mat3 e = oracle::skew(oracle::V3::Unit(c));
      expected(c) = h * (k * gk * e).trace() - h * (k * e * g1).trace();
    }
    CHECK(max_abs(translated_del_residual(*chart, f, left, u, right, v) - expected) <= 1e-6);
  }
}

TEST_CASE("one-step map is symplectic in (q, p) coordinates") {
  const double h = 0.1;
  Matrix m(2, 2);
  m << 2, 0.3, 0.3, 1;
  const auto sys = make_midpoint_system(m, quartic_potential(), h);
  auto to_qp = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    Eigen::VectorXd out(4);
    out << z.head(2), legendre_minus(*sys, z.head(2), z.tail(2)).mu / h;
    return out;
  };
  auto step = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    const StepResult r = del_step(*sys, z.head(2), z.tail(2), {}, NewtonOptions{1e-14});
    Eigen::VectorXd out(4);
    out << r.y, r.v;
    return out;
  };
  Matrix omega = Matrix::Zero(4, 4);
  omega.topRightCorner(2, 2) = Matrix::Identity(2, 2);
  omega.bottomLeftCorner(2, 2) = -Matrix::Identity(2, 2);
  std::mt19937_64 rng(31);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd z(4);
    z << oracle::random_ball(rng, 1.0).head(2), oracle::random_ball(rng, 1.0).head(2);
    const Matrix dstep = oracle::numeric_jacobian(step, z, 1e-5);
    const Matrix din = oracle::numeric_jacobian(to_qp, z, 1e-5);
    const Matrix dout = oracle::numeric_jacobian(to_qp, step(z), 1e-5);
    const Matrix a = dout * dstep * din.inverse();
    CHECK(max_abs(a.transpose() * omega * a - omega) <= 1e-6);
  }
}
