#include "lgdm/del.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lgdm/finite_difference.hpp"

namespace lgdm {

namespace {

constexpr double kRegularConditionLimit = 1e8;

void require(const GroupoidChart& chart, const Vector& x, const Vector& u,
             const char* what) {
  if (x.size() != chart.base_dim() || u.size() != chart.fiber_dim() ||
      !chart.in_domain(x, u)) {
    throw OutOfChartError(std::string(what) + " is outside the chart domain");
  }
}

Vector infinite(Eigen::Index m) {
  return Vector::Constant(m, std::numeric_limits<double>::infinity());
}

// F-(x, u) without the domain check.
Vector minus_components(const DiscreteLagrangianSystem& sys, const Vector& x,
                        const Vector& u) {
  const auto& chart = sys.chart();
  const auto& l = sys.lagrangian();
  Vector mu = chart.right_transport(x, u).transpose() * l.gradient_u(x, u);
  if (chart.base_dim() > 0) mu -= chart.anchor(x).transpose() * l.gradient_x(x, u);
  return mu;
}

Vector plus_components(const DiscreteLagrangianSystem& sys, const Vector& x,
                       const Vector& u) {
  return sys.chart().left_transport(x, u).transpose() *
         sys.lagrangian().gradient_u(x, u);
}

StepDiagnostics diagnostics_of(const NewtonResult& r) {
  StepDiagnostics d;
  d.residual_norm = r.residual_norm;
  d.newton_iters = r.iterations;
  d.jacobian_condition = r.jacobian_condition;
  return d;
}

const So3CayleyChart& so3_chart_of(const DiscreteLagrangianSystem& sys) {
  const auto* c = dynamic_cast<const So3CayleyChart*>(&sys.chart());
  if (!c) throw ConfigurationError("system is not on the SO(3) Cayley chart");
  return *c;
}

const ActionGroupoidChart& action_chart_of(const DiscreteLagrangianSystem& sys) {
  const auto* c = dynamic_cast<const ActionGroupoidChart*>(&sys.chart());
  if (!c) throw ConfigurationError("system is not on an action groupoid chart");
  return *c;
}

}  // namespace

Momentum legendre_minus(const DiscreteLagrangianSystem& sys, const Vector& x,
                        const Vector& u) {
  require(sys.chart(), x, u, "legendre_minus argument");
  return Momentum{x, minus_components(sys, x, u)};
}

Momentum legendre_plus(const DiscreteLagrangianSystem& sys, const Vector& x,
                       const Vector& u) {
  require(sys.chart(), x, u, "legendre_plus argument");
  return Momentum{sys.chart().target_map(x, u), plus_components(sys, x, u)};
}

Vector del_residual(const DiscreteLagrangianSystem& sys, const Vector& x,
                    const Vector& u, const Vector& v) {
  const auto& chart = sys.chart();
  require(chart, x, u, "first element");
  const Vector y = chart.target_map(x, u);
  require(chart, y, v, "second element");
  return plus_components(sys, x, u) - minus_components(sys, y, v);
}

Matrix del_jacobian(const DiscreteLagrangianSystem& sys, const Vector& y,
                    const Vector& v) {
  const auto& chart = sys.chart();
  const auto& l = sys.lagrangian();
  require(chart, y, v, "del_jacobian argument");
  if (!l.has_hessians()) {
    return -fd::jacobian([&](const Vector& w) { return minus_components(sys, y, w); },
                         v);
  }
  const Matrix rho = chart.anchor(y);
  const Matrix r = chart.right_transport(y, v);
  const auto dr = chart.right_transport_derivative(y, v);
  const Vector g = l.gradient_u(y, v);
  Matrix j = -r.transpose() * l.hessian_uu(y, v);
  if (chart.base_dim() > 0) j += rho.transpose() * l.hessian_xu(y, v);
  for (int gamma = 0; gamma < chart.fiber_dim(); ++gamma) {
    j.col(gamma) -= dr[gamma].transpose() * g;
  }
  return j;
}

Regularity regularity(const DiscreteLagrangianSystem& sys, const Vector& x,
                      const Vector& u) {
  const double c = condition_number(del_jacobian(sys, x, u));
  return Regularity{c, c < kRegularConditionLimit};
}

Matrix omega_matrix(const DiscreteLagrangianSystem& sys, const Vector& x,
                    const Vector& u) {
  return -del_jacobian(sys, x, u) * sys.chart().left_transport(x, u);
}

StepResult del_step(const DiscreteLagrangianSystem& sys, const Vector& x,
                    const Vector& u, const std::optional<Vector>& guess,
                    const NewtonOptions& opts) {
  const auto& chart = sys.chart();
  require(chart, x, u, "step input");
  const Vector y = chart.target_map(x, u);
  const Vector fplus = plus_components(sys, x, u);

  Vector v0 = guess.value_or(u);
  if (v0.size() != chart.fiber_dim() || !chart.in_domain(y, v0)) {
    v0 = chart.in_domain(y, u) ? u : chart.zero_fiber();
  }
  auto residual = [&](const Vector& w) -> Vector {
    if (!chart.in_domain(y, w)) return infinite(w.size());
    return fplus - minus_components(sys, y, w);
  };
  auto jacobian = [&](const Vector& w) { return del_jacobian(sys, y, w); };
  const NewtonResult r = newton_solve(residual, jacobian, v0, opts);
  return StepResult{y, r.root, diagnostics_of(r)};
}

BackwardResult del_step_backward(const DiscreteLagrangianSystem& sys,
                                 const Vector& y, const Vector& v,
                                 const std::optional<Vector>& guess,
                                 const NewtonOptions& opts) {
  const auto& chart = sys.chart();
  require(chart, y, v, "backward step input");
  const Vector fminus = minus_components(sys, y, v);

  Vector w0 = guess.value_or(chart.inversion_map(y, v));
  if (w0.size() != chart.fiber_dim() || !chart.in_domain(y, w0)) {
    w0 = chart.zero_fiber();
  }
  auto residual = [&](const Vector& w) -> Vector {
    if (!chart.in_domain(y, w)) return infinite(w.size());
    const Vector x = chart.target_map(y, w);
    const Vector u = chart.inversion_map(y, w);
    if (!chart.in_domain(x, u)) return infinite(w.size());
    return plus_components(sys, x, u) - fminus;
  };
  auto jacobian = [&](const Vector& w) { return fd::jacobian(residual, w); };
  const NewtonResult r = newton_solve(residual, jacobian, w0, opts);
  return BackwardResult{chart.target_map(y, r.root),
                        chart.inversion_map(y, r.root), diagnostics_of(r)};
}

namespace {

// Runs one step and maps exceptions to a failure record.
template <typename F>
std::optional<TrajectoryFailure> guarded(int step, F&& f) {
  TrajectoryFailure fail;
  fail.step = step;
  try {
    f();
    return std::nullopt;
  } catch (const SolverFailure& e) {
    fail.kind = "solver";
    fail.message = e.what();
    fail.residual_norm = e.residual_norm();
  } catch (const RegularityError& e) {
    fail.kind = "regularity";
    fail.message = e.what();
  } catch (const StepSizeError& e) {
    fail.kind = "step_size";
    fail.message = e.what();
  } catch (const OutOfChartError& e) {
    fail.kind = "domain";
    fail.message = e.what();
  } catch (const RetractionDomainError& e) {
    fail.kind = "domain";
    fail.message = e.what();
  } catch (const NumericalDerivativeError& e) {
    fail.kind = "solver";
    fail.message = e.what();
  }
  return fail;
}

}  // namespace

Trajectory simulate(const DiscreteLagrangianSystem& sys, const Vector& x0,
                    const Vector& u0, int steps, const NewtonOptions& opts,
                    const StepObserver& observer) {
  if (steps < 0) throw ConfigurationError("steps must be non-negative");
  require(sys.chart(), x0, u0, "initial element");
  Trajectory traj;
  traj.initial = ChartPoint{x0, u0};
  traj.steps.reserve(static_cast<std::size_t>(steps));
  Vector x = x0;
  Vector u = u0;
  for (int k = 1; k <= steps; ++k) {
    StepResult res;
    auto fail = guarded(k, [&] { res = del_step(sys, x, u, u, opts); });
    if (fail) {
      traj.failure = fail;
      break;
    }
    x = res.y;
    u = res.v;
    traj.steps.push_back(TrajectoryEntry{ChartPoint{x, u}, res.diagnostics});
    if (observer) observer(k, traj.steps.back());
  }
  return traj;
}

LiePoissonResult lie_poisson_step(const DiscreteLagrangianSystem& sys,
                                  const Vector& eta_k,
                                  const std::optional<Vector>& guess,
                                  const NewtonOptions& opts) {
  const So3CayleyChart& chart = so3_chart_of(sys);
  const Vector none(0);
  require(chart, none, eta_k, "Lie-Poisson input");
  const so3::Vec3 mu_k = minus_components(sys, none, eta_k);
  const Vector mu_next = so3::coAd_star(chart.group_element(eta_k), mu_k);

  Vector w0 = guess.value_or(eta_k);
  if (w0.size() != 3 || !chart.in_domain(none, w0)) w0 = eta_k;
  auto residual = [&](const Vector& w) -> Vector {
    if (!chart.in_domain(none, w)) return infinite(3);
    return minus_components(sys, none, w) - mu_next;
  };
  auto jacobian = [&](const Vector& w) -> Matrix {
    return -del_jacobian(sys, none, w);
  };
  const NewtonResult r = newton_solve(residual, jacobian, w0, opts);
  return LiePoissonResult{r.root, mu_next, diagnostics_of(r)};
}

Vector action_del_residual(const DiscreteLagrangianSystem& sys,
                           const Vector& x_k, const Vector& eta_k,
                           const Vector& eta_next) {
  const ActionGroupoidChart& chart = action_chart_of(sys);
  const auto& l = sys.lagrangian();
  require(chart, x_k, eta_k, "first element");
  const Vector x1 = chart.base_update(x_k, eta_k);
  require(chart, x1, eta_next, "second element");

  const double h = chart.time_step();
  const so3::Mat3 id = so3::Mat3::Identity();
  const so3::Mat3 ak = so3::hat(h * so3::Vec3(eta_k));
  const so3::Mat3 a1 = so3::hat(h * so3::Vec3(eta_next));
  const Vector gk = l.gradient_u(x_k, eta_k);
  const Vector g1 = l.gradient_u(x1, eta_next);
  const Vector g1x = l.gradient_x(x1, eta_next);

  Vector out(3);
  for (int g = 0; g < 3; ++g) {
    const so3::Mat3 e = so3::basis(g);
    const so3::Vec3 left = so3::vee_projected((id + 0.5 * ak) * e * (id - 0.5 * ak));
    const so3::Vec3 right = so3::vee_projected((id - 0.5 * a1) * e * (id + 0.5 * a1));
    out(g) = left.dot(gk) - right.dot(g1) +
             h * chart.infinitesimal_generator(x1, g).dot(g1x);
  }
  return out;
}

StepResult action_del_step(const DiscreteLagrangianSystem& sys,
                           const Vector& x_k, const Vector& eta_k,
                           const std::optional<Vector>& guess,
                           const NewtonOptions& opts) {
  const ActionGroupoidChart& chart = action_chart_of(sys);
  require(chart, x_k, eta_k, "step input");
  const Vector x1 = chart.base_update(x_k, eta_k);
  Vector w0 = guess.value_or(eta_k);
  if (w0.size() != 3 || !chart.in_domain(x1, w0)) w0 = chart.zero_fiber();
  auto residual = [&](const Vector& w) -> Vector {
    if (!chart.in_domain(x1, w)) return infinite(3);
    return action_del_residual(sys, x_k, eta_k, w);
  };
  auto jacobian = [&](const Vector& w) { return fd::jacobian(residual, w); };
  const NewtonResult r = newton_solve(residual, jacobian, w0, opts);
  return StepResult{x1, r.root, diagnostics_of(r)};
}

AnchoredTrajectory reanchored_simulate(const DiscreteLagrangianSystem& sys,
                                       const so3::Mat3& anchor0,
                                       const Vector& base0, const Vector& eta0,
                                       int steps, const NewtonOptions& opts,
                                       const AnchoredObserver& observer) {
  if (steps < 0) throw ConfigurationError("steps must be non-negative");
  const auto* group = dynamic_cast<const So3CayleyChart*>(&sys.chart());
  const auto* action = dynamic_cast<const ActionGroupoidChart*>(&sys.chart());
  if (!group && !action) {
    throw ConfigurationError("anchored stepping needs an SO(3) or action chart");
  }
  const So3CayleyChart& cay_chart = group ? *group : action->group_chart();
  require(sys.chart(), base0, eta0, "initial element");

  AnchoredTrajectory traj;
  traj.initial = AnchoredState{anchor0, base0, eta0};
  traj.steps.reserve(static_cast<std::size_t>(steps));
  AnchoredState s = traj.initial;
  const Vector none(0);
  for (int k = 1; k <= steps; ++k) {
    AnchoredEntry entry;
    auto fail = guarded(k, [&] {
      StepResult res = group ? del_step(sys, none, s.eta, s.eta, opts)
                             : action_del_step(sys, s.base, s.eta, s.eta, opts);
      if (!cay_chart.in_domain(none, res.v)) {
        throw StepSizeError("increment left the Cayley chart; reduce h");
      }
      entry.state.anchor = s.anchor * cay_chart.group_element(s.eta);
      entry.state.base = res.y;
      entry.state.eta = res.v;
      entry.diagnostics = res.diagnostics;
      entry.diagnostics.reanchored = !cay_chart.represents(entry.state.anchor);
    });
    if (fail) {
      traj.failure = fail;
      break;
    }
    s = entry.state;
    traj.steps.push_back(entry);
    if (observer) observer(k, traj.steps.back());
  }
  return traj;
}

Vector translated_del_residual(const So3CayleyChart& chart,
                               const std::function<double(const so3::Mat3&)>& f,
                               const so3::Mat3& left_anchor, const Vector& u,
                               const so3::Mat3& right_anchor, const Vector& v) {
  const Vector none(0);
  require(chart, none, u, "first element");
  require(chart, none, v, "second element");
  auto scalar = [](double s) {
    Vector out(1);
    out(0) = s;
    return out;
  };
  const Vector gl =
      fd::jacobian([&](const Vector& a) {
        return scalar(f(left_anchor * chart.group_element(a)));
      }, u).transpose();
  const Vector gr =
      fd::jacobian([&](const Vector& b) {
        return scalar(f(chart.group_element(b) * right_anchor));
      }, v).transpose();
  return chart.left_transport(none, u).transpose() * gl -
         chart.right_transport(none, v).transpose() * gr;
}

}  // namespace lgdm
