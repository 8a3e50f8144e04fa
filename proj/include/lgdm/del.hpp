#ifndef LGDM_DEL_HPP
#define LGDM_DEL_HPP

// Discrete Euler-Lagrange machinery on a groupoid chart.
//
// For a composable pair g = (x, u), (y, v) with y = target(x, u) the residual
// is lambda = F+(x, u) - F-(y, v), where
//   F-(x, u) = -rho(x)^T dL/dx + R(x, u)^T dL/du   (covector at x)
//   F+(x, u) =  L(x, u)^T dL/du                    (covector at target(x, u))
// and del_step solves lambda = 0 for v by Newton.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lgdm/charts.hpp"
#include "lgdm/lagrangian.hpp"
#include "lgdm/newton.hpp"

namespace lgdm {

struct StepDiagnostics {
  double residual_norm = 0.0;
  int newton_iters = 0;
  double jacobian_condition = 0.0;
  bool reanchored = false;
};

struct Momentum {
  Vector base;
  Vector mu;
};

struct StepResult {
  Vector y;  // target of the input element, base of the new one
  Vector v;
  StepDiagnostics diagnostics;
};

struct BackwardResult {
  Vector x;
  Vector u;
  StepDiagnostics diagnostics;
};

Vector del_residual(const DiscreteLagrangianSystem& sys, const Vector& x,
                    const Vector& u, const Vector& v);

/// J(mu, gamma) = d lambda_mu / d v^gamma at (y, v). Uses the Lagrangian's
/// Hessians when it has them, central differences of F- otherwise.
Matrix del_jacobian(const DiscreteLagrangianSystem& sys, const Vector& y,
                    const Vector& v);

Momentum legendre_minus(const DiscreteLagrangianSystem& sys, const Vector& x,
                        const Vector& u);
Momentum legendre_plus(const DiscreteLagrangianSystem& sys, const Vector& x,
                       const Vector& u);

struct Regularity {
  double condition = 0.0;
  bool regular = false;
};

/// Condition number of del_jacobian at (x, u); regular iff below 1e8.
Regularity regularity(const DiscreteLagrangianSystem& sys, const Vector& x,
                      const Vector& u);

/// Omega(gamma, mu) = -(J L)(gamma, mu), the coordinate matrix of the
/// Poincare-Cartan 2-section on the pair (left e_mu, right e_gamma).
Matrix omega_matrix(const DiscreteLagrangianSystem& sys, const Vector& x,
                    const Vector& u);

/// Given g_k = (x, u), finds v with lambda(x, u, v) = 0. Default guess u.
StepResult del_step(const DiscreteLagrangianSystem& sys, const Vector& x,
                    const Vector& u, const std::optional<Vector>& guess = {},
                    const NewtonOptions& opts = {});

/// Given g_{k+1} = (y, v), finds g_k = (x, u) with target(x, u) = y and
/// lambda(x, u, v) = 0. The unknown is the fiber part w of g_k^{-1} = (y, w),
/// so x = target(y, w), u = inversion(y, w). Default guess inversion(y, v).
BackwardResult del_step_backward(const DiscreteLagrangianSystem& sys,
                                 const Vector& y, const Vector& v,
                                 const std::optional<Vector>& guess = {},
                                 const NewtonOptions& opts = {});

// ---------------------------------------------------------------------------
// Trajectories

struct TrajectoryEntry {
  ChartPoint point;
  StepDiagnostics diagnostics;
};

struct TrajectoryFailure {
  int step = 0;       // 1-based index of the step that failed
  std::string kind;   // "solver", "regularity", "domain", "step_size"
  std::string message;
  double residual_norm = 0.0;
};

struct Trajectory {
  ChartPoint initial;
  std::vector<TrajectoryEntry> steps;  // steps[k] is g_{k+1}
  std::optional<TrajectoryFailure> failure;

  bool completed() const { return !failure.has_value(); }
};

using StepObserver = std::function<void(int, const TrajectoryEntry&)>;

/// Threads (y, v) of each step into the next one. Stops at the first failed
/// step and returns the partial trajectory with the failure recorded. The
/// observer sees every accepted step as soon as it is accepted.
Trajectory simulate(const DiscreteLagrangianSystem& sys, const Vector& x0,
                    const Vector& u0, int steps, const NewtonOptions& opts = {},
                    const StepObserver& observer = {});

// ---------------------------------------------------------------------------
// Lie group and action groupoid paths

struct LiePoissonResult {
  Vector eta;
  Vector mu;  // mu_{k+1}
  StepDiagnostics diagnostics;
};

/// mu_k = F-(eta_k), mu_{k+1} = Ad*_{cay(h eta_k)} mu_k, then solves
/// F-(eta_{k+1}) = mu_{k+1}. The chart must be So3CayleyChart.
LiePoissonResult lie_poisson_step(const DiscreteLagrangianSystem& sys,
                                  const Vector& eta_k,
                                  const std::optional<Vector>& guess = {},
                                  const NewtonOptions& opts = {});

/// Trivialized residual on an ActionGroupoidChart, assembled from the Cayley
/// kernel and the action's generator rather than from the chart's
/// derivative routines:
///   (I + A_k/2) e_g (I - A_k/2) . dL/deta (x_k, eta_k)
/// - (I - A_1/2) e_g (I + A_1/2) . dL/deta (x_1, eta_1)
/// + h (e_g)_M(x_1) . dL/dx (x_1, eta_1),    A = h hat(eta), x_1 = x_k cay(h eta_k).
Vector action_del_residual(const DiscreteLagrangianSystem& sys,
                           const Vector& x_k, const Vector& eta_k,
                           const Vector& eta_next);

StepResult action_del_step(const DiscreteLagrangianSystem& sys,
                           const Vector& x_k, const Vector& eta_k,
                           const std::optional<Vector>& guess = {},
                           const NewtonOptions& opts = {});

// ---------------------------------------------------------------------------
// Anchored stepping

/// Attitude G_k (the translate carrying the identity chart to the current
/// element), base point x_k (empty on a bare group) and chart increment eta_k,
/// with G_{k+1} = G_k cay(h eta_k).
struct AnchoredState {
  so3::Mat3 anchor = so3::Mat3::Identity();
  Vector base;
  Vector eta;
};

struct AnchoredEntry {
  AnchoredState state;
  StepDiagnostics diagnostics;
};

struct AnchoredTrajectory {
  AnchoredState initial;
  std::vector<AnchoredEntry> steps;
  std::optional<TrajectoryFailure> failure;

  bool completed() const { return !failure.has_value(); }
};

using AnchoredObserver = std::function<void(int, const AnchoredEntry&)>;

/// Long runs on SO(3) or on an SO(3) action groupoid. The Lagrangian is
/// invariant under the group translations, so every step is solved in the
/// identity chart on the increment and only the anchor carries the global
/// attitude. `reanchored` is set on steps whose accumulated attitude lies
/// outside the identity chart. An increment leaving the chart is a
/// step-size failure.
AnchoredTrajectory reanchored_simulate(const DiscreteLagrangianSystem& sys,
                                       const so3::Mat3& anchor0,
                                       const Vector& base0, const Vector& eta0,
                                       int steps, const NewtonOptions& opts = {},
                                       const AnchoredObserver& observer = {});

/// Residual for a Lagrangian given directly on group elements, at the pair
/// g_k = G cay(h u), g_{k+1} = cay(h v) H:
///   (left e_g f)(g_k) - (right e_g f)(g_{k+1}),
/// evaluated through the identity chart after translating by G on the left
/// and by H on the right. Gradients of f are differenced.
Vector translated_del_residual(const So3CayleyChart& chart,
                               const std::function<double(const so3::Mat3&)>& f,
                               const so3::Mat3& left_anchor, const Vector& u,
                               const so3::Mat3& right_anchor, const Vector& v);

}  // namespace lgdm

#endif  // LGDM_DEL_HPP
