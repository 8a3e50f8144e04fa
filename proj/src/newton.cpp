#include "lgdm/newton.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lgdm {

double condition_number(const Matrix& a) {
  if (a.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

namespace {

double max_norm(const Vector& r) {
  if (!r.allFinite()) return std::numeric_limits<double>::infinity();
  return r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff();
}

}  // namespace

NewtonResult newton_solve(const std::function<Vector(const Vector&)>& residual,
                          const std::function<Matrix(const Vector&)>& jacobian,
                          const Vector& guess, const NewtonOptions& opts) {
  Vector v = guess;
  Vector r = residual(v);
  double rn = max_norm(r);
  Vector best = v;
  double best_norm = rn;
  double cond = 1.0;
  int iters = 0;

  auto take_step = [&](bool polishing) -> bool {
    const Matrix j = jacobian(v);
    cond = condition_number(j);
    if (!(cond <= opts.singular_condition)) {
      if (polishing) return false;
      std::ostringstream msg;
      msg << "DEL Jacobian singular (condition " << cond << ")";
      throw RegularityError(msg.str(), cond);
    }
    const Vector dv = j.partialPivLu().solve(-r);
    double t = 1.0;
    Vector trial = v + dv;
    Vector tr = residual(trial);
    double tn = max_norm(tr);
    for (int k = 0; k < opts.max_halvings && !(tn < rn); ++k) {
      t *= 0.5;
      trial = v + t * dv;
      tr = residual(trial);
      tn = max_norm(tr);
    }
    if (polishing && !(tn < rn)) return false;
    v = trial;
    r = tr;
    rn = tn;
    if (rn < best_norm) {
      best = v;
      best_norm = rn;
    }
    return true;
  };

  while (!(rn <= opts.tol)) {
    if (iters >= opts.max_iters) {
      std::ostringstream msg;
      msg << "Newton did not converge in " << iters << " iterations (residual "
          << best_norm << ")";
      throw SolverFailure(msg.str(), best, best_norm, iters);
    }
    ++iters;
    take_step(false);
  }
  if (iters == 0) {
    // root at the guess; the regularity requirement still applies
    cond = condition_number(jacobian(v));
    if (!(cond <= opts.singular_condition)) {
      std::ostringstream msg;
      msg << "DEL Jacobian singular at the root (condition " << cond << ")";
      throw RegularityError(msg.str(), cond);
    }
  }
  for (int k = 0; k < opts.polish_iters && rn > 0.0; ++k) {
    if (!take_step(true)) break;
  }
  return NewtonResult{v, rn, iters, cond};
}

}  // namespace lgdm
