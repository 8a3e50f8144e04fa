#ifndef LGDM_ERRORS_HPP
#define LGDM_ERRORS_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lgdm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point (or a composite) lies outside the chart's symmetric neighborhood.
class OutOfChartError : public Error {
 public:
  using Error::Error;
};

class NumericalDerivativeError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// I - xi/2 (or I + xi/2) too close to singular for the Cayley map.
class RetractionDomainError : public Error {
 public:
  using Error::Error;
};

/// The Jacobian of the DEL residual is singular at the iterate.
class RegularityError : public Error {
 public:
  RegularityError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// Newton did not reach the residual tolerance. Carries the best iterate seen.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, Eigen::VectorXd best_iterate,
                double residual_norm, int iterations)
      : Error(what),
        best_iterate_(std::move(best_iterate)),
        residual_norm_(residual_norm),
        iterations_(iterations) {}

  const Eigen::VectorXd& best_iterate() const { return best_iterate_; }
  double residual_norm() const { return residual_norm_; }
  int iterations() const { return iterations_; }

 private:
  Eigen::VectorXd best_iterate_;
  double residual_norm_;
  int iterations_;
};

/// An anchored step produced an increment outside the chart; re-anchoring
/// cannot recover, the time step is too large.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace lgdm

#endif  // LGDM_ERRORS_HPP
