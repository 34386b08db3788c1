#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace gncbench::sysid {

struct IterationRecord {
  int pass = 0;
  double cost = 0.0;
  double lambda = 0.0;
};

struct LeastSquaresOptions {
  /// false gives plain least squares, true the Huber loss with huber_delta.
  bool robust = true;
  double huber_delta = 1.0;
  int max_iterations = 200;
  double relative_cost_tolerance = 1e-8;
  double step_tolerance = 1e-10;
  double initial_lambda = 1e-6;
  /// Tag copied into each IterationRecord.
  int pass = 0;
};

struct LeastSquaresResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residual;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  double lambda = 0.0;
  std::vector<IterationRecord> history;
};

using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFunction = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// sum of huber(r_i) or r_i^2 / 2.
double robust_cost(const Eigen::VectorXd& r, const LeastSquaresOptions& options);

/// Iteratively reweighted Gauss-Newton with Levenberg-Marquardt damping on
/// diag(J'WJ): lambda x10 on a rejected step, /10 on an accepted one. A
/// residual function throwing NonFiniteSimulation counts as infinite cost.
/// Stops on relative cost change, step size, iteration limit or when no
/// damping up to 1e12 decreases the cost.
LeastSquaresResult levenberg_marquardt(const ResidualFunction& residual,
                                       const JacobianFunction& jacobian, Eigen::VectorXd x0,
                                       const LeastSquaresOptions& options = {});

}  // namespace gncbench::sysid
