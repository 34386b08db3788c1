#include "gncbench/sysid/least_squares.hpp"

#include "gncbench/sysid/fit.hpp"
#include "gncbench/sysid/huber.hpp"

#include <limits>

namespace gncbench::sysid {

double robust_cost(const Eigen::VectorXd& r, const LeastSquaresOptions& options) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    total += options.robust ? huber(r(i), options.huber_delta) : 0.5 * r(i) * r(i);
  return total;
}

LeastSquaresResult levenberg_marquardt(const ResidualFunction& residual,
                                       const JacobianFunction& jacobian, Eigen::VectorXd x0,
                                       const LeastSquaresOptions& options) {
  LeastSquaresResult out;
  out.x = std::move(x0);
  out.residual = residual(out.x);
  out.cost = robust_cost(out.residual, options);
  out.lambda = options.initial_lambda;
  out.stop_reason = "iteration limit";

  while (out.iterations < options.max_iterations) {
    if (out.cost == 0.0) {
      out.converged = true;
      out.stop_reason = "zero residual";
      break;
    }
    const Eigen::MatrixXd j = jacobian(out.x);
    Eigen::VectorXd w(out.residual.size());
    for (Eigen::Index i = 0; i < w.size(); ++i)
      w(i) = options.robust ? huber_weight(out.residual(i), options.huber_delta) : 1.0;
    const Eigen::MatrixXd wj = w.asDiagonal() * j;
    const Eigen::MatrixXd a = j.transpose() * wj;
    const Eigen::VectorXd g = wj.transpose() * out.residual;
    const Eigen::VectorXd diag = a.diagonal();

    bool accepted = false;
    Eigen::VectorXd delta, candidate, new_resid;
    double new_cost = out.cost;
    while (out.lambda <= 1e12) {
      Eigen::MatrixXd damped = a;
      damped.diagonal() += out.lambda * diag;
      delta = damped.ldlt().solve(-g);
      candidate = out.x + delta;
      try {
        new_resid = residual(candidate);
        new_cost = robust_cost(new_resid, options);
      } catch (const NonFiniteSimulation&) {
        new_cost = std::numeric_limits<double>::infinity();
      }
      if (delta.allFinite() && new_cost < out.cost) {
        accepted = true;
        break;
      }
      out.lambda = out.lambda > 0.0 ? out.lambda * 10.0 : 1e-12;
    }
    if (!accepted) {
      out.converged = true;
      out.stop_reason = "no further decrease";
      break;
    }
    const double rel = (out.cost - new_cost) / out.cost;
    out.x = std::move(candidate);
    out.residual = std::move(new_resid);
    out.cost = new_cost;
    ++out.iterations;
    out.history.push_back({options.pass, out.cost, out.lambda});
    out.lambda /= 10.0;
    if (out.lambda < 1e-12) out.lambda = options.initial_lambda > 0.0 ? 1e-12 : 0.0;
    if (rel < options.relative_cost_tolerance) {
      out.converged = true;
      out.stop_reason = "relative cost change";
      break;
    }
    if (delta.norm() < options.step_tolerance * (1.0 + out.x.norm())) {
      out.converged = true;
      out.stop_reason = "step size";
      break;
    }
  }
  return out;
}

}  // namespace gncbench::sysid
