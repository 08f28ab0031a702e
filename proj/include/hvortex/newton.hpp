#pragma once

#include <Eigen/Dense>
#include <functional>

namespace hv {

struct NewtonOptions {
    double tol = 1e-12;      // convergence: max-norm of the residual
    int max_iter = 50;
    double min_step = 1e-6;  // smallest backtracking factor before giving up
};

struct NewtonResult {
    Eigen::VectorXd x;
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
};

// Damped Newton iteration with residual-norm backtracking.  The residual
// callback may signal an inadmissible point by returning a vector containing
// non-finite entries; the line search then shortens the step.
NewtonResult newton_solve(Eigen::VectorXd x0,
                          const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
                          const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& jacobian,
                          const NewtonOptions& opt = {});

}  // namespace hv
