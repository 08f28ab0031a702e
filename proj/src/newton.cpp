#include "hvortex/newton.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace hv {

namespace {

double safe_max_norm(const Eigen::VectorXd& v) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(v[i]));
    }
    return m;
}

double safe_two_norm(const Eigen::VectorXd& v) {
    if (!v.allFinite()) return std::numeric_limits<double>::infinity();
    return v.norm();
}

}  // namespace

NewtonResult newton_solve(Eigen::VectorXd x0,
                          const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
                          const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& jacobian,
                          const NewtonOptions& opt) {
    NewtonResult out;
    out.x = std::move(x0);
    Eigen::VectorXd r = residual(out.x);
    // the Newton direction is a guaranteed descent direction for the
    // Euclidean merit, so backtracking uses it; convergence is declared on
    // the stricter max norm
    double rnorm = safe_two_norm(r);
    out.residual_norm = safe_max_norm(r);
    if (out.residual_norm <= opt.tol) {
        out.converged = true;
        return out;
    }
    for (int it = 0; it < opt.max_iter; ++it) {
        Eigen::MatrixXd J = jacobian(out.x);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        Eigen::VectorXd step = lu.solve(-r);
        if (!step.allFinite()) break;

        double alpha = 1.0;
        bool accepted = false;
        while (alpha >= opt.min_step) {
            Eigen::VectorXd xt = out.x + alpha * step;
            Eigen::VectorXd rt = residual(xt);
            double rtnorm = safe_two_norm(rt);
            if (rtnorm < rnorm * (1.0 - 1e-4 * alpha)) {
                out.x = std::move(xt);
                r = std::move(rt);
                rnorm = rtnorm;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        ++out.iterations;
        if (std::getenv("HV_NEWTON_TRACE"))
            std::fprintf(stderr, "newton it=%d alpha-accepted=%d alpha=%.2e |step|=%.3e rnorm=%.3e\n",
                         it, accepted ? 1 : 0, alpha, step.norm(), rnorm);
        if (!accepted) break;
        out.residual_norm = safe_max_norm(r);
        if (out.residual_norm <= opt.tol) {
            out.converged = true;
            return out;
        }
    }
    out.residual_norm = safe_max_norm(r);
    return out;
}

}  // namespace hv
