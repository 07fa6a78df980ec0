#include "jetvo/solver.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace jetvo {

const char* to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::Converged: return "Converged";
        case TerminationReason::MaxIterations: return "MaxIterations";
        case TerminationReason::Stalled: return "Stalled";
        case TerminationReason::NumericFailure: return "NumericFailure";
    }
    return "?";
}

int ResidualProblem::residual_dim() const {
    int m = 0;
    for (const auto& b : blocks) m += b.dim;
    return m;
}

Eigen::VectorXd ResidualProblem::evaluate(const Eigen::VectorXd& p) const {
    Eigen::VectorXd r(residual_dim());
    int row = 0;
    for (const auto& b : blocks) {
        r.segment(row, b.dim) = b.eval(p);
        row += b.dim;
    }
    ++evaluations;
    return r;
}

Eigen::MatrixXd finite_diff_jacobian(const ResidualBlock& block, const Eigen::VectorXd& p, double step) {
    Eigen::MatrixXd J(block.dim, p.size());
    for (int i = 0; i < p.size(); ++i) {
        Eigen::VectorXd lo = p, hi = p;
        lo[i] -= step;
        hi[i] += step;
        J.col(i) = (block.eval(hi) - block.eval(lo)) / (2.0 * step);
    }
    return J;
}

Eigen::MatrixXd ResidualProblem::jacobian(const Eigen::VectorXd& p, double fd_step) const {
    Eigen::MatrixXd J(residual_dim(), param_dim);
    int row = 0;
    for (const auto& b : blocks) {
        J.middleRows(row, b.dim) = b.jacobian ? b.jacobian(p) : finite_diff_jacobian(b, p, fd_step);
        row += b.dim;
    }
    return J;
}

SolveReport solve_nlls(const ResidualProblem& problem, const Eigen::VectorXd& p0, const SolveOptions& opts) {
    SolveReport report;
    Eigen::VectorXd p = p0;
    Eigen::VectorXd r = problem.evaluate(p);
    if (!r.allFinite()) throw NumericFailure("solve_nlls: residuals non-finite at the initial point");
    double cost = r.squaredNorm();
    report.initial_cost = cost;
    report.cost_trace.push_back(cost);

    Eigen::MatrixXd J = problem.jacobian(p, opts.fd_step);
    if (!J.allFinite()) throw NumericFailure("solve_nlls: non-finite Jacobian");
    double mu = opts.initial_damping;
    report.reason = TerminationReason::MaxIterations;

    for (int iter = 0; iter < opts.max_iters;) {
        const Eigen::VectorXd g = J.transpose() * r;
        if (g.lpNorm<Eigen::Infinity>() < opts.gradient_tol) {
            report.reason = TerminationReason::Converged;
            break;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        Eigen::VectorXd diag = JtJ.diagonal().cwiseMax(1e-12);

        Eigen::MatrixXd H = JtJ;
        H.diagonal() += mu * diag;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        Eigen::VectorXd step = ldlt.solve(-g);
        // LDLT happily "solves" singular systems; verify the residual
        const bool solved = ldlt.info() == Eigen::Success && step.allFinite() &&
                            (H * step + g).norm() <= 1e-6 * (g.norm() + 1.0);
        if (!solved) {
            if (mu > 1e12) throw NumericFailure("solve_nlls: normal equations unsolvable at damping > 1e12");
            mu *= 10.0;
            continue;
        }

        const Eigen::VectorXd p_new = p + step;
        const Eigen::VectorXd r_new = problem.evaluate(p_new);
        const double cost_new = r_new.allFinite() ? r_new.squaredNorm() : std::numeric_limits<double>::infinity();
        if (cost_new < cost) {
            p = p_new;
            r = r_new;
            cost = cost_new;
            J = problem.jacobian(p, opts.fd_step);
            if (!J.allFinite()) throw NumericFailure("solve_nlls: non-finite Jacobian");
            mu /= 3.0;
            ++iter;
            ++report.iterations;
            report.cost_trace.push_back(cost);
            if (step.norm() < opts.step_tol) {
                report.reason = TerminationReason::Converged;
                break;
            }
        } else {
            mu *= 10.0;
            if (mu > 1e14) {
                report.reason = TerminationReason::Stalled;
                break;
            }
        }
    }

    report.p_opt = p;
    report.final_cost = cost;
    return report;
}

}  // namespace jetvo
