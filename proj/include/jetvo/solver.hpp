#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "jetvo/errors.hpp"

namespace jetvo {

/// One residual block: parameters -> m-vector, with an optional analytic (or
/// internally cached) Jacobian. Blocks without a jacobian callback are
/// differentiated by central finite differences.
struct ResidualBlock {
    int dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;  // may be empty
};

/// Stacked small residual blocks over a shared parameter vector.
struct ResidualProblem {
    int param_dim = 0;
    std::vector<ResidualBlock> blocks;
    mutable long evaluations = 0;

    int residual_dim() const;
    Eigen::VectorXd evaluate(const Eigen::VectorXd& p) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& p, double fd_step) const;
    double cost(const Eigen::VectorXd& p) const { return evaluate(p).squaredNorm(); }
};

enum class TerminationReason { Converged, MaxIterations, Stalled, NumericFailure };
const char* to_string(TerminationReason r);

struct SolveOptions {
    int max_iters = 50;
    double gradient_tol = 1e-10;  // on the infinity norm of J^T r
    double step_tol = 1e-10;
    double initial_damping = 1e-4;
    double fd_step = 1e-6;  // for blocks without a jacobian callback
};

struct SolveReport {
    Eigen::VectorXd p_opt;
    double initial_cost = 0.0;
    double final_cost = 0.0;
    int iterations = 0;  // accepted steps
    TerminationReason reason = TerminationReason::MaxIterations;
    std::vector<double> cost_trace;  // initial cost followed by each accepted cost
};

/// Levenberg-Marquardt on the normal equations (J^T J + mu diag(J^T J)),
/// multiplicative damping: x10 on rejection, /3 on acceptance. The accepted
/// cost sequence is strictly decreasing; rejected steps never touch the
/// iterate. Throws NumericFailure when the residuals are non-finite at p0 or
/// the normal equations stay unsolvable at damping 1e12.
SolveReport solve_nlls(const ResidualProblem& problem, const Eigen::VectorXd& p0,
                       const SolveOptions& opts = {});

/// Central finite differences of one block.
Eigen::MatrixXd finite_diff_jacobian(const ResidualBlock& block, const Eigen::VectorXd& p, double step);

}  // namespace jetvo
