#pragma once

#include <optional>
#include <vector>

#include "jetvo/prior.hpp"
#include "jetvo/solver.hpp"
#include "jetvo/tracking.hpp"

namespace jetvo {

struct JetConfig {
    double xi_q = 0.0;  // prior coupling; 0 disables the prior term entirely
    int max_outer_iters = 10;
    int kernel_side = 9;
    double kernel_sigma = 2.0;
    SolveOptions solver;
    int min_active_features = 8;
};

/// One per-outer-iteration diagnostic record; shared with the RPE method for
/// apples-to-apples reporting.
struct IterationRecord {
    int iteration = 0;  // 0 is the initial state
    double loss = 0.0;  // exact mean patch WSSD for JET, mean d^2 loss for RPE
    MotionParams p;
    int active_features = 0;
};

struct JetResult {
    MotionParams p_opt;
    std::vector<Correspondence> correspondences;
    std::vector<IterationRecord> trace;  // accepted states only, loss strictly decreasing
    int accepted_iterations = 0;
};

/// Joint loss: mean linearized patch WSSD at v = f_k(p) over the active
/// features, plus the prior quadratic scaled by xi_q. N is the active count.
double joint_loss(const MotionParams& p, const std::vector<PatchSystem>& patches,
                  const std::vector<Correspondence>& correspondences, const CameraIntrinsics& K,
                  const MotionPrior* prior, double xi_q, int min_active_features = 8);

/// Vertex form of the joint loss: one stacked image block (two rows per
/// active feature) plus one whitened prior block when xi_q > 0. The sum of
/// squared residuals differs from joint_loss by the p-independent constant
/// (1/N) sum(c_k - b_k^T A_k^-1 b_k), returned through constant_out.
ResidualProblem build_residuals(const MotionParams& p, const std::vector<PatchSystem>& patches,
                                const std::vector<Correspondence>& correspondences,
                                const CameraIntrinsics& K, const MotionPrior* prior, double xi_q,
                                double* constant_out = nullptr, int min_active_features = 8);

/// Joint epipolar tracking. Outer loop: re-linearize patches at the current
/// correspondences, solve for p, shift every correspondence onto its epipolar
/// line by f_k(p), and keep the new state only while the exact (non
/// linearized) loss strictly decreases.
JetResult jet_optimize(const FramePair& frames, std::vector<Correspondence> correspondences,
                       const MotionParams& p0, const JetConfig& config, const MotionPrior* prior = nullptr);

}  // namespace jetvo
