#pragma once

#include <vector>

#include "jetvo/jet.hpp"

namespace jetvo {

struct RpeConfig {
    double xi_r = 0.0;
    bool lk_prestep = true;
    int lk_iters = 10;
    int kernel_side = 9;
    double kernel_sigma = 2.0;
    SolveOptions solver;
    int min_active_features = 8;
};

struct RpeResult {
    MotionParams p_opt;
    std::vector<Correspondence> correspondences;  // active ones lie on their epipolar lines
    double final_loss = 0.0;
    std::vector<IterationRecord> trace;
};

/// Plain per-feature Lucas-Kanade refinement, gated by the exact patch WSSD.
/// Features never abort the batch; they are demoted and keep their position.
std::vector<Correspondence> lk_prestep(const FramePair& frames, std::vector<Correspondence> correspondences,
                                       const WeightKernel& kernel, int iters);

/// R(p): mean squared point-to-epipolar-line distance over active features
/// (degenerate lines skipped, N adjusted) plus the prior quadratic.
double rpe_loss(const MotionParams& p, const std::vector<Correspondence>& correspondences,
                const CameraIntrinsics& K, const MotionPrior* prior, double xi_r,
                int min_active_features = 8);

/// The three-step baseline: optional LK refinement, reprojection-error
/// minimization over p, then minimum correction of every correspondence onto
/// its epipolar line under the optimized pose.
RpeResult rpe_optimize(const FramePair& frames, std::vector<Correspondence> correspondences,
                       const MotionParams& p0, const RpeConfig& config, const MotionPrior* prior = nullptr);

}  // namespace jetvo
