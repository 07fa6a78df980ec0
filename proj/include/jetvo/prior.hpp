#pragma once

#include <array>
#include <string>
#include <vector>

#include "jetvo/geometry.hpp"

namespace jetvo {

/// Ordered per-frame-transition motion parameters from one sequence.
struct PoseSequence {
    std::vector<MotionParams> poses;
    std::string source;
};

/// Third-order affine predictor of the next motion parameters plus the
/// covariance of its fit residuals. The 16-dim regression feature is
/// [p_{n-1}; p_{n-2}; p_{n-3}; 1].
struct PriorModel {
    Eigen::Matrix<double, 5, 16> coeff = Eigen::Matrix<double, 5, 16>::Zero();
    Mat5 covariance = Mat5::Identity();
    long sample_count = 0;
};

/// Prediction actually consumed by the optimizers.
struct MotionPrior {
    MotionParams p_hat;
    Mat5 covariance = Mat5::Identity();
};

/// Ridge-regularized least squares over all usable transitions (sequences
/// shorter than 4 contribute nothing). Throws InsufficientData below 50
/// usable transitions. The residual covariance is regularized by +1e-12 I.
PriorModel fit_predictor(const std::vector<PoseSequence>& sequences, double ridge = 1e-8);

/// history[0] is the most recent pose p_{n-1}, history[2] the oldest p_{n-3}.
MotionParams predict(const PriorModel& model, const std::array<MotionParams, 3>& history);

/// C^{-1/2} (p - p_hat) via the Cholesky factor of C; its squared norm is the
/// prior quadratic form. Throws SingularCovariance.
Vec5 whiten(const Mat5& covariance, const MotionParams& p, const MotionParams& p_hat);

/// Plain-text serialization (versioned header, full double precision).
void save_prior_model(const PriorModel& model, const std::string& path);
PriorModel load_prior_model(const std::string& path);

}  // namespace jetvo
