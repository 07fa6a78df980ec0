#include "jetvo/rpe.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace jetvo {

namespace {

void check_prior(const MotionPrior* prior, double xi) {
    if (xi > 0.0 && prior == nullptr) throw ConfigError("prior coupling enabled but no prior supplied");
    if (xi > 0.0) {
        Eigen::LLT<Mat5> llt(prior->covariance);
        if (llt.info() != Eigen::Success)
            throw SingularPriorCovariance("prior covariance not positive definite");
    }
}

}  // namespace

std::vector<Correspondence> lk_prestep(const FramePair& frames, std::vector<Correspondence> correspondences,
                                       const WeightKernel& kernel, int iters) {
    const Image& I = frames.first;
    const Image& J = frames.second;
    const int radius = kernel.radius();

    for (size_t i = 0; i < correspondences.size(); ++i) {
        auto& c = correspondences[i];
        if (!c.active()) continue;
        if (!I.patch_inside(c.x, radius, 1.0) || !J.patch_inside(c.y, radius, 1.0)) {
            c.status = FeatureStatus::BorderInvalid;
            continue;
        }
        double q = wssd(I, J, c.x, c.y - c.x, kernel);
        for (int it = 0; it < iters; ++it) {
            const PatchSystem ps = patch_system(I, J, c.x, c.y, kernel, static_cast<int>(i));
            if (!ps.valid) {
                c.status = FeatureStatus::BorderInvalid;
                break;
            }
            Vec2 v;
            try {
                v = lk_step(ps.a, ps.b);
            } catch (const IllConditioned&) {
                c.status = FeatureStatus::IllConditioned;  // position kept
                break;
            }
            const Vec2 y_new = c.y + v;
            if (!J.patch_inside(y_new, radius, 1.0)) break;  // candidate rejected, feature stays usable
            const double q_new = wssd(I, J, c.x, y_new - c.x, kernel);
            if (q_new >= q) break;
            c.y = y_new;
            q = q_new;
            if (v.norm() < 1e-6) break;
        }
    }
    return correspondences;
}

double rpe_loss(const MotionParams& p, const std::vector<Correspondence>& correspondences,
                const CameraIntrinsics& K, const MotionPrior* prior, double xi_r,
                int min_active_features) {
    check_prior(prior, xi_r);
    const FundamentalMatrix F = fundamental_matrix(p, K);
    double sum = 0.0;
    int n = 0;
    int active = 0;
    for (const auto& c : correspondences) {
        if (!c.active()) continue;
        ++active;
        const Vec2 h = F.constraint_normal(c.x);
        const double hn = h.norm();
        if (hn < 1e-12) continue;  // degenerate line at this p: skipped, N adjusted
        const double d = F.bilinear(c.y, c.x) / hn;
        sum += d * d;
        ++n;
    }
    if (active < min_active_features)
        throw TooFewFeatures("rpe_loss: " + std::to_string(active) + " active features");
    double loss = (n > 0) ? sum / n : 0.0;
    if (xi_r > 0.0) loss += xi_r * whiten(prior->covariance, p, prior->p_hat).squaredNorm();
    return loss;
}

RpeResult rpe_optimize(const FramePair& frames, std::vector<Correspondence> correspondences,
                       const MotionParams& p0, const RpeConfig& config, const MotionPrior* prior) {
    check_prior(prior, config.xi_r);
    const WeightKernel kernel = gaussian_kernel(config.kernel_side, config.kernel_sigma);

    if (config.lk_prestep) correspondences = lk_prestep(frames, correspondences, kernel, config.lk_iters);

    std::vector<int> active_idx;
    for (size_t i = 0; i < correspondences.size(); ++i)
        if (correspondences[i].active()) active_idx.push_back(static_cast<int>(i));
    const int n = static_cast<int>(active_idx.size());
    if (n < config.min_active_features) throw TooFewFeatures("rpe_optimize: too few active features");

    RpeResult result;
    result.trace.push_back({0, rpe_loss(p0, correspondences, frames.intrinsics, prior, config.xi_r,
                                        config.min_active_features),
                            p0, n});

    // vertex form: sqrt(1/N) d_k rows plus one whitened prior block
    ResidualProblem problem;
    problem.param_dim = 5;
    const double scale = std::sqrt(1.0 / n);
    const CameraIntrinsics K = frames.intrinsics;

    ResidualBlock image;
    image.dim = n;
    image.eval = [&correspondences, active_idx, K, scale, n](const Eigen::VectorXd& pv) {
        const FundamentalMatrix F = fundamental_matrix(MotionParams::from_vec(pv), K);
        Eigen::VectorXd r(n);
        for (int i = 0; i < n; ++i) {
            const auto& c = correspondences[active_idx[i]];
            const Vec2 h = F.constraint_normal(c.x);
            const double hn = h.norm();
            r[i] = (hn < 1e-12) ? 0.0 : scale * F.bilinear(c.y, c.x) / hn;
        }
        return r;
    };
    problem.blocks.push_back(std::move(image));

    if (config.xi_r > 0.0) {
        Eigen::LLT<Mat5> llt(prior->covariance);
        const Mat5 L = llt.matrixL();
        const MotionParams p_hat = prior->p_hat;
        const double sq = std::sqrt(config.xi_r);
        ResidualBlock prior_block;
        prior_block.dim = 5;
        prior_block.eval = [L, p_hat, sq](const Eigen::VectorXd& pv) -> Eigen::VectorXd {
            return sq * L.triangularView<Eigen::Lower>().solve(Vec5(pv - p_hat.vec()));
        };
        const Mat5 Jp = sq * L.triangularView<Eigen::Lower>().solve(Mat5::Identity());
        prior_block.jacobian = [Jp](const Eigen::VectorXd&) -> Eigen::MatrixXd { return Jp; };
        problem.blocks.push_back(std::move(prior_block));
    }

    const SolveReport report = solve_nlls(problem, p0.vec(), config.solver);
    result.p_opt = MotionParams::from_vec(report.p_opt);

    // minimum correction: project every active y_k onto its epipolar line
    const FundamentalMatrix F = fundamental_matrix(result.p_opt, frames.intrinsics);
    for (int idx : active_idx) {
        auto& c = correspondences[idx];
        const EpipolarLine line = epipolar_line(F, c.x);
        if (line.degenerate) {
            c.status = FeatureStatus::EpipoleDegenerate;
            continue;
        }
        c.y = project_to_line(c.y, line);
    }

    result.final_loss = rpe_loss(result.p_opt, correspondences, frames.intrinsics, prior, config.xi_r,
                                 config.min_active_features);
    int active_after = 0;
    for (const auto& c : correspondences)
        if (c.active()) ++active_after;
    result.trace.push_back({1, result.final_loss, result.p_opt, active_after});
    result.correspondences = std::move(correspondences);
    return result;
}

}  // namespace jetvo
