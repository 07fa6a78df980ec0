#include "jetvo/jet.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace jetvo {

namespace {

// Per-feature pieces that stay constant during one inner solve.
struct FeatureTerm {
    int index = -1;
    Vec2 x, y;
    Mat2 a_reg, a_inv, a_sqrt;
    Vec2 b, a_inv_b;
    double c = 0.0;
};

// Collects solvable features: Active status, valid patch, acceptable
// conditioning. Ill-conditioned ones are reported through demoted (optional).
std::vector<FeatureTerm> gather_terms(const std::vector<PatchSystem>& patches,
                                      const std::vector<Correspondence>& correspondences,
                                      std::vector<int>* demoted = nullptr) {
    std::vector<FeatureTerm> terms;
    terms.reserve(patches.size());
    for (size_t i = 0; i < patches.size(); ++i) {
        const auto& ps = patches[i];
        const auto& corr = correspondences[i];
        if (!corr.active() || !ps.valid) continue;
        FeatureTerm t;
        t.a_reg = ps.a_regularized();
        if (condition_2x2(t.a_reg) > kConditionLimit) {
            if (demoted) demoted->push_back(static_cast<int>(i));
            continue;
        }
        t.index = static_cast<int>(i);
        t.x = corr.x;
        t.y = corr.y;
        t.b = ps.b;
        t.c = ps.c;
        const double det = t.a_reg.determinant();
        t.a_inv << t.a_reg(1, 1), -t.a_reg(0, 1), -t.a_reg(1, 0), t.a_reg(0, 0);
        t.a_inv /= det;
        t.a_inv_b = t.a_inv * t.b;
        t.a_sqrt = sqrt_spd_2x2(t.a_reg);
        terms.push_back(t);
    }
    return terms;
}

// f_k(p) for one term under a fixed F; falls back to the unconstrained step
// when the feature sits on the epipole (the constraint row vanishes there).
Vec2 term_displacement(const FeatureTerm& t, const FundamentalMatrix& F) {
    ConstrainedStep step;
    const Vec2 h = F.constraint_normal(t.x);
    const double g = F.bilinear(t.y, t.x);
    if (solve_bordered(t.a_reg, t.a_inv, t.a_inv_b, t.b, h, g, step) == StepStatus::Ok) return step.v;
    return -t.a_inv_b;
}

void check_prior(const MotionPrior* prior, double xi) {
    if (xi > 0.0 && prior == nullptr) throw ConfigError("prior coupling enabled but no prior supplied");
    if (xi > 0.0) {
        Eigen::LLT<Mat5> llt(prior->covariance);
        if (llt.info() != Eigen::Success)
            throw SingularPriorCovariance("prior covariance not positive definite");
    }
}

}  // namespace

double joint_loss(const MotionParams& p, const std::vector<PatchSystem>& patches,
                  const std::vector<Correspondence>& correspondences, const CameraIntrinsics& K,
                  const MotionPrior* prior, double xi_q, int min_active_features) {
    check_prior(prior, xi_q);
    const auto terms = gather_terms(patches, correspondences);
    if (static_cast<int>(terms.size()) < min_active_features)
        throw TooFewFeatures("joint_loss: " + std::to_string(terms.size()) + " active features");

    const FundamentalMatrix F = fundamental_matrix(p, K);
    double image = 0.0;
    for (const auto& t : terms) {
        const Vec2 v = term_displacement(t, F);
        image += v.dot(t.a_reg * v) + 2.0 * v.dot(t.b) + t.c;
    }
    image /= static_cast<double>(terms.size());

    double prior_term = 0.0;
    if (xi_q > 0.0) prior_term = xi_q * whiten(prior->covariance, p, prior->p_hat).squaredNorm();
    return image + prior_term;
}

ResidualProblem build_residuals(const MotionParams& p, const std::vector<PatchSystem>& patches,
                                const std::vector<Correspondence>& correspondences,
                                const CameraIntrinsics& K, const MotionPrior* prior, double xi_q,
                                double* constant_out, int min_active_features) {
    check_prior(prior, xi_q);
    auto terms = gather_terms(patches, correspondences);
    if (static_cast<int>(terms.size()) < min_active_features)
        throw TooFewFeatures("build_residuals: " + std::to_string(terms.size()) + " active features");
    const int n = static_cast<int>(terms.size());
    const double scale = std::sqrt(1.0 / n);

    if (constant_out) {
        double c = 0.0;
        for (const auto& t : terms) c += t.c - t.b.dot(t.a_inv_b);
        *constant_out = c / n;
    }

    ResidualProblem problem;
    problem.param_dim = 5;

    ResidualBlock image;
    image.dim = 2 * n;
    // one stacked block so F(p) is built once per evaluation
    image.eval = [terms = std::move(terms), K, scale, n](const Eigen::VectorXd& pv) {
        const FundamentalMatrix F = fundamental_matrix(MotionParams::from_vec(pv), K);
        Eigen::VectorXd r(2 * n);
        for (int i = 0; i < n; ++i) {
            const Vec2 v = term_displacement(terms[i], F);
            r.segment<2>(2 * i) = scale * (terms[i].a_sqrt * (v + terms[i].a_inv_b));
        }
        return r;
    };
    problem.blocks.push_back(std::move(image));

    if (xi_q > 0.0) {
        Eigen::LLT<Mat5> llt(prior->covariance);
        const Mat5 L = llt.matrixL();
        const MotionParams p_hat = prior->p_hat;
        const double sq = std::sqrt(xi_q);
        ResidualBlock prior_block;
        prior_block.dim = 5;
        prior_block.eval = [L, p_hat, sq](const Eigen::VectorXd& pv) -> Eigen::VectorXd {
            return sq * L.triangularView<Eigen::Lower>().solve(Vec5(pv - p_hat.vec()));
        };
        const Mat5 Jp = sq * L.triangularView<Eigen::Lower>().solve(Mat5::Identity());
        prior_block.jacobian = [Jp](const Eigen::VectorXd&) -> Eigen::MatrixXd { return Jp; };
        problem.blocks.push_back(std::move(prior_block));
    }
    (void)p;
    return problem;
}

JetResult jet_optimize(const FramePair& frames, std::vector<Correspondence> correspondences,
                       const MotionParams& p0, const JetConfig& config, const MotionPrior* prior) {
    check_prior(prior, config.xi_q);
    const WeightKernel kernel = gaussian_kernel(config.kernel_side, config.kernel_sigma);
    const int radius = kernel.radius();
    const Image& I = frames.first;
    const Image& J = frames.second;

    // initial border screening + exact-loss cache
    std::vector<double> q_exact(correspondences.size(), 0.0);
    for (size_t i = 0; i < correspondences.size(); ++i) {
        auto& c = correspondences[i];
        if (!c.active()) continue;
        if (!I.patch_inside(c.x, radius, 1.0) || !J.patch_inside(c.y, radius, 1.0)) {
            c.status = FeatureStatus::BorderInvalid;
            continue;
        }
        q_exact[i] = wssd(I, J, c.x, c.y - c.x, kernel);
    }

    auto active_count = [&correspondences]() {
        int n = 0;
        for (const auto& c : correspondences)
            if (c.active()) ++n;
        return n;
    };
    auto mean_q = [&](const std::vector<double>& q) {
        double s = 0.0;
        int n = 0;
        for (size_t i = 0; i < correspondences.size(); ++i)
            if (correspondences[i].active()) {
                s += q[i];
                ++n;
            }
        return s / n;
    };

    if (active_count() < config.min_active_features)
        throw TooFewFeatures("jet_optimize: too few features at the initial state");

    JetResult result;
    MotionParams p = p0;
    result.trace.push_back({0, mean_q(q_exact), p, active_count()});

    for (int outer = 1; outer <= config.max_outer_iters; ++outer) {
        // (1) re-linearize at the current correspondences
        std::vector<PatchSystem> patches(correspondences.size());
        for (size_t i = 0; i < correspondences.size(); ++i) {
            auto& c = correspondences[i];
            if (!c.active()) continue;
            patches[i] = patch_system(I, J, c.x, c.y, kernel, static_cast<int>(i));
            if (!patches[i].valid) c.status = FeatureStatus::BorderInvalid;
        }
        std::vector<int> ill;
        const auto terms = gather_terms(patches, correspondences, &ill);
        for (int i : ill) correspondences[i].status = FeatureStatus::IllConditioned;
        if (static_cast<int>(terms.size()) < config.min_active_features)
            throw TooFewFeatures("jet_optimize: feature demotions crossed the minimum");

        // (2) inner solve over p
        const ResidualProblem problem =
            build_residuals(p, patches, correspondences, frames.intrinsics, prior, config.xi_q,
                            nullptr, config.min_active_features);
        const SolveReport report = solve_nlls(problem, p.vec(), config.solver);
        const MotionParams p_cand = MotionParams::from_vec(report.p_opt);

        // (3) tentative update y_k <- y_k + f_k(p_cand)
        const FundamentalMatrix F = fundamental_matrix(p_cand, frames.intrinsics);
        auto snapshot = correspondences;  // for rollback
        std::vector<double> q_cand = q_exact;
        for (const auto& t : terms) {
            auto& c = correspondences[t.index];
            const Vec2 h = F.constraint_normal(t.x);
            const double g = F.bilinear(t.y, t.x);
            ConstrainedStep step;
            if (solve_bordered(t.a_reg, t.a_inv, t.a_inv_b, t.b, h, g, step) != StepStatus::Ok) {
                c.status = FeatureStatus::EpipoleDegenerate;
                continue;
            }
            const Vec2 y_new = t.y + step.v;
            if (!J.patch_inside(y_new, radius, 0.0)) {
                c.status = FeatureStatus::BorderInvalid;
                continue;
            }
            c.y = y_new;
            q_cand[t.index] = wssd(I, J, c.x, y_new - c.x, kernel);
        }
        if (active_count() < config.min_active_features)
            throw TooFewFeatures("jet_optimize: feature demotions crossed the minimum");

        // (4) exact-loss gate, evaluated over the surviving active set
        const double q_new = mean_q(q_cand);
        const double q_base = mean_q(q_exact);
        if (q_new < q_base) {
            p = p_cand;
            q_exact = q_cand;
            ++result.accepted_iterations;
            result.trace.push_back({outer, q_new, p, active_count()});
        } else {
            correspondences = std::move(snapshot);  // roll back and stop
            break;
        }
    }

    result.p_opt = p;
    result.correspondences = std::move(correspondences);
    return result;
}

}  // namespace jetvo
