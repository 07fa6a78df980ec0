#include "jetvo/prior.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

namespace jetvo {

namespace {

Eigen::Matrix<double, 16, 1> feature_vector(const MotionParams& p1, const MotionParams& p2,
                                            const MotionParams& p3) {
    Eigen::Matrix<double, 16, 1> u;
    u << p1.vec(), p2.vec(), p3.vec(), 1.0;
    return u;
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

PriorModel fit_predictor(const std::vector<PoseSequence>& sequences, double ridge) {
    std::vector<Eigen::Matrix<double, 21, 1>> rows;  // feature ++ target
    for (const auto& seq : sequences) {
        const auto& s = seq.poses;
        for (size_t n = 3; n < s.size(); ++n) {
            Eigen::Matrix<double, 21, 1> row;
            row << feature_vector(s[n - 1], s[n - 2], s[n - 3]), s[n].vec();
            rows.push_back(row);
        }
    }
    const long m = static_cast<long>(rows.size());
    if (m < 50) throw InsufficientData("fit_predictor: need at least 50 usable transitions, got " + std::to_string(m));

    // canonical row order makes the fit exactly invariant to sequence order
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        for (int i = 0; i < 21; ++i) {
            if (a[i] != b[i]) return a[i] < b[i];
        }
        return false;
    });

    Eigen::MatrixXd U(m, 16), P(m, 5);
    for (long i = 0; i < m; ++i) {
        U.row(i) = rows[i].head<16>().transpose();
        P.row(i) = rows[i].tail<5>().transpose();
    }
    const Eigen::Matrix<double, 16, 16> G =
        U.transpose() * U + ridge * Eigen::Matrix<double, 16, 16>::Identity();
    // coeff^T solves (U^T U + ridge I) M^T = U^T P
    const Eigen::Matrix<double, 16, 5> Mt = G.ldlt().solve(U.transpose() * P);

    PriorModel model;
    model.coeff = Mt.transpose();
    model.sample_count = m;

    const Eigen::MatrixXd residuals = P - U * Mt;  // m x 5
    model.covariance = (residuals.transpose() * residuals) / static_cast<double>(m);
    model.covariance += 1e-12 * Mat5::Identity();
    return model;
}

MotionParams predict(const PriorModel& model, const std::array<MotionParams, 3>& history) {
    const Vec5 p = model.coeff * feature_vector(history[0], history[1], history[2]);
    return MotionParams::from_vec(p);
}

Vec5 whiten(const Mat5& covariance, const MotionParams& p, const MotionParams& p_hat) {
    Eigen::LLT<Mat5> llt(covariance);
    if (llt.info() != Eigen::Success) throw SingularCovariance("whiten: covariance not positive definite");
    // C = L L^T; ||L^-1 d||^2 = d^T C^-1 d
    return llt.matrixL().solve(p.vec() - p_hat.vec());
}

void save_prior_model(const PriorModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "jetvo-prior v1\n";
    out << model.sample_count << "\n";
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 16; ++j) out << (j ? " " : "") << format_double(model.coeff(i, j));
        out << "\n";
    }
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) out << (j ? " " : "") << format_double(model.covariance(i, j));
        out << "\n";
    }
}

PriorModel load_prior_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (header != "jetvo-prior v1") throw ParseError(path + ": unrecognized prior model header");
    PriorModel model;
    in >> model.sample_count;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 16; ++j) in >> model.coeff(i, j);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) in >> model.covariance(i, j);
    if (!in) throw ParseError(path + ": truncated prior model");
    return model;
}

}  // namespace jetvo
