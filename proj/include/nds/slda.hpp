#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "nds/core.hpp"
#include "nds/errors.hpp"
#include "nds/heads.hpp"

namespace nds {

// Streaming discriminant classifier: per-class running means plus one shared
// covariance. The precision matrix is recomputed lazily; every update
// invalidates it.
struct SldaState {
    Eigen::MatrixXd mu;            // N_c x d
    std::vector<std::uint64_t> n_c;
    Eigen::MatrixXd sigma;         // d x d
    std::uint64_t t = 0;
    double epsilon = 1e-4;
    bool plastic = true;

    mutable Eigen::MatrixXd precision;
    mutable bool precision_valid = false;
};

inline SldaState make_slda(std::size_t d, std::uint32_t n_classes, double epsilon = 1e-4,
                           bool plastic = true) {
    if (d == 0 || n_classes == 0)
        throw config_error("make_slda: dimensions must be positive");
    if (epsilon <= 0.0 || epsilon >= 1.0)
        throw config_error("make_slda: shrinkage must lie in (0, 1)");
    SldaState s;
    s.mu = Eigen::MatrixXd::Zero(n_classes, static_cast<Eigen::Index>(d));
    s.n_c.assign(n_classes, 0);
    s.sigma = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                    static_cast<Eigen::Index>(d));
    s.epsilon = epsilon;
    s.plastic = plastic;
    return s;
}

// The deviation is taken against the pre-update mean; swapping that order
// changes the covariance recursion.
inline void slda_update(SldaState& s, const Sample& sample) {
    const Eigen::Index y = static_cast<Eigen::Index>(sample.label);
    if (y >= s.mu.rows())
        throw config_error("slda_update: label out of range");
    const Eigen::VectorXd x = to_vector(sample.features);
    if (x.size() != s.mu.cols())
        throw config_error("slda_update: feature length does not match state");

    const Eigen::VectorXd delta = x - s.mu.row(y).transpose();
    if (s.plastic) {
        const double t = static_cast<double>(s.t);
        s.sigma = (t * s.sigma + (t / (t + 1.0)) * (delta * delta.transpose())) / (t + 1.0);
    }
    const double n_y = static_cast<double>(s.n_c[sample.label]);
    s.mu.row(y) = (n_y * s.mu.row(y) + x.transpose()) / (n_y + 1.0);
    s.n_c[sample.label] += 1;
    s.t += 1;
    s.precision_valid = false;
}

// Batch initialization: class means from the batch and the pooled
// within-class scatter as the starting covariance.
inline void slda_fit_base(SldaState& s, const std::vector<Sample>& batch) {
    if (batch.empty()) throw config_error("slda_fit_base: empty batch");
    const Eigen::Index d = s.mu.cols();
    s.mu.setZero();
    std::fill(s.n_c.begin(), s.n_c.end(), std::uint64_t{0});
    for (const auto& sample : batch) {
        const Eigen::Index y = static_cast<Eigen::Index>(sample.label);
        if (y >= s.mu.rows())
            throw config_error("slda_fit_base: label out of range");
        const Eigen::VectorXd x = to_vector(sample.features);
        if (x.size() != d)
            throw config_error("slda_fit_base: feature length does not match state");
        s.mu.row(y) += x.transpose();
        s.n_c[sample.label] += 1;
    }
    std::size_t present = 0;
    for (std::size_t c = 0; c < s.n_c.size(); ++c) {
        if (s.n_c[c] == 0) continue;
        ++present;
        s.mu.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(s.n_c[c]);
    }
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
    for (const auto& sample : batch) {
        const Eigen::Index y = static_cast<Eigen::Index>(sample.label);
        const Eigen::VectorXd dev = to_vector(sample.features) - s.mu.row(y).transpose();
        scatter.noalias() += dev * dev.transpose();
    }
    s.t = batch.size();
    const double dof = std::max<double>(1.0, static_cast<double>(s.t) -
                                                 static_cast<double>(present));
    s.sigma = scatter / dof;
    s.precision_valid = false;
}

namespace detail {

inline const Eigen::MatrixXd& slda_precision(const SldaState& s) {
    if (!s.precision_valid) {
        const Eigen::Index d = s.sigma.rows();
        const Eigen::MatrixXd shrunk =
            (1.0 - s.epsilon) * s.sigma + s.epsilon * Eigen::MatrixXd::Identity(d, d);
        Eigen::LLT<Eigen::MatrixXd> llt(shrunk);
        if (llt.info() != Eigen::Success)
            throw numeric_error(
                "shrunken covariance is not positive definite; increase the shrinkage "
                "parameter");
        s.precision = llt.solve(Eigen::MatrixXd::Identity(d, d));
        if (!s.precision.allFinite())
            throw numeric_error(
                "covariance solve produced non-finite values; increase the shrinkage "
                "parameter");
        s.precision_valid = true;
    }
    return s.precision;
}

}  // namespace detail

// Scores for every class; classes never observed score -inf so they cannot
// win the argmax.
inline Eigen::VectorXd slda_scores(const SldaState& s, const Eigen::VectorXd& x) {
    if (x.size() != s.mu.cols())
        throw config_error("slda_scores: feature length does not match state");
    bool any = false;
    for (auto n : s.n_c)
        if (n > 0) any = true;
    if (!any) throw config_error("slda_scores: no observations yet");

    const Eigen::MatrixXd& lambda = detail::slda_precision(s);
    Eigen::VectorXd scores(s.mu.rows());
    for (Eigen::Index c = 0; c < s.mu.rows(); ++c) {
        if (s.n_c[static_cast<std::size_t>(c)] == 0) {
            scores(c) = -std::numeric_limits<double>::infinity();
            continue;
        }
        const Eigen::VectorXd lm = lambda * s.mu.row(c).transpose();
        scores(c) = lm.dot(x) - 0.5 * lm.dot(s.mu.row(c).transpose());
    }
    if (!scores.allFinite()) {
        for (Eigen::Index c = 0; c < scores.size(); ++c) {
            if (s.n_c[static_cast<std::size_t>(c)] > 0 && !std::isfinite(scores(c)))
                throw numeric_error(
                    "discriminant scores are non-finite; increase the shrinkage parameter");
        }
    }
    return scores;
}

inline std::uint32_t slda_predict(const SldaState& s, const Eigen::VectorXd& x) {
    return argmax_label(slda_scores(s, x));
}

}  // namespace nds
