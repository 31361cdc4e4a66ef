#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "nds/core.hpp"
#include "nds/errors.hpp"
#include "nds/rng.hpp"

namespace nds {

// The trainable classification layer. Scores are raw logits; softmax happens
// only inside losses and predictions.
struct LinearHead {
    Eigen::MatrixXd W;  // N_c x d
    Eigen::VectorXd b;  // N_c
    std::uint64_t steps = 0;
    double lr = 0.0;  // step size used by the most recent update
};

// Optional one-hidden-layer variant (rectifier) for richer gradient
// directions; the output layer plays the LinearHead role.
struct TwoLayerHead {
    Eigen::MatrixXd W1;  // hidden x d
    Eigen::VectorXd b1;
    Eigen::MatrixXd W2;  // N_c x hidden
    Eigen::VectorXd b2;
    std::uint64_t steps = 0;
    double lr = 0.0;  // step size used by the most recent update
};

using AnyHead = std::variant<LinearHead, TwoLayerHead>;

inline LinearHead make_linear_head(std::size_t d, std::uint32_t n_classes) {
    if (d == 0 || n_classes == 0)
        throw config_error("make_linear_head: dimensions must be positive");
    LinearHead h;
    h.W = Eigen::MatrixXd::Zero(n_classes, static_cast<Eigen::Index>(d));
    h.b = Eigen::VectorXd::Zero(n_classes);
    return h;
}

// Hidden layer gets small random weights (zero init would never break the
// rectifier's symmetry); the output layer starts at zero so initial scores
// are zero like the linear head's.
inline TwoLayerHead make_two_layer_head(std::size_t d, std::uint32_t n_classes,
                                        std::size_t hidden, std::uint64_t seed) {
    if (d == 0 || n_classes == 0 || hidden == 0)
        throw config_error("make_two_layer_head: dimensions must be positive");
    TwoLayerHead h;
    h.W1.resize(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(d));
    Rng rng(derive_seed(seed, /*tag=*/0x68656164ULL));
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (Eigen::Index i = 0; i < h.W1.rows(); ++i)
        for (Eigen::Index j = 0; j < h.W1.cols(); ++j)
            h.W1(i, j) = scale * rng.normal();
    h.b1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden));
    h.W2 = Eigen::MatrixXd::Zero(n_classes, static_cast<Eigen::Index>(hidden));
    h.b2 = Eigen::VectorXd::Zero(n_classes);
    return h;
}

inline AnyHead make_head(std::size_t d, std::uint32_t n_classes,
                         std::size_t hidden_width, std::uint64_t seed) {
    if (hidden_width == 0) return make_linear_head(d, n_classes);
    return make_two_layer_head(d, n_classes, hidden_width, seed);
}

inline Eigen::VectorXd to_vector(const std::vector<float>& f) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i) x(static_cast<Eigen::Index>(i)) = f[i];
    return x;
}

// Max-subtracted softmax: finite for any finite scores.
inline Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
    const double m = scores.maxCoeff();
    Eigen::VectorXd e = (scores.array() - m).exp();
    return e / e.sum();
}

inline Eigen::VectorXd head_forward(const LinearHead& h, const Eigen::VectorXd& x) {
    if (x.size() != h.W.cols())
        throw config_error("head_forward: feature length does not match head shape");
    return h.W * x + h.b;
}

inline Eigen::VectorXd head_forward(const TwoLayerHead& h, const Eigen::VectorXd& x) {
    if (x.size() != h.W1.cols())
        throw config_error("head_forward: feature length does not match head shape");
    const Eigen::VectorXd hidden = (h.W1 * x + h.b1).cwiseMax(0.0);
    return h.W2 * hidden + h.b2;
}

inline Eigen::VectorXd head_forward(const AnyHead& h, const Eigen::VectorXd& x) {
    return std::visit([&](const auto& head) { return head_forward(head, x); }, h);
}

// Lowest index wins ties.
inline std::uint32_t argmax_label(const Eigen::VectorXd& scores) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i)
        if (scores(i) > scores(best)) best = i;
    return static_cast<std::uint32_t>(best);
}

inline double cross_entropy(const Eigen::VectorXd& scores, std::uint32_t label) {
    const double m = scores.maxCoeff();
    const double logsum = std::log((scores.array() - m).exp().sum()) + m;
    return logsum - scores(static_cast<Eigen::Index>(label));
}

// One minibatch item: input features and the loss gradient with respect to
// the head's output scores. Composing dscore outside keeps one backprop path
// for plain, distilled, and weighted objectives alike.
struct ScoreGradItem {
    Eigen::VectorXd x;
    Eigen::VectorXd dscore;
};

inline void apply_score_gradient_step(LinearHead& h,
                                      const std::vector<ScoreGradItem>& items,
                                      double lr) {
    if (items.empty()) return;
    Eigen::MatrixXd dW = Eigen::MatrixXd::Zero(h.W.rows(), h.W.cols());
    Eigen::VectorXd db = Eigen::VectorXd::Zero(h.b.size());
    for (const auto& it : items) {
        dW.noalias() += it.dscore * it.x.transpose();
        db += it.dscore;
    }
    h.W -= lr * dW;
    h.b -= lr * db;
    h.steps += 1;
    h.lr = lr;
}

inline void apply_score_gradient_step(TwoLayerHead& h,
                                      const std::vector<ScoreGradItem>& items,
                                      double lr) {
    if (items.empty()) return;
    Eigen::MatrixXd dW1 = Eigen::MatrixXd::Zero(h.W1.rows(), h.W1.cols());
    Eigen::VectorXd db1 = Eigen::VectorXd::Zero(h.b1.size());
    Eigen::MatrixXd dW2 = Eigen::MatrixXd::Zero(h.W2.rows(), h.W2.cols());
    Eigen::VectorXd db2 = Eigen::VectorXd::Zero(h.b2.size());
    for (const auto& it : items) {
        const Eigen::VectorXd pre = h.W1 * it.x + h.b1;
        const Eigen::VectorXd hidden = pre.cwiseMax(0.0);
        dW2.noalias() += it.dscore * hidden.transpose();
        db2 += it.dscore;
        Eigen::VectorXd dh = h.W2.transpose() * it.dscore;
        for (Eigen::Index i = 0; i < dh.size(); ++i)
            if (pre(i) <= 0.0) dh(i) = 0.0;
        dW1.noalias() += dh * it.x.transpose();
        db1 += dh;
    }
    h.W1 -= lr * dW1;
    h.b1 -= lr * db1;
    h.W2 -= lr * dW2;
    h.b2 -= lr * db2;
    h.steps += 1;
    h.lr = lr;
}

inline void apply_score_gradient_step(AnyHead& h, const std::vector<ScoreGradItem>& items,
                                      double lr) {
    std::visit([&](auto& head) { apply_score_gradient_step(head, items, lr); }, h);
}

// Per-sample cross-entropy gradient with respect to the output layer's
// parameters, flattened (weight rows then biases). This is the gradient
// signature the diversity-based replay policy scores.
inline std::vector<double> output_layer_gradient(const AnyHead& h, const Sample& s) {
    const Eigen::VectorXd x = to_vector(s.features);
    return std::visit(
        [&](const auto& head) {
            using HeadT = std::decay_t<decltype(head)>;
            Eigen::VectorXd input;  // input feeding the output layer
            if constexpr (std::is_same_v<HeadT, LinearHead>) {
                input = x;
            } else {
                input = (head.W1 * x + head.b1).cwiseMax(0.0);
            }
            const Eigen::VectorXd scores = head_forward(head, x);
            Eigen::VectorXd d = softmax(scores);
            d(static_cast<Eigen::Index>(s.label)) -= 1.0;
            std::vector<double> g;
            g.reserve(static_cast<std::size_t>(d.size() * (input.size() + 1)));
            for (Eigen::Index c = 0; c < d.size(); ++c)
                for (Eigen::Index j = 0; j < input.size(); ++j)
                    g.push_back(d(c) * input(j));
            for (Eigen::Index c = 0; c < d.size(); ++c) g.push_back(d(c));
            return g;
        },
        h);
}

inline std::uint32_t head_classes(const AnyHead& h) {
    return std::visit(
        [](const auto& head) {
            using HeadT = std::decay_t<decltype(head)>;
            if constexpr (std::is_same_v<HeadT, LinearHead>)
                return static_cast<std::uint32_t>(head.W.rows());
            else
                return static_cast<std::uint32_t>(head.W2.rows());
        },
        h);
}

inline std::size_t head_dim(const AnyHead& h) {
    return std::visit(
        [](const auto& head) {
            using HeadT = std::decay_t<decltype(head)>;
            if constexpr (std::is_same_v<HeadT, LinearHead>)
                return static_cast<std::size_t>(head.W.cols());
            else
                return static_cast<std::size_t>(head.W1.cols());
        },
        h);
}

}  // namespace nds
