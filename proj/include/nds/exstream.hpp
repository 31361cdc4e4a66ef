#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nds/core.hpp"
#include "nds/errors.hpp"
#include "nds/heads.hpp"
#include "nds/rng.hpp"

namespace nds {

struct PrototypeEntry {
    Eigen::VectorXd x;
    double weight = 1.0;
};

// Fixed-size per-class buffers of merged prototypes. Total weight per class
// always equals the number of samples absorbed for that class.
struct PrototypeBuffers {
    std::size_t capacity = 20;
    std::vector<std::vector<PrototypeEntry>> per_class;
};

inline PrototypeBuffers make_prototype_buffers(std::uint32_t n_classes,
                                               std::size_t capacity = 20) {
    if (n_classes == 0 || capacity == 0)
        throw config_error("make_prototype_buffers: sizes must be positive");
    PrototypeBuffers b;
    b.capacity = capacity;
    b.per_class.resize(n_classes);
    return b;
}

namespace detail {

// Index pair of the two closest entries by Euclidean distance.
inline std::pair<std::size_t, std::size_t> closest_pair(
    const std::vector<PrototypeEntry>& entries) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
        for (std::size_t j = i + 1; j < entries.size(); ++j) {
            const double d2 = (entries[i].x - entries[j].x).squaredNorm();
            if (d2 < best) {
                best = d2;
                bi = i;
                bj = j;
            }
        }
    }
    return {bi, bj};
}

}  // namespace detail

inline void exstream_absorb(PrototypeBuffers& buffers, const Sample& sample) {
    if (sample.label >= buffers.per_class.size())
        throw config_error("exstream_absorb: label out of range");
    auto& entries = buffers.per_class[sample.label];
    if (entries.size() >= buffers.capacity && entries.size() >= 2) {
        auto [i, j] = detail::closest_pair(entries);
        const double w = entries[i].weight + entries[j].weight;
        entries[i].x = (entries[i].weight * entries[i].x + entries[j].weight * entries[j].x) / w;
        entries[i].weight = w;
        entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(j));
    }
    entries.push_back({to_vector(sample.features), 1.0});
}

inline void exstream_update(PrototypeBuffers& buffers, const std::vector<Sample>& samples) {
    for (const auto& s : samples) exstream_absorb(buffers, s);
}

// Weighted cross-entropy SGD over every buffer entry, one step per entry,
// entry order reshuffled each pass. Returns false when there was nothing to
// train on.
inline bool exstream_train_head(AnyHead& head, const PrototypeBuffers& buffers,
                                std::size_t passes, double lr, Rng& rng) {
    std::vector<std::pair<std::uint32_t, const PrototypeEntry*>> entries;
    for (std::uint32_t c = 0; c < buffers.per_class.size(); ++c)
        for (const auto& e : buffers.per_class[c]) entries.push_back({c, &e});
    if (entries.empty() || passes == 0) return false;

    const std::uint32_t n_classes = head_classes(head);
    std::vector<ScoreGradItem> item(1);
    for (std::size_t p = 0; p < passes; ++p) {
        for (std::size_t i = entries.size(); i > 1; --i)
            std::swap(entries[i - 1], entries[rng.index(i)]);
        for (const auto& [label, e] : entries) {
            if (label >= n_classes)
                throw config_error("exstream_train_head: label out of range");
            const Eigen::VectorXd scores = head_forward(head, e->x);
            Eigen::VectorXd d = softmax(scores);
            d(static_cast<Eigen::Index>(label)) -= 1.0;
            item[0].x = e->x;
            item[0].dscore = e->weight * d;
            apply_score_gradient_step(head, item, lr);
        }
    }
    return true;
}

}  // namespace nds
