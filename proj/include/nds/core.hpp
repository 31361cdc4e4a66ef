#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nds/errors.hpp"
#include "nds/rng.hpp"

namespace nds {

struct Sample {
    std::uint64_t id = 0;  // position in the stream, dense and unique
    std::vector<float> features;
    std::uint32_t label = 0;
    std::uint32_t run_id = 0;  // provenance of the contiguous same-class run
};

// Evaluation-only metadata. Learners never see these; evaluation code uses
// them to place checkpoints and to weight per-class accuracy.
struct MacroExperienceDescriptor {
    std::size_t start = 0;  // half-open [start, end)
    std::size_t end = 0;
    std::vector<double> class_proportions;  // sums to 1
    std::string drift_tag;
};

struct StreamView {
    std::vector<Sample> samples;
    std::size_t d = 0;
    std::uint32_t n_classes = 0;
    std::vector<MacroExperienceDescriptor> macro_plan;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

struct ExperienceBatch {
    std::size_t index = 0;
    std::vector<Sample> samples;  // stream order, at most E
};

inline std::vector<ExperienceBatch> split_into_experiences(const StreamView& stream,
                                                           std::size_t e) {
    if (e == 0) throw config_error("split_into_experiences: experience size must be >= 1");
    if (stream.empty()) throw config_error("split_into_experiences: empty stream");
    std::vector<ExperienceBatch> batches;
    batches.reserve((stream.size() + e - 1) / e);
    for (std::size_t pos = 0; pos < stream.size(); pos += e) {
        ExperienceBatch batch;
        batch.index = batches.size();
        const std::size_t stop = std::min(pos + e, stream.size());
        batch.samples.assign(stream.samples.begin() + static_cast<std::ptrdiff_t>(pos),
                             stream.samples.begin() + static_cast<std::ptrdiff_t>(stop));
        batches.push_back(std::move(batch));
    }
    return batches;
}

// Global Fisher-Yates permutation. Ids are reassigned to the new positions so
// downstream code never observes pre-shuffle order; macro boundaries are kept
// positionally (a shuffled stream is evaluated at the same checkpoints, their
// semantic content is destroyed by design).
inline StreamView shuffle_stream(const StreamView& stream, std::uint64_t seed) {
    StreamView out;
    out.samples = stream.samples;
    out.d = stream.d;
    out.n_classes = stream.n_classes;
    out.macro_plan = stream.macro_plan;
    Rng rng(derive_seed(seed, /*tag=*/0x73687566666c65ULL));
    for (std::size_t i = out.samples.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.index(i));
        std::swap(out.samples[i - 1], out.samples[j]);
    }
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i].id = i;
    return out;
}

}  // namespace nds
