#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nds/core.hpp"
#include "nds/errors.hpp"
#include "nds/exstream.hpp"
#include "nds/heads.hpp"
#include "nds/replay.hpp"
#include "nds/rng.hpp"
#include "nds/slda.hpp"

namespace nds {

struct TrainHyper {
    double lr = 0.05;
    std::size_t replay_k = 10;
    bool replay_with_replacement = false;
    double lwf_temperature = 2.0;
    double lwf_lambda = 1.0;
    std::size_t teacher_refresh = 1;  // experiences between teacher snapshots
    std::size_t exstream_passes = 1;
    std::size_t exstream_buffer = 20;
    std::size_t gss_samples = 10;
    std::size_t hidden_width = 0;  // 0 selects the linear head
    double slda_epsilon = 1e-4;
    bool slda_plastic = true;
    std::size_t slda_base_experiences = 1;  // 0 streams from scratch
};

inline void validate_hyper(const TrainHyper& h) {
    if (!(h.lr > 0.0)) throw config_error("hyper: learning rate must be positive");
    if (!(h.lwf_temperature >= 1.0))
        throw config_error("hyper: distillation temperature must be at least 1");
    if (!(h.lwf_lambda >= 0.0))
        throw config_error("hyper: distillation weight must be non-negative");
    if (h.teacher_refresh == 0)
        throw config_error("hyper: teacher refresh interval must be positive");
    if (h.exstream_buffer == 0)
        throw config_error("hyper: prototype buffer size must be positive");
    if (h.gss_samples == 0)
        throw config_error("hyper: gradient sample count must be positive");
    if (!(h.slda_epsilon > 0.0 && h.slda_epsilon < 1.0))
        throw config_error("hyper: shrinkage must lie in (0, 1)");
}

namespace detail {

inline void check_batch(const AnyHead& head, const std::vector<Sample>& samples,
                        const char* who) {
    const std::uint32_t n_classes = head_classes(head);
    const std::size_t d = head_dim(head);
    for (const auto& s : samples) {
        if (s.label >= n_classes)
            throw config_error(std::string(who) + ": label out of range");
        if (s.features.size() != d)
            throw config_error(std::string(who) + ": feature length does not match head");
    }
}

}  // namespace detail

// One averaged gradient step on experience plus a replay draw, then the
// experience is offered to the memory in stream order. The draw happens
// before any insertion so fresh samples never replay against themselves.
inline void sgd_update(AnyHead& head, const std::vector<Sample>& experience,
                       ReplayMemory& mem, ReplayPolicy policy, const TrainHyper& hyper,
                       Rng& rng, std::vector<bool>* stored = nullptr) {
    if (experience.empty()) throw config_error("sgd_update: empty experience");
    detail::check_batch(head, experience, "sgd_update");

    std::vector<Sample> replayed =
        draw_replay(mem, hyper.replay_k, rng, hyper.replay_with_replacement);
    std::vector<ScoreGradItem> items;
    items.reserve(experience.size() + replayed.size());
    const double inv = 1.0 / static_cast<double>(experience.size() + replayed.size());
    auto accumulate = [&](const Sample& s) {
        Eigen::VectorXd x = to_vector(s.features);
        Eigen::VectorXd d = softmax(head_forward(head, x));
        d(static_cast<Eigen::Index>(s.label)) -= 1.0;
        d *= inv;
        items.push_back({std::move(x), std::move(d)});
    };
    for (const auto& s : experience) accumulate(s);
    for (const auto& s : replayed) accumulate(s);
    apply_score_gradient_step(head, items, hyper.lr);

    GradFn grad_of;
    if (policy == ReplayPolicy::gss)
        grad_of = [&head](const Sample& s) { return output_layer_gradient(head, s); };
    for (const auto& s : experience) {
        const bool kept = replay_insert(mem, policy, s, rng, grad_of, hyper.gss_samples);
        if (stored) stored->push_back(kept);
    }
}

// Distillation step: cross-entropy on the experience plus a soft penalty
// keeping student scores near the teacher's. No memory involved.
inline void lwf_update(AnyHead& head, const AnyHead& teacher,
                       const std::vector<Sample>& experience, const TrainHyper& hyper) {
    if (experience.empty()) throw config_error("lwf_update: empty experience");
    if (head_dim(teacher) != head_dim(head) ||
        head_classes(teacher) != head_classes(head))
        throw config_error("lwf_update: teacher shape does not match student");
    detail::check_batch(head, experience, "lwf_update");

    const double T = hyper.lwf_temperature;
    const double lambda = hyper.lwf_lambda;
    std::vector<ScoreGradItem> items;
    items.reserve(experience.size());
    const double inv = 1.0 / static_cast<double>(experience.size());
    for (const auto& s : experience) {
        Eigen::VectorXd x = to_vector(s.features);
        const Eigen::VectorXd scores = head_forward(head, x);
        Eigen::VectorXd d = softmax(scores);
        d(static_cast<Eigen::Index>(s.label)) -= 1.0;
        if (lambda > 0.0) {
            const Eigen::VectorXd t_scores = head_forward(teacher, x);
            d += lambda * T * (softmax(scores / T) - softmax(t_scores / T));
        }
        d *= inv;
        items.push_back({std::move(x), std::move(d)});
    }
    apply_score_gradient_step(head, items, hyper.lr);
}

enum class LearnerKind { sgd, lwf, slda, exstream };

inline LearnerKind parse_learner_kind(const std::string& name) {
    if (name == "sgd") return LearnerKind::sgd;
    if (name == "lwf") return LearnerKind::lwf;
    if (name == "slda") return LearnerKind::slda;
    if (name == "exstream") return LearnerKind::exstream;
    throw config_error("unknown learner: " + name);
}

inline const char* learner_kind_name(LearnerKind k) {
    switch (k) {
        case LearnerKind::sgd: return "sgd";
        case LearnerKind::lwf: return "lwf";
        case LearnerKind::slda: return "slda";
        case LearnerKind::exstream: return "exstream";
    }
    throw config_error("unknown learner kind value");
}

struct SgdLearner {
    AnyHead head;
};

struct LwfLearner {
    AnyHead head;
    AnyHead teacher;
    std::uint64_t experiences_seen = 0;
};

struct SldaLearner {
    SldaState state;
    std::vector<Sample> base_buffer;
    std::size_t base_left = 0;  // experiences still to collect before base fit
};

struct ExStreamLearner {
    AnyHead head;
    PrototypeBuffers buffers;
};

using Learner = std::variant<SgdLearner, LwfLearner, SldaLearner, ExStreamLearner>;

inline Learner make_learner(LearnerKind kind, std::size_t d, std::uint32_t n_classes,
                            const TrainHyper& hyper, std::uint64_t seed) {
    validate_hyper(hyper);
    switch (kind) {
        case LearnerKind::sgd:
            return SgdLearner{make_head(d, n_classes, hyper.hidden_width, seed)};
        case LearnerKind::lwf: {
            LwfLearner l;
            l.head = make_head(d, n_classes, hyper.hidden_width, seed);
            l.teacher = l.head;
            return l;
        }
        case LearnerKind::slda: {
            SldaLearner l;
            l.state = make_slda(d, n_classes, hyper.slda_epsilon, hyper.slda_plastic);
            l.base_left = hyper.slda_base_experiences;
            return l;
        }
        case LearnerKind::exstream: {
            ExStreamLearner l;
            l.head = make_head(d, n_classes, hyper.hidden_width, seed);
            l.buffers = make_prototype_buffers(n_classes, hyper.exstream_buffer);
            return l;
        }
    }
    throw config_error("unknown learner kind value");
}

inline LearnerKind learner_kind(const Learner& l) {
    if (std::holds_alternative<SgdLearner>(l)) return LearnerKind::sgd;
    if (std::holds_alternative<LwfLearner>(l)) return LearnerKind::lwf;
    if (std::holds_alternative<SldaLearner>(l)) return LearnerKind::slda;
    return LearnerKind::exstream;
}

// Feed one experience to the learner. Memory and policy only matter for the
// replay-capable learner; the rest leave them untouched. `stored` collects the
// memory's per-sample keep decisions when there are any.
inline void learner_observe(Learner& learner, const std::vector<Sample>& experience,
                            ReplayMemory& mem, ReplayPolicy policy,
                            const TrainHyper& hyper, Rng& rng,
                            std::vector<bool>* stored = nullptr) {
    if (experience.empty()) throw config_error("learner_observe: empty experience");
    if (auto* l = std::get_if<SgdLearner>(&learner)) {
        sgd_update(l->head, experience, mem, policy, hyper, rng, stored);
        return;
    }
    if (auto* l = std::get_if<LwfLearner>(&learner)) {
        if (l->experiences_seen % hyper.teacher_refresh == 0) l->teacher = l->head;
        lwf_update(l->head, l->teacher, experience, hyper);
        l->experiences_seen += 1;
        return;
    }
    if (auto* l = std::get_if<SldaLearner>(&learner)) {
        if (l->base_left > 0) {
            l->base_buffer.insert(l->base_buffer.end(), experience.begin(),
                                  experience.end());
            if (--l->base_left == 0) {
                slda_fit_base(l->state, l->base_buffer);
                l->base_buffer.clear();
                l->base_buffer.shrink_to_fit();
            }
            return;
        }
        for (const auto& s : experience) slda_update(l->state, s);
        return;
    }
    auto& l = std::get<ExStreamLearner>(learner);
    exstream_update(l.buffers, experience);
    exstream_train_head(l.head, l.buffers, hyper.exstream_passes, hyper.lr, rng);
}

inline std::uint32_t predict_one(const Learner& learner, const Sample& s) {
    if (const auto* l = std::get_if<SldaLearner>(&learner)) {
        if (l->base_left > 0 && !l->base_buffer.empty())
            throw config_error("predict: base statistics not fitted yet");
        return slda_predict(l->state, to_vector(s.features));
    }
    const AnyHead* head = nullptr;
    if (const auto* l = std::get_if<SgdLearner>(&learner)) head = &l->head;
    else if (const auto* l = std::get_if<LwfLearner>(&learner)) head = &l->head;
    else head = &std::get<ExStreamLearner>(learner).head;
    if (head_dim(*head) == 0) throw config_error("predict: learner not initialized");
    return argmax_label(head_forward(*head, to_vector(s.features)));
}

// Pure with respect to the learner: predictions for every sample, in order.
inline std::vector<std::uint32_t> predict_experience(const Learner& learner,
                                                     const std::vector<Sample>& samples) {
    std::vector<std::uint32_t> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(predict_one(learner, s));
    return out;
}

}  // namespace nds
