#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nds/core.hpp"
#include "nds/errors.hpp"
#include "nds/eval.hpp"
#include "nds/learner.hpp"
#include "nds/replay.hpp"
#include "nds/rng.hpp"
#include "nds/snapshot.hpp"
#include "nds/synth.hpp"

namespace nds {

// Training-order treatments. Both balanced regimes rebalance the same ordered
// base stream, so every regime trains on the same amount of data.
enum class Regime { ordered_unbalanced, ordered_balanced, shuffled_balanced };

inline Regime parse_regime(const std::string& name) {
    if (name == "ordered-unbalanced") return Regime::ordered_unbalanced;
    if (name == "ordered-balanced") return Regime::ordered_balanced;
    if (name == "shuffled-balanced") return Regime::shuffled_balanced;
    throw config_error("unknown regime: " + name);
}

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::ordered_unbalanced: return "ordered-unbalanced";
        case Regime::ordered_balanced: return "ordered-balanced";
        case Regime::shuffled_balanced: return "shuffled-balanced";
    }
    throw config_error("unknown regime value");
}

struct RunConfig {
    Regime regime = Regime::ordered_unbalanced;
    LearnerKind learner = LearnerKind::sgd;
    ReplayPolicy policy = ReplayPolicy::none;
    std::size_t experience_size = 10;
    std::size_t memory_capacity = 1000;
    TrainHyper hyper;
    std::uint64_t seed = 0;
};

// Rejects contradictory combinations up front. The distillation learner is
// defined replay-free, so its policy is coerced rather than rejected; the
// method-internal-state learners reject any explicit policy.
inline void normalize_run_config(RunConfig& cfg) {
    validate_hyper(cfg.hyper);
    if (cfg.experience_size == 0)
        throw config_error("config: experience size must be positive");
    if (cfg.memory_capacity == 0)
        throw config_error("config: memory capacity must be positive");
    if ((cfg.learner == LearnerKind::slda || cfg.learner == LearnerKind::exstream) &&
        cfg.policy != ReplayPolicy::none)
        throw config_error(std::string("config: learner '") +
                           learner_kind_name(cfg.learner) +
                           "' carries its own state and takes no memory policy");
    if (cfg.learner == LearnerKind::lwf) cfg.policy = ReplayPolicy::none;
}

inline StreamView prepare_regime(const StreamView& base, Regime regime,
                                 std::uint64_t seed) {
    switch (regime) {
        case Regime::ordered_unbalanced: return base;
        case Regime::ordered_balanced: return balance_stream(base, seed);
        case Regime::shuffled_balanced:
            return shuffle_stream(balance_stream(base, seed), seed);
    }
    throw config_error("unknown regime value");
}

struct CheckpointRecord {
    std::size_t index = 0;
    std::size_t train_macro = 0;
    std::uint64_t samples_seen = 0;
    double amca_full = 0;
    double amca_seen = 0;
    std::size_t included_cells = 0;
    std::size_t excluded_cells = 0;
    EvalReport report;
};

struct RunResult {
    std::vector<CheckpointRecord> checkpoints;
    std::vector<std::string> log_lines;  // line-delimited JSON records
    Learner learner;
    ReplayMemory memory;
    double final_amca = 0;
};

namespace detail {

inline nlohmann::json hyper_to_json(const TrainHyper& h) {
    return nlohmann::json{{"lr", h.lr},
                          {"replay_k", h.replay_k},
                          {"replay_with_replacement", h.replay_with_replacement},
                          {"lwf_temperature", h.lwf_temperature},
                          {"lwf_lambda", h.lwf_lambda},
                          {"teacher_refresh", h.teacher_refresh},
                          {"exstream_passes", h.exstream_passes},
                          {"exstream_buffer", h.exstream_buffer},
                          {"gss_samples", h.gss_samples},
                          {"hidden_width", h.hidden_width},
                          {"slda_epsilon", h.slda_epsilon},
                          {"slda_plastic", h.slda_plastic},
                          {"slda_base_experiences", h.slda_base_experiences}};
}

// Half-open [start,end) per test macro-experience; a stream without a plan is
// one big macro.
inline std::vector<std::pair<std::size_t, std::size_t>> macro_ranges(
    const StreamView& stream) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (stream.macro_plan.empty()) {
        out.emplace_back(0, stream.size());
        return out;
    }
    for (const auto& m : stream.macro_plan) out.emplace_back(m.start, m.end);
    return out;
}

inline double amca_upto(const EvalReport& report, std::size_t last_macro) {
    double sum = 0;
    std::size_t cells = 0;
    const std::size_t cap = std::min(last_macro + 1, report.n_macros);
    for (std::uint32_t c = 0; c < report.n_classes; ++c)
        for (std::size_t e = 0; e < cap; ++e) {
            if (report.tot[c][e] == 0) continue;
            sum += static_cast<double>(report.corr[c][e]) /
                   static_cast<double>(report.tot[c][e]);
            cells += 1;
        }
    if (cells == 0)
        throw numeric_error("amca: no populated (class, macro) cell, metric undefined");
    return sum / static_cast<double>(cells);
}

}  // namespace detail

// Streams the training data through the learner one experience at a time,
// evaluating on every test macro-experience whenever training crosses a
// macro-experience boundary. The learner never sees the plan itself.
inline RunResult run_experiment(const StreamView& train_base, const StreamView& test,
                                RunConfig cfg, const LearnerSnapshot* init = nullptr) {
    normalize_run_config(cfg);
    if (train_base.empty()) throw config_error("run: empty training stream");
    if (test.empty()) throw config_error("run: empty test stream");
    if (train_base.d != test.d || train_base.n_classes != test.n_classes)
        throw config_error("run: train and test streams disagree on shape");

    const StreamView train = prepare_regime(train_base, cfg.regime, cfg.seed);
    const auto test_ranges = detail::macro_ranges(test);
    const auto train_ranges = detail::macro_ranges(train);

    RunResult res;
    res.memory = make_memory(cfg.memory_capacity, train.n_classes);
    if (init) {
        res.learner = init->learner;
        if (init->memory) res.memory = *init->memory;
    } else {
        res.learner = make_learner(cfg.learner, train.d, train.n_classes, cfg.hyper,
                                   cfg.seed);
    }
    Rng rng(derive_seed(cfg.seed, /*tag=*/0x747261696eULL));

    nlohmann::json header{{"type", "run_config"},
                          {"learner", learner_kind_name(cfg.learner)},
                          {"policy", policy_name(cfg.policy)},
                          {"regime", regime_name(cfg.regime)},
                          {"experience_size", cfg.experience_size},
                          {"memory_capacity", cfg.memory_capacity},
                          {"seed", cfg.seed},
                          {"n_classes", train.n_classes},
                          {"d", train.d},
                          {"train_samples", train.size()},
                          {"test_samples", test.size()},
                          {"hyper", detail::hyper_to_json(cfg.hyper)}};
    res.log_lines.push_back(header.dump());

    const bool log_stored =
        cfg.learner == LearnerKind::sgd && cfg.policy != ReplayPolicy::none;
    const auto batches = split_into_experiences(train, cfg.experience_size);
    std::size_t next_boundary = 0;
    std::uint64_t seen = 0;
    std::vector<double> trace;

    auto evaluate = [&](std::size_t train_macro) {
        CheckpointRecord ck;
        ck.index = res.checkpoints.size();
        ck.train_macro = train_macro;
        ck.samples_seen = seen;
        ck.report = make_report(test.n_classes, test_ranges.size());
        for (std::size_t e = 0; e < test_ranges.size(); ++e) {
            std::vector<Sample> part(test.samples.begin() +
                                         static_cast<std::ptrdiff_t>(test_ranges[e].first),
                                     test.samples.begin() +
                                         static_cast<std::ptrdiff_t>(test_ranges[e].second));
            const auto preds = predict_experience(res.learner, part);
            std::vector<std::uint32_t> truth;
            truth.reserve(part.size());
            for (const auto& s : part) truth.push_back(s.label);
            accumulate(ck.report, e, preds, truth);
        }
        const AmcaResult full = amca_detail(ck.report);
        ck.amca_full = full.value;
        ck.included_cells = full.included_cells;
        ck.excluded_cells = full.excluded_cells;
        ck.amca_seen = detail::amca_upto(ck.report, train_macro);
        trace.push_back(ck.amca_full);

        nlohmann::json line{{"type", "checkpoint"},
                            {"index", ck.index},
                            {"train_macro", ck.train_macro},
                            {"samples_seen", ck.samples_seen},
                            {"amca", ck.amca_full},
                            {"amca_seen", ck.amca_seen},
                            {"included_cells", ck.included_cells},
                            {"excluded_cells", ck.excluded_cells},
                            {"corr", ck.report.corr},
                            {"tot", ck.report.tot}};
        res.log_lines.push_back(line.dump());
        res.checkpoints.push_back(std::move(ck));
    };

    for (const auto& batch : batches) {
        std::vector<bool> stored;
        learner_observe(res.learner, batch.samples, res.memory, cfg.policy, cfg.hyper,
                        rng, log_stored ? &stored : nullptr);
        seen += batch.samples.size();

        nlohmann::json line{{"type", "experience"},
                            {"index", batch.index},
                            {"size", batch.samples.size()}};
        if (log_stored) {
            std::vector<int> bits;
            bits.reserve(stored.size());
            for (bool b : stored) bits.push_back(b ? 1 : 0);
            line["stored"] = bits;
        }
        res.log_lines.push_back(line.dump());

        while (next_boundary < train_ranges.size() &&
               seen >= train_ranges[next_boundary].second) {
            evaluate(next_boundary);
            ++next_boundary;
        }
    }
    // A plan that does not cover the tail still gets a closing checkpoint.
    if (res.checkpoints.empty() || res.checkpoints.back().samples_seen < seen)
        evaluate(train_ranges.size() - 1);

    res.final_amca = res.checkpoints.back().amca_full;
    for (auto& ck : res.checkpoints) ck.report.amca_trace = trace;

    nlohmann::json tail{{"type", "final"},
                        {"amca", res.final_amca},
                        {"checkpoints", res.checkpoints.size()}};
    res.log_lines.push_back(tail.dump());
    return res;
}

// One grid cell: a full config plus where its outputs landed.
struct GridCell {
    RunConfig cfg;
    std::string name;
    bool ok = false;
    std::string error;
    std::vector<double> amca_trace;
    double final_amca = 0;
};

struct GridSpec {
    std::vector<LearnerKind> learners;
    std::vector<ReplayPolicy> policies;
    std::vector<Regime> regimes;
    std::vector<std::uint64_t> seeds;
    RunConfig base;  // shared sizes and hyperparameters
};

inline std::string cell_name(const RunConfig& cfg) {
    std::ostringstream os;
    os << learner_kind_name(cfg.learner) << '_' << policy_name(cfg.policy) << '_'
       << regime_name(cfg.regime) << "_s" << cfg.seed;
    return os.str();
}

// Expands the product, collapsing the policy axis for learners that take no
// memory policy so the same cell never runs twice.
inline std::vector<RunConfig> expand_grid(const GridSpec& spec) {
    if (spec.learners.empty() || spec.regimes.empty() || spec.seeds.empty())
        throw config_error("grid: learners, regimes, and seeds must be non-empty");
    std::vector<ReplayPolicy> policies = spec.policies;
    if (policies.empty()) policies.push_back(ReplayPolicy::none);

    std::vector<RunConfig> cells;
    std::vector<std::string> names;
    for (auto learner : spec.learners)
        for (auto policy : policies)
            for (auto regime : spec.regimes)
                for (auto seed : spec.seeds) {
                    RunConfig cfg = spec.base;
                    cfg.learner = learner;
                    cfg.policy =
                        learner == LearnerKind::sgd ? policy : ReplayPolicy::none;
                    cfg.regime = regime;
                    cfg.seed = seed;
                    const std::string name = cell_name(cfg);
                    if (std::find(names.begin(), names.end(), name) != names.end())
                        continue;
                    names.push_back(name);
                    cells.push_back(cfg);
                }
    return cells;
}

// Runs every cell, isolating failures: a cell that throws is recorded with
// its error and the rest of the grid still runs. `streams_for_seed` hands
// back the train/test pair for a seed; `on_cell` persists a finished cell.
inline std::vector<GridCell> run_grid(
    const GridSpec& spec,
    const std::function<std::pair<const StreamView*, const StreamView*>(std::uint64_t)>&
        streams_for_seed,
    const std::function<void(const GridCell&, const RunResult&)>& on_cell = {}) {
    std::vector<GridCell> cells;
    for (const RunConfig& cfg : expand_grid(spec)) {
        GridCell cell;
        cell.cfg = cfg;
        cell.name = cell_name(cfg);
        try {
            const auto [train, test] = streams_for_seed(cfg.seed);
            RunResult res = run_experiment(*train, *test, cfg);
            cell.ok = true;
            cell.final_amca = res.final_amca;
            for (const auto& ck : res.checkpoints) cell.amca_trace.push_back(ck.amca_full);
            if (on_cell) on_cell(cell, res);
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

// Mean AMCA curve per (learner, policy, regime) across seeds. Curves of
// unequal length are averaged per checkpoint over the cells that reach it.
inline std::string curves_csv(const std::vector<GridCell>& cells) {
    std::map<std::string, std::pair<RunConfig, std::vector<std::vector<double>>>> groups;
    for (const auto& cell : cells) {
        if (!cell.ok) continue;
        std::ostringstream key;
        key << learner_kind_name(cell.cfg.learner) << '\0'
            << policy_name(cell.cfg.policy) << '\0' << regime_name(cell.cfg.regime);
        auto& slot = groups[key.str()];
        slot.first = cell.cfg;
        slot.second.push_back(cell.amca_trace);
    }
    std::ostringstream os;
    os << "checkpoint,learner,policy,regime,amca\n";
    char buf[64];
    for (const auto& [key, group] : groups) {
        std::size_t longest = 0;
        for (const auto& t : group.second) longest = std::max(longest, t.size());
        for (std::size_t k = 0; k < longest; ++k) {
            double sum = 0;
            std::size_t n = 0;
            for (const auto& t : group.second)
                if (k < t.size()) {
                    sum += t[k];
                    ++n;
                }
            std::snprintf(buf, sizeof buf, "%.9f", sum / static_cast<double>(n));
            os << k << ',' << learner_kind_name(group.first.learner) << ','
               << policy_name(group.first.policy) << ','
               << regime_name(group.first.regime) << ',' << buf << '\n';
        }
    }
    return os.str();
}

inline std::string curves_by_seed_csv(const std::vector<GridCell>& cells) {
    std::ostringstream os;
    os << "checkpoint,learner,policy,regime,seed,amca\n";
    char buf[64];
    for (const auto& cell : cells) {
        if (!cell.ok) continue;
        for (std::size_t k = 0; k < cell.amca_trace.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.9f", cell.amca_trace[k]);
            os << k << ',' << learner_kind_name(cell.cfg.learner) << ','
               << policy_name(cell.cfg.policy) << ',' << regime_name(cell.cfg.regime)
               << ',' << cell.cfg.seed << ',' << buf << '\n';
        }
    }
    return os.str();
}

}  // namespace nds
