#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "nds/core.hpp"
#include "nds/errors.hpp"
#include "nds/rng.hpp"

namespace nds {

struct RunLengthRange {
    std::size_t min = 4;
    std::size_t max = 12;
};

// Full description of a synthetic stream pair (train + test). Identical specs,
// seed included, generate bit-identical streams.
struct StreamSpec {
    std::uint32_t n_classes = 10;
    std::size_t d = 16;
    std::size_t n_macros = 9;          // macro-experience count
    std::size_t samples_per_macro = 1200;
    double zipf_s = 1.0;               // class-imbalance exponent, 0 = uniform
    RunLengthRange run_length;         // contiguous same-class run lengths
    double rho = 0.95;                 // within-run correlation, [0, 1)
    double sigma = 0.35;               // within-run noise scale
    double cluster_sep = 3.0;          // minimum inter-class center distance
    double drift_scale = 0.7;          // per-macro center displacement norm
    double p_absent = 0.0;             // per-macro class dropout probability
    bool interleave = false;           // merge open runs frame-by-frame
    bool permute_ranks = true;         // per-macro rank permutation of classes
    std::size_t test_samples_per_macro = 0;  // 0: same as samples_per_macro
    std::size_t n_test_conditions = 0;       // 0: mirror the train macros
    bool test_from_runs = false;       // test partition keeps run structure
    std::uint64_t seed = 0;
};

inline void validate_spec(const StreamSpec& s) {
    if (s.n_classes < 2) throw config_error("stream spec: n_classes must be >= 2");
    if (s.d == 0) throw config_error("stream spec: d must be >= 1");
    if (s.n_macros == 0) throw config_error("stream spec: n_macros must be >= 1");
    if (s.samples_per_macro == 0)
        throw config_error("stream spec: samples_per_macro must be >= 1");
    if (s.zipf_s < 0) throw config_error("stream spec: zipf_s must be >= 0");
    if (s.run_length.min == 0 || s.run_length.min > s.run_length.max)
        throw config_error("stream spec: run_length must satisfy 1 <= min <= max");
    if (s.rho < 0 || s.rho >= 1) throw config_error("stream spec: rho must be in [0, 1)");
    if (s.sigma <= 0) throw config_error("stream spec: sigma must be > 0");
    if (s.cluster_sep <= 0) throw config_error("stream spec: cluster_sep must be > 0");
    if (s.drift_scale < 0) throw config_error("stream spec: drift_scale must be >= 0");
    if (s.p_absent < 0 || s.p_absent >= 1)
        throw config_error("stream spec: p_absent must be in [0, 1)");
}

// Rank weights proportional to 1/r^s, normalized.
inline std::vector<double> zipf_weights(std::uint32_t n_classes, double s) {
    if (n_classes == 0) throw config_error("zipf_weights: n_classes must be >= 1");
    if (s < 0) throw config_error("zipf_weights: exponent must be >= 0");
    std::vector<double> w(n_classes);
    double sum = 0;
    for (std::uint32_t r = 0; r < n_classes; ++r) {
        w[r] = 1.0 / std::pow(static_cast<double>(r + 1), s);
        sum += w[r];
    }
    for (auto& x : w) x /= sum;
    return w;
}

namespace detail {

// Class base centers with pairwise distance >= cluster_sep. Axis-aligned when
// they fit (exact separation); random directions rescaled to the worst pair
// otherwise.
inline std::vector<std::vector<double>> class_centers(const StreamSpec& spec) {
    std::vector<std::vector<double>> mu(spec.n_classes, std::vector<double>(spec.d, 0.0));
    if (spec.n_classes <= spec.d) {
        const double a = spec.cluster_sep / std::sqrt(2.0);
        for (std::uint32_t c = 0; c < spec.n_classes; ++c) mu[c][c] = a;
        return mu;
    }
    Rng rng(derive_seed(spec.seed, /*tag=*/0x63656e74ULL));
    for (auto& v : mu) {
        double norm2 = 0;
        for (auto& x : v) {
            x = rng.normal();
            norm2 += x * x;
        }
        const double inv = 1.0 / std::sqrt(std::max(norm2, 1e-300));
        for (auto& x : v) x *= inv;
    }
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = i + 1; j < mu.size(); ++j) {
            double d2 = 0;
            for (std::size_t k = 0; k < spec.d; ++k) {
                const double diff = mu[i][k] - mu[j][k];
                d2 += diff * diff;
            }
            min_dist = std::min(min_dist, std::sqrt(d2));
        }
    if (min_dist <= 0)
        throw numeric_error("class_centers: degenerate random directions");
    const double scale = spec.cluster_sep / min_dist;
    for (auto& v : mu)
        for (auto& x : v) x *= scale;
    return mu;
}

// Macro-experience displacement, shared by all classes: unit axis cycling
// through dimensions, sign flipped each full cycle. Adjacent macros always get
// distinct vectors of norm drift_scale.
inline std::vector<double> drift_vector(const StreamSpec& spec, std::size_t e) {
    std::vector<double> v(spec.d, 0.0);
    if (spec.drift_scale == 0) return v;
    const std::size_t axis = e % spec.d;
    const double sign = ((e / spec.d) % 2 == 0) ? 1.0 : -1.0;
    v[axis] = sign * spec.drift_scale;
    return v;
}

inline std::string drift_tag_for(std::size_t condition) {
    return "drift-" + std::to_string(condition);
}

}  // namespace detail

// One descriptor per macro-experience. All macros share one distribution when
// interleaving is on or when rank permutation and dropout are both disabled;
// otherwise each macro gets its own rank permutation and dropout mask.
inline std::vector<MacroExperienceDescriptor> make_macro_plan(const StreamSpec& spec,
                                                              Rng& rng) {
    validate_spec(spec);
    const auto base = zipf_weights(spec.n_classes, spec.zipf_s);
    const bool shared =
        spec.interleave || (!spec.permute_ranks && spec.p_absent == 0.0);

    std::vector<MacroExperienceDescriptor> plan(spec.n_macros);
    for (std::size_t e = 0; e < spec.n_macros; ++e) {
        auto& me = plan[e];
        me.start = e * spec.samples_per_macro;
        me.end = (e + 1) * spec.samples_per_macro;
        me.drift_tag = detail::drift_tag_for(e);
        if (shared) {
            me.class_proportions = base;
            continue;
        }
        std::vector<double> props(spec.n_classes, 0.0);
        std::vector<std::uint32_t> perm(spec.n_classes);
        std::iota(perm.begin(), perm.end(), 0u);
        if (spec.permute_ranks) {
            for (std::size_t i = perm.size(); i > 1; --i)
                std::swap(perm[i - 1], perm[rng.index(i)]);
        }
        for (std::uint32_t r = 0; r < spec.n_classes; ++r) props[perm[r]] = base[r];

        if (spec.p_absent > 0) {
            bool ok = false;
            for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
                std::vector<double> masked = props;
                double mass = 0;
                for (auto& p : masked) {
                    if (rng.bernoulli(spec.p_absent)) p = 0;
                    mass += p;
                }
                if (mass > 0) {
                    for (auto& p : masked) p /= mass;
                    props = masked;
                    ok = true;
                }
            }
            if (!ok)
                throw config_error(
                    "make_macro_plan: dropout removed every class 100 times in a row");
        }
        me.class_proportions = std::move(props);
    }

    // Dropout may silence a class in every macro-experience, which would leave
    // it without a single training sample. Re-seat such a class in one macro
    // at that macro's smallest surviving share.
    for (std::uint32_t c = 0; c < spec.n_classes; ++c) {
        bool present = false;
        for (const auto& me : plan)
            if (me.class_proportions[c] > 0) present = true;
        if (present) continue;
        auto& props = plan[rng.index(spec.n_macros)].class_proportions;
        double smallest = 1.0;
        for (double p : props)
            if (p > 0 && p < smallest) smallest = p;
        props[c] = smallest;
        double mass = 0;
        for (double p : props) mass += p;
        for (auto& p : props) p /= mass;
    }
    return plan;
}

namespace detail {

struct OpenRun {
    std::uint32_t label = 0;
    std::uint32_t run_id = 0;
    std::size_t frames_left = 0;
    std::vector<double> x;  // next frame to emit
    const std::vector<double>* mu = nullptr;
};

inline std::uint32_t pick_class(const std::vector<double>& props, Rng& rng) {
    const double u = rng.unit();
    double acc = 0;
    std::uint32_t last_present = 0;
    for (std::uint32_t c = 0; c < props.size(); ++c) {
        if (props[c] <= 0) continue;
        last_present = c;
        acc += props[c];
        if (u < acc) return c;
    }
    return last_present;  // guards accumulated rounding at u ~ 1
}

inline void ar_advance(std::vector<double>& x, const std::vector<double>& mu,
                       double rho, double sigma, Rng& rng) {
    const double noise = sigma * std::sqrt(1.0 - rho * rho);
    for (std::size_t k = 0; k < x.size(); ++k)
        x[k] = mu[k] + rho * (x[k] - mu[k]) + noise * rng.normal();
}

inline std::vector<double> ar_start(const std::vector<double>& mu, double sigma,
                                    Rng& rng) {
    std::vector<double> x(mu.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = mu[k] + sigma * rng.normal();
    return x;
}

inline Sample emit(const OpenRun& run, std::uint64_t id) {
    Sample s;
    s.id = id;
    s.label = run.label;
    s.run_id = run.run_id;
    s.features.resize(run.x.size());
    for (std::size_t k = 0; k < run.x.size(); ++k)
        s.features[k] = static_cast<float>(run.x[k]);
    return s;
}

// Balanced per-class quotas over the classes present in `props`, exact up to
// +-1 (remainder spread over an rng permutation of the present classes).
inline std::vector<std::size_t> balanced_quotas(const std::vector<double>& props,
                                                std::size_t total, Rng& rng) {
    std::vector<std::uint32_t> present;
    for (std::uint32_t c = 0; c < props.size(); ++c)
        if (props[c] > 0) present.push_back(c);
    if (present.empty()) throw config_error("balanced_quotas: no class present");
    std::vector<std::size_t> quota(props.size(), 0);
    const std::size_t base = total / present.size();
    std::size_t rem = total % present.size();
    for (auto c : present) quota[c] = base;
    for (std::size_t i = present.size(); i > 1; --i)
        std::swap(present[i - 1], present[rng.index(i)]);
    for (std::size_t i = 0; i < rem; ++i) quota[present[i]] += 1;
    return quota;
}

}  // namespace detail

struct GeneratedStreams {
    StreamView train;
    StreamView test;
};

// Builds the train stream (runs of AR(1) trajectories around drifting class
// centers, class picked per run from the macro's proportions) and the test
// stream (class-balanced draws from each evaluation condition).
inline GeneratedStreams generate_stream(const StreamSpec& spec) {
    validate_spec(spec);
    const auto centers = detail::class_centers(spec);

    Rng plan_rng(derive_seed(spec.seed, /*tag=*/0x706c616eULL));
    const auto plan = make_macro_plan(spec, plan_rng);

    GeneratedStreams out;
    out.train.d = spec.d;
    out.train.n_classes = spec.n_classes;
    out.train.macro_plan = plan;
    out.train.samples.reserve(spec.n_macros * spec.samples_per_macro);

    // Per-macro center: base center plus the macro's shared drift vector.
    std::vector<std::vector<std::vector<double>>> mu_by_macro;
    const std::size_t n_test_cond =
        spec.n_test_conditions ? spec.n_test_conditions : spec.n_macros;
    const std::size_t total_conditions =
        spec.n_test_conditions ? spec.n_macros + spec.n_test_conditions : spec.n_macros;
    mu_by_macro.resize(total_conditions);
    for (std::size_t e = 0; e < total_conditions; ++e) {
        const auto drift = detail::drift_vector(spec, e);
        mu_by_macro[e].resize(spec.n_classes);
        for (std::uint32_t c = 0; c < spec.n_classes; ++c) {
            mu_by_macro[e][c] = centers[c];
            for (std::size_t k = 0; k < spec.d; ++k) mu_by_macro[e][c][k] += drift[k];
        }
    }

    // Train emission. Runs never cross macro boundaries; with interleaving up
    // to 4 runs are open at once and each step advances one of them uniformly
    // at random.
    Rng train_rng(derive_seed(spec.seed, /*tag=*/0x747261696eULL));
    const std::size_t fanout = spec.interleave ? 4 : 1;
    std::uint32_t next_run_id = 0;
    std::uint64_t next_id = 0;
    // Last macro carrying mass for each class. Stochastic run picks can starve
    // a low-mass class for the whole stream; when its final chance comes up we
    // force one run so every planned class materializes at least once.
    std::vector<std::size_t> last_mass(spec.n_classes, 0);
    for (std::uint32_t c = 0; c < spec.n_classes; ++c)
        for (std::size_t m = 0; m < plan.size(); ++m)
            if (plan[m].class_proportions[c] > 0) last_mass[c] = m;
    std::vector<char> seen(spec.n_classes, 0);
    for (std::size_t e = 0; e < spec.n_macros; ++e) {
        const auto& props = plan[e].class_proportions;
        std::vector<detail::OpenRun> open;
        for (std::size_t emitted = 0; emitted < spec.samples_per_macro; ++emitted) {
            while (open.size() < fanout) {
                detail::OpenRun run;
                run.label = detail::pick_class(props, train_rng);
                for (std::uint32_t c = 0; c < spec.n_classes; ++c) {
                    if (seen[c] || last_mass[c] != e || props[c] <= 0) continue;
                    bool pending = false;
                    for (const auto& r : open)
                        if (r.label == c) pending = true;
                    if (pending) continue;
                    run.label = c;
                    break;
                }
                run.run_id = next_run_id++;
                run.frames_left =
                    spec.run_length.min +
                    static_cast<std::size_t>(train_rng.index(
                        spec.run_length.max - spec.run_length.min + 1));
                run.mu = &mu_by_macro[e][run.label];
                run.x = detail::ar_start(*run.mu, spec.sigma, train_rng);
                open.push_back(std::move(run));
            }
            const std::size_t pick =
                fanout == 1 ? 0 : static_cast<std::size_t>(train_rng.index(open.size()));
            auto& run = open[pick];
            out.train.samples.push_back(detail::emit(run, next_id++));
            seen[run.label] = 1;
            run.frames_left -= 1;
            if (run.frames_left == 0) {
                open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
            } else {
                detail::ar_advance(run.x, *run.mu, spec.rho, spec.sigma, train_rng);
            }
        }
        // runs still open at the boundary are truncated there
    }

    // Test emission: per condition, class-balanced over the classes present in
    // that condition.
    const std::size_t tspm =
        spec.test_samples_per_macro ? spec.test_samples_per_macro : spec.samples_per_macro;
    Rng test_rng(derive_seed(spec.seed, /*tag=*/0x74657374ULL));
    out.test.d = spec.d;
    out.test.n_classes = spec.n_classes;
    out.test.samples.reserve(n_test_cond * tspm);
    const auto shared_props = zipf_weights(spec.n_classes, spec.zipf_s);
    std::uint32_t test_run_id = 0;
    for (std::size_t j = 0; j < n_test_cond; ++j) {
        // Mirror mode reuses the train macro's condition; extension mode adds
        // fresh drift conditions past the train ones with no class absent.
        const std::size_t cond = spec.n_test_conditions ? spec.n_macros + j : j;
        const std::vector<double>& cond_props =
            spec.n_test_conditions ? shared_props : plan[j].class_proportions;
        const auto quota = detail::balanced_quotas(cond_props, tspm, test_rng);

        MacroExperienceDescriptor me;
        me.start = j * tspm;
        me.end = (j + 1) * tspm;
        me.drift_tag = detail::drift_tag_for(cond);
        me.class_proportions.resize(spec.n_classes, 0.0);
        for (std::uint32_t c = 0; c < spec.n_classes; ++c)
            me.class_proportions[c] = static_cast<double>(quota[c]) / tspm;
        out.test.macro_plan.push_back(std::move(me));

        if (spec.test_from_runs) {
            // Per-class AR runs truncated to the quota, then emitted in
            // shuffled run order: balance stays exact and runs stay coherent.
            std::vector<std::vector<Sample>> runs;
            for (std::uint32_t c = 0; c < spec.n_classes; ++c) {
                std::size_t need = quota[c];
                while (need > 0) {
                    std::size_t len =
                        spec.run_length.min +
                        static_cast<std::size_t>(test_rng.index(
                            spec.run_length.max - spec.run_length.min + 1));
                    len = std::min(len, need);
                    detail::OpenRun run;
                    run.label = c;
                    run.run_id = test_run_id++;
                    run.mu = &mu_by_macro[cond][c];
                    run.x = detail::ar_start(*run.mu, spec.sigma, test_rng);
                    std::vector<Sample> frames;
                    for (std::size_t t = 0; t < len; ++t) {
                        frames.push_back(detail::emit(run, 0));
                        if (t + 1 < len)
                            detail::ar_advance(run.x, *run.mu, spec.rho, spec.sigma,
                                               test_rng);
                    }
                    runs.push_back(std::move(frames));
                    need -= len;
                }
            }
            for (std::size_t i = runs.size(); i > 1; --i)
                std::swap(runs[i - 1], runs[test_rng.index(i)]);
            for (auto& frames : runs)
                for (auto& s : frames) {
                    s.id = out.test.samples.size();
                    out.test.samples.push_back(std::move(s));
                }
        } else {
            std::vector<std::uint32_t> labels;
            labels.reserve(tspm);
            for (std::uint32_t c = 0; c < spec.n_classes; ++c)
                labels.insert(labels.end(), quota[c], c);
            for (std::size_t i = labels.size(); i > 1; --i)
                std::swap(labels[i - 1], labels[test_rng.index(i)]);
            for (auto c : labels) {
                detail::OpenRun run;
                run.label = c;
                run.run_id = test_run_id++;
                run.mu = &mu_by_macro[cond][c];
                run.x = detail::ar_start(*run.mu, spec.sigma, test_rng);
                out.test.samples.push_back(
                    detail::emit(run, out.test.samples.size()));
            }
        }
    }
    return out;
}

// Equalizes per-class sample counts while preserving run structure: majority
// runs keep a proportional prefix, minority runs are duplicated (fresh run
// ids) right after their source. Output length equals input length; macro
// boundaries are carried positionally.
inline StreamView balance_stream(const StreamView& stream, std::uint64_t seed) {
    if (stream.empty()) throw config_error("balance_stream: empty stream");
    const std::uint32_t n_classes = stream.n_classes;
    if (n_classes == 0) throw config_error("balance_stream: stream declares no classes");

    std::vector<std::size_t> count(n_classes, 0);
    for (const auto& s : stream.samples) count[s.label] += 1;
    for (std::uint32_t c = 0; c < n_classes; ++c)
        if (count[c] == 0)
            throw config_error("balance_stream: class " + std::to_string(c) +
                               " has no samples, balance unsatisfiable");

    Rng rng(derive_seed(seed, /*tag=*/0x62616c616e6365ULL));
    const std::size_t n = stream.size();
    std::vector<std::size_t> target(n_classes, n / n_classes);
    {
        std::vector<std::uint32_t> order(n_classes);
        std::iota(order.begin(), order.end(), 0u);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.index(i)]);
        for (std::size_t i = 0; i < n % n_classes; ++i) target[order[i]] += 1;
    }

    // Group samples by run id, ordered by first occurrence (interleaved
    // streams scatter a run's frames; stream order within a run is kept).
    std::vector<std::uint32_t> run_order;
    std::vector<std::vector<std::size_t>> run_frames;  // positions per run
    std::vector<std::int64_t> slot(1, -1);             // run id -> dense index
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::uint32_t rid = stream.samples[pos].run_id;
        if (rid >= slot.size()) slot.resize(rid + 1, -1);
        if (slot[rid] < 0) {
            slot[rid] = static_cast<std::int64_t>(run_order.size());
            run_order.push_back(rid);
            run_frames.emplace_back();
        }
        run_frames[static_cast<std::size_t>(slot[rid])].push_back(pos);
    }
    const std::size_t n_runs = run_order.size();

    // Per-class keep quotas distributed over the class's runs proportionally
    // to run length (largest remainder); prefixes keep within-run coherence.
    std::vector<std::size_t> keep(n_runs);
    std::vector<std::vector<std::size_t>> runs_of_class(n_classes);
    for (std::size_t r = 0; r < n_runs; ++r)
        runs_of_class[stream.samples[run_frames[r][0]].label].push_back(r);
    for (std::uint32_t c = 0; c < n_classes; ++c) {
        const std::size_t have = count[c];
        const std::size_t want = std::min(target[c], have);
        std::vector<std::pair<double, std::size_t>> frac;  // remainder, run
        std::size_t assigned = 0;
        for (auto r : runs_of_class[c]) {
            const double exact =
                static_cast<double>(want) * run_frames[r].size() / have;
            keep[r] = static_cast<std::size_t>(exact);
            assigned += keep[r];
            frac.push_back({exact - static_cast<double>(keep[r]), r});
        }
        std::stable_sort(frac.begin(), frac.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t i = 0; i < frac.size() && assigned < want; ++i, ++assigned)
            keep[frac[i].second] += 1;
        for (auto r : runs_of_class[c]) keep[r] = std::min(keep[r], run_frames[r].size());
        // rounding guard: top up from runs with spare frames
        assigned = 0;
        for (auto r : runs_of_class[c]) assigned += keep[r];
        for (auto r : runs_of_class[c]) {
            while (assigned < want && keep[r] < run_frames[r].size()) {
                keep[r] += 1;
                assigned += 1;
            }
        }
    }

    // Assemble: each run contributes its kept prefix; minority classes then
    // need extra duplicates, inserted right after their source run.
    std::uint32_t next_run_id = 0;
    for (auto rid : run_order) next_run_id = std::max(next_run_id, rid + 1);

    std::vector<std::size_t> deficit(n_classes);
    for (std::uint32_t c = 0; c < n_classes; ++c)
        deficit[c] = target[c] > count[c] ? target[c] - count[c] : 0;

    // Duplicates for class c cycle over its runs in stream order; the last
    // duplicate may be a prefix so counts land exactly on target.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> dup_after(
        n_runs);  // (source run, length) blocks appended after each run
    for (std::uint32_t c = 0; c < n_classes; ++c) {
        std::size_t need = deficit[c];
        std::size_t i = 0;
        while (need > 0) {
            const std::size_t r = runs_of_class[c][i % runs_of_class[c].size()];
            const std::size_t len = std::min(need, run_frames[r].size());
            dup_after[r].push_back({r, len});
            need -= len;
            ++i;
        }
    }

    StreamView out;
    out.d = stream.d;
    out.n_classes = stream.n_classes;
    out.macro_plan = stream.macro_plan;
    out.samples.reserve(n);
    std::vector<std::size_t> emitted_of_run(n_runs, 0);
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::uint32_t rid = stream.samples[pos].run_id;
        const auto r = static_cast<std::size_t>(slot[rid]);
        if (emitted_of_run[r] < keep[r]) {
            out.samples.push_back(stream.samples[pos]);
            emitted_of_run[r] += 1;
        }
        // after a run's last original frame, flush its duplicate blocks
        if (pos == run_frames[r].back()) {
            for (auto [src, len] : dup_after[r]) {
                const std::uint32_t fresh = next_run_id++;
                for (std::size_t t = 0; t < len; ++t) {
                    Sample s = stream.samples[run_frames[src][t]];
                    s.run_id = fresh;
                    out.samples.push_back(std::move(s));
                }
            }
        }
    }
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i].id = i;
    return out;
}

// Parameter bundles emulating the three benchmark constructions.
inline StreamSpec preset_profile(const std::string& name) {
    StreamSpec s;
    if (name == "openloris-like") {
        s.n_classes = 10;
        s.d = 16;
        s.n_macros = 9;
        s.samples_per_macro = 1200;
        s.zipf_s = 1.0;
        s.run_length = {20, 60};
        s.rho = 0.95;
        s.sigma = 0.35;
        s.cluster_sep = 3.0;
        s.drift_scale = 1.5;
        s.p_absent = 0.6;
        s.interleave = false;
        s.permute_ranks = true;
        return s;
    }
    if (name == "core50-like") {
        s.n_classes = 10;
        s.d = 16;
        s.n_macros = 8;
        s.samples_per_macro = 1200;
        s.zipf_s = 1.5;
        s.run_length = {40, 120};
        s.rho = 0.95;
        s.sigma = 0.45;
        s.cluster_sep = 2.2;
        s.drift_scale = 0.5;
        s.p_absent = 0.0;
        s.interleave = true;
        s.permute_ranks = false;
        s.n_test_conditions = 3;
        return s;
    }
    if (name == "soda-like") {
        s.n_classes = 6;
        s.d = 16;
        s.n_macros = 6;
        s.samples_per_macro = 1500;
        s.zipf_s = 2.5;
        s.run_length = {1, 40};
        s.rho = 0.95;
        s.sigma = 0.35;
        s.cluster_sep = 3.0;
        s.drift_scale = 0.5;
        s.p_absent = 0.0;
        s.interleave = false;
        s.permute_ranks = false;
        return s;
    }
    throw config_error("preset_profile: unknown preset '" + name + "'");
}

}  // namespace nds
