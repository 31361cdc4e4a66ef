#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "nds/core.hpp"
#include "nds/errors.hpp"
#include "nds/rng.hpp"

namespace nds {

// Bounded replay store shared by all population policies. Invariants after
// every insert: |slots| <= capacity, sum(m_c) == |slots|, m_c <= n_c,
// n == sum(n_c).
struct ReplayMemory {
    std::size_t capacity = 1000;
    std::vector<Sample> slots;
    std::vector<double> scores;  // parallel to slots, used by the gradient policy
    std::uint64_t n = 0;         // stream items offered so far
    std::vector<std::uint64_t> n_c;  // per-class offered counts
    std::vector<std::uint64_t> m_c;  // per-class stored counts
    std::vector<bool> full_classes;  // class-balancing bookkeeping
};

inline ReplayMemory make_memory(std::size_t capacity, std::uint32_t n_classes) {
    if (capacity == 0) throw config_error("replay memory: capacity must be >= 1");
    if (n_classes == 0) throw config_error("replay memory: class count must be >= 1");
    ReplayMemory mem;
    mem.capacity = capacity;
    mem.n_c.assign(n_classes, 0);
    mem.m_c.assign(n_classes, 0);
    mem.full_classes.assign(n_classes, false);
    return mem;
}

namespace detail {

inline void count_offer(ReplayMemory& mem, const Sample& s) {
    if (s.label >= mem.n_c.size())
        throw config_error("replay insert: label out of range");
    mem.n += 1;
    mem.n_c[s.label] += 1;
}

inline void store_append(ReplayMemory& mem, const Sample& s, double score) {
    mem.slots.push_back(s);
    mem.scores.push_back(score);
    mem.m_c[s.label] += 1;
}

inline void store_replace(ReplayMemory& mem, std::size_t slot, const Sample& s,
                          double score) {
    mem.m_c[mem.slots[slot].label] -= 1;
    mem.m_c[s.label] += 1;
    mem.slots[slot] = s;
    mem.scores[slot] = score;
}

}  // namespace detail

// Algorithm-R reservoir: fill, then keep each of the n offers resident with
// probability m/n.
inline bool reservoir_insert(ReplayMemory& mem, const Sample& s, Rng& rng) {
    detail::count_offer(mem, s);
    if (mem.slots.size() < mem.capacity) {
        detail::store_append(mem, s, 0.0);
        return true;
    }
    const double p = static_cast<double>(mem.capacity) / static_cast<double>(mem.n);
    if (rng.unit() < p) {
        detail::store_replace(mem, rng.index(mem.slots.size()), s, 0.0);
        return true;
    }
    return false;
}

// At capacity, a coin flip decides storage into a uniformly picked slot.
inline bool random_insert(ReplayMemory& mem, const Sample& s, Rng& rng) {
    detail::count_offer(mem, s);
    if (mem.slots.size() < mem.capacity) {
        detail::store_append(mem, s, 0.0);
        return true;
    }
    if (rng.bernoulli(0.5)) {
        detail::store_replace(mem, rng.index(mem.slots.size()), s, 0.0);
        return true;
    }
    return false;
}

// Class-balancing policy. Once the memory is filled, a class that reaches the
// largest stored count is marked full for good. Not-full classes always store,
// evicting from a (uniformly chosen) largest class; full classes run a
// per-class reservoir over their own slots.
inline bool cbrs_insert(ReplayMemory& mem, const Sample& s, Rng& rng) {
    detail::count_offer(mem, s);
    if (mem.slots.size() < mem.capacity) {
        detail::store_append(mem, s, 0.0);
        return true;
    }
    const std::uint32_t c = s.label;
    const std::uint64_t largest =
        *std::max_element(mem.m_c.begin(), mem.m_c.end());
    if (mem.m_c[c] == largest) mem.full_classes[c] = true;

    if (!mem.full_classes[c]) {
        std::vector<std::uint32_t> largest_classes;
        for (std::uint32_t k = 0; k < mem.m_c.size(); ++k)
            if (mem.m_c[k] == largest) largest_classes.push_back(k);
        const std::uint32_t victim_class =
            largest_classes[rng.index(largest_classes.size())];
        // uniform slot within the victim class
        std::uint64_t pick = rng.index(mem.m_c[victim_class]);
        std::size_t slot = 0;
        for (std::size_t i = 0; i < mem.slots.size(); ++i) {
            if (mem.slots[i].label != victim_class) continue;
            if (pick == 0) {
                slot = i;
                break;
            }
            pick -= 1;
        }
        detail::store_replace(mem, slot, s, 0.0);
        return true;
    }

    // full class: per-class reservoir, m_c/n_c acceptance
    const double p =
        static_cast<double>(mem.m_c[c]) / static_cast<double>(mem.n_c[c]);
    if (rng.unit() < p) {
        std::uint64_t pick = rng.index(mem.m_c[c]);
        std::size_t slot = 0;
        for (std::size_t i = 0; i < mem.slots.size(); ++i) {
            if (mem.slots[i].label != c) continue;
            if (pick == 0) {
                slot = i;
                break;
            }
            pick -= 1;
        }
        detail::store_replace(mem, slot, s, 0.0);
        return true;
    }
    return false;
}

using GradFn = std::function<std::vector<double>(const Sample&)>;

// Cosine similarity clamped to [0, 1]; zero vectors count as maximally
// diverse.
inline double clamped_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    const double cosine = dot / std::sqrt(na * nb);
    return std::clamp(cosine, 0.0, 1.0);
}

inline constexpr double kGssBeta = 1e-6;

// Gradient-diversity policy. The newcomer's score c_new is its worst-case
// (maximum) clamped cosine similarity against M uniformly sampled stored
// items' gradients; a victim drawn proportionally to score + beta is replaced
// with probability c_i / (c_i + c_new), so diverse newcomers displace
// redundant residents. The 0/0 corner (both maximally diverse) is a fair coin.
inline bool gss_insert(ReplayMemory& mem, const Sample& s, const GradFn& grad_of,
                       std::size_t m_samples, Rng& rng) {
    if (!grad_of) throw config_error("gss_insert: gradient function required");
    if (m_samples == 0) throw config_error("gss_insert: sample count must be >= 1");
    detail::count_offer(mem, s);
    if (mem.slots.size() < mem.capacity) {
        detail::store_append(mem, s, 0.0);
        return true;
    }

    const std::vector<double> g_new = grad_of(s);
    const std::size_t draw = std::min(m_samples, mem.slots.size());
    std::vector<std::size_t> idx(mem.slots.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < draw; ++i)
        std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);

    double c_new = 0;
    for (std::size_t i = 0; i < draw; ++i)
        c_new = std::max(c_new, clamped_cosine(g_new, grad_of(mem.slots[idx[i]])));

    // victim proportional to score + beta
    double total = 0;
    for (double sc : mem.scores) total += sc + kGssBeta;
    double u = rng.unit() * total;
    std::size_t victim = mem.scores.size() - 1;
    for (std::size_t i = 0; i < mem.scores.size(); ++i) {
        u -= mem.scores[i] + kGssBeta;
        if (u < 0) {
            victim = i;
            break;
        }
    }

    const double c_i = mem.scores[victim];
    const double accept =
        (c_i == 0 && c_new == 0) ? 0.5 : c_i / (c_i + c_new);
    if (rng.unit() < accept) {
        detail::store_replace(mem, victim, s, c_new);
        return true;
    }
    return false;
}

// Uniform draw from the stored slots, by default without replacement; returns
// fewer than k only when the memory holds fewer.
inline std::vector<Sample> draw_replay(const ReplayMemory& mem, std::size_t k, Rng& rng,
                                       bool with_replacement = false) {
    std::vector<Sample> out;
    if (mem.slots.empty() || k == 0) return out;
    if (with_replacement) {
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i)
            out.push_back(mem.slots[rng.index(mem.slots.size())]);
        return out;
    }
    const std::size_t take = std::min(k, mem.slots.size());
    std::vector<std::size_t> idx(mem.slots.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < take; ++i)
        std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(mem.slots[idx[i]]);
    return out;
}

enum class ReplayPolicy { none, reservoir, random, cbrs, gss };

inline ReplayPolicy parse_policy(const std::string& name) {
    if (name == "none") return ReplayPolicy::none;
    if (name == "reservoir") return ReplayPolicy::reservoir;
    if (name == "random") return ReplayPolicy::random;
    if (name == "cbrs") return ReplayPolicy::cbrs;
    if (name == "gss") return ReplayPolicy::gss;
    throw config_error("unknown replay policy '" + name + "'");
}

inline std::string policy_name(ReplayPolicy p) {
    switch (p) {
        case ReplayPolicy::none: return "none";
        case ReplayPolicy::reservoir: return "reservoir";
        case ReplayPolicy::random: return "random";
        case ReplayPolicy::cbrs: return "cbrs";
        case ReplayPolicy::gss: return "gss";
    }
    throw config_error("unknown replay policy value");
}

inline bool replay_insert(ReplayMemory& mem, ReplayPolicy policy, const Sample& s,
                          Rng& rng, const GradFn& grad_of = {},
                          std::size_t gss_samples = 10) {
    switch (policy) {
        case ReplayPolicy::none:
            detail::count_offer(mem, s);
            return false;
        case ReplayPolicy::reservoir: return reservoir_insert(mem, s, rng);
        case ReplayPolicy::random: return random_insert(mem, s, rng);
        case ReplayPolicy::cbrs: return cbrs_insert(mem, s, rng);
        case ReplayPolicy::gss: return gss_insert(mem, s, grad_of, gss_samples, rng);
    }
    throw config_error("unknown replay policy value");
}

// Slot contents as a stream, order preserved, for dumping to the feature file
// format.
inline StreamView memory_snapshot_stream(const ReplayMemory& mem, std::size_t d,
                                         std::uint32_t n_classes) {
    StreamView s;
    s.d = d;
    s.n_classes = n_classes;
    s.samples = mem.slots;
    for (std::size_t i = 0; i < s.samples.size(); ++i) s.samples[i].id = i;
    return s;
}

}  // namespace nds
