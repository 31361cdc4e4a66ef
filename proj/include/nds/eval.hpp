#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "nds/core.hpp"
#include "nds/errors.hpp"

namespace nds {

// Correct/total counts per (class, macro-experience) cell for one evaluation
// pass, plus the per-checkpoint metric trace a runner may attach.
struct EvalReport {
    std::uint32_t n_classes = 0;
    std::size_t n_macros = 0;
    std::vector<std::vector<std::uint64_t>> corr;  // [class][macro]
    std::vector<std::vector<std::uint64_t>> tot;
    std::vector<double> amca_trace;
};

inline EvalReport make_report(std::uint32_t n_classes, std::size_t n_macros) {
    if (n_classes == 0 || n_macros == 0)
        throw config_error("make_report: class and macro counts must be positive");
    EvalReport r;
    r.n_classes = n_classes;
    r.n_macros = n_macros;
    r.corr.assign(n_classes, std::vector<std::uint64_t>(n_macros, 0));
    r.tot.assign(n_classes, std::vector<std::uint64_t>(n_macros, 0));
    return r;
}

inline void accumulate(EvalReport& report, std::size_t macro_index,
                       const std::vector<std::uint32_t>& predicted,
                       const std::vector<std::uint32_t>& truth) {
    if (predicted.size() != truth.size())
        throw config_error("accumulate: prediction/label length mismatch");
    if (macro_index >= report.n_macros)
        throw config_error("accumulate: macro index out of range");
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= report.n_classes)
            throw config_error("accumulate: label out of range");
        report.tot[truth[i]][macro_index] += 1;
        if (predicted[i] == truth[i]) report.corr[truth[i]][macro_index] += 1;
    }
}

struct AmcaResult {
    double value = 0;
    std::size_t included_cells = 0;
    std::size_t excluded_cells = 0;  // cells with no test samples
};

// Mean of per-cell accuracies. Cells with no test data are excluded and the
// divisor shrinks accordingly; with every cell populated this is exactly the
// plain double average over classes and macro-experiences.
inline AmcaResult amca_detail(const EvalReport& report) {
    AmcaResult res;
    double sum = 0;
    for (std::uint32_t c = 0; c < report.n_classes; ++c)
        for (std::size_t e = 0; e < report.n_macros; ++e) {
            if (report.tot[c][e] == 0) {
                res.excluded_cells += 1;
                continue;
            }
            sum += static_cast<double>(report.corr[c][e]) /
                   static_cast<double>(report.tot[c][e]);
            res.included_cells += 1;
        }
    if (res.included_cells == 0)
        throw numeric_error("amca: no populated (class, macro) cell, metric undefined");
    res.value = sum / static_cast<double>(res.included_cells);
    return res;
}

inline double amca(const EvalReport& report) { return amca_detail(report).value; }

// Mean Euclidean feature distance between positions t and t+k, for each lag
// k in 1..max_lag.
inline std::vector<std::pair<std::size_t, double>> temporal_similarity_profile(
    const StreamView& stream, std::size_t max_lag) {
    if (max_lag >= stream.size())
        throw config_error("temporal_similarity_profile: max_lag must be < stream length");
    std::vector<std::pair<std::size_t, double>> profile;
    profile.reserve(max_lag);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double sum = 0;
        const std::size_t pairs = stream.size() - k;
        for (std::size_t t = 0; t < pairs; ++t) {
            const auto& a = stream.samples[t].features;
            const auto& b = stream.samples[t + k].features;
            double d2 = 0;
            for (std::size_t j = 0; j < a.size(); ++j) {
                const double diff = static_cast<double>(a[j]) - static_cast<double>(b[j]);
                d2 += diff * diff;
            }
            sum += std::sqrt(d2);
        }
        profile.emplace_back(k, sum / static_cast<double>(pairs));
    }
    return profile;
}

// Gini coefficient of a discrete frequency vector (zeros included): 0 for
// uniform, (n-1)/n for a point mass.
inline double gini_coefficient(const std::vector<double>& freq) {
    if (freq.empty()) return 0;
    const double mean =
        std::accumulate(freq.begin(), freq.end(), 0.0) / static_cast<double>(freq.size());
    if (mean <= 0) return 0;
    double abs_diff = 0;
    for (double a : freq)
        for (double b : freq) abs_diff += std::abs(a - b);
    return abs_diff /
           (2.0 * static_cast<double>(freq.size()) * static_cast<double>(freq.size()) * mean);
}

struct WindowStats {
    std::size_t start = 0;
    std::size_t end = 0;
    std::vector<double> freq;  // per-class frequency, sums to 1
    double gini = 0;
};

// Class-frequency table plus Gini per non-overlapping window; the final
// window may be shorter.
inline std::vector<WindowStats> imbalance_profile(const StreamView& stream,
                                                  std::size_t window) {
    if (window == 0) throw config_error("imbalance_profile: window must be >= 1");
    std::vector<WindowStats> out;
    for (std::size_t start = 0; start < stream.size(); start += window) {
        WindowStats w;
        w.start = start;
        w.end = std::min(start + window, stream.size());
        w.freq.assign(stream.n_classes, 0.0);
        for (std::size_t i = start; i < w.end; ++i)
            w.freq[stream.samples[i].label] += 1.0;
        for (auto& f : w.freq) f /= static_cast<double>(w.end - w.start);
        w.gini = gini_coefficient(w.freq);
        out.push_back(std::move(w));
    }
    return out;
}

// Spearman rank correlation with average ranks on ties.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw config_error("spearman: need two sequences of equal length >= 2");
    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(xs);
    const auto ry = ranks(ys);
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0)
        throw numeric_error("spearman: constant sequence, correlation undefined");
    return sxy / std::sqrt(sxx * syy);
}

// Per-checkpoint report rows: (checkpoint, macro_experience, class, correct,
// total, accuracy), then one summary row per checkpoint with its metric.
inline void write_report_csv(std::ostream& os, const std::vector<EvalReport>& checkpoints) {
    os << "checkpoint,macro_experience,class,correct,total,accuracy\n";
    char buf[64];
    for (std::size_t ck = 0; ck < checkpoints.size(); ++ck) {
        const auto& r = checkpoints[ck];
        for (std::size_t e = 0; e < r.n_macros; ++e)
            for (std::uint32_t c = 0; c < r.n_classes; ++c) {
                const double acc =
                    r.tot[c][e] ? static_cast<double>(r.corr[c][e]) /
                                      static_cast<double>(r.tot[c][e])
                                : 0.0;
                std::snprintf(buf, sizeof buf, "%.9f", acc);
                os << ck << ',' << e << ',' << c << ',' << r.corr[c][e] << ','
                   << r.tot[c][e] << ',' << buf << '\n';
            }
        std::snprintf(buf, sizeof buf, "%.9f", amca(r));
        os << ck << ",summary,,,," << buf << '\n';
    }
}

}  // namespace nds
