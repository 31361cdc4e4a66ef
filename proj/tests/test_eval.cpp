#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "nds/eval.hpp"
#include "nds/rng.hpp"

using namespace nds;
using Catch::Approx;

TEST_CASE("accumulate counts per class and macro") {
    auto r = make_report(4, 2);
    std::vector<std::uint32_t> preds(10, 3), labels(10, 3);
    accumulate(r, 0, preds, labels);
    CHECK(r.corr[3][0] == 10);
    CHECK(r.tot[3][0] == 10);
    CHECK(r.tot[2][0] == 0);

    accumulate(r, 1, {}, {});  // empty batch is a no-op
    CHECK(r.tot[3][1] == 0);

    accumulate(r, 1, {0, 1, 1}, {0, 0, 1});
    CHECK(r.corr[0][1] == 1);
    CHECK(r.tot[0][1] == 2);
    CHECK(r.corr[1][1] == 1);
    CHECK(r.tot[1][1] == 1);

    CHECK_THROWS_AS(accumulate(r, 0, {0, 1}, {0}), config_error);
    CHECK_THROWS_AS(accumulate(r, 5, {0}, {0}), config_error);
}

TEST_CASE("amca evaluates the class-and-macro mean accuracy") {
    auto r = make_report(2, 1);
    accumulate(r, 0, {0, 1, 0, 1}, {0, 1, 1, 1});
    // class 0: 1/1 correct; class 1: 2/3... build the exact example instead
    r = make_report(2, 1);
    accumulate(r, 0, {0, 0, 1, 1}, {0, 1, 1, 1});
    // class 0 accuracy 1.0 (1/1), class 1 accuracy 2/3
    CHECK(amca(r) == Approx((1.0 + 2.0 / 3.0) / 2).epsilon(1e-12));

    r = make_report(2, 1);
    accumulate(r, 0, {0, 1, 1, 1}, {0, 0, 1, 1});
    // class 0: 1/2 = 0.5, class 1: 2/2 = 1.0
    CHECK(amca(r) == Approx(0.75).epsilon(1e-12));
}

TEST_CASE("amca limit cases") {
    auto r = make_report(3, 2);
    for (std::size_t e = 0; e < 2; ++e)
        accumulate(r, e, {0, 1, 2}, {0, 1, 2});
    CHECK(amca(r) == 1.0);

    r = make_report(3, 2);
    for (std::size_t e = 0; e < 2; ++e)
        accumulate(r, e, {1, 2, 0}, {0, 1, 2});
    CHECK(amca(r) == 0.0);

    r = make_report(3, 2);
    CHECK_THROWS_AS(amca(r), numeric_error);
}

TEST_CASE("empty cells are excluded with divisor adjustment") {
    auto r = make_report(2, 2);
    accumulate(r, 0, {0, 1}, {0, 1});  // both classes in macro 0
    accumulate(r, 1, {0}, {0});        // class 1 absent from macro 1
    auto detail = amca_detail(r);
    CHECK(detail.included_cells == 3);
    CHECK(detail.excluded_cells == 1);
    CHECK(detail.value == Approx(1.0).epsilon(1e-12));

    // one wrong prediction in the populated macro-1 cell
    accumulate(r, 1, {1}, {0});
    detail = amca_detail(r);
    CHECK(detail.value == Approx((1.0 + 1.0 + 0.5) / 3).epsilon(1e-12));
}

TEST_CASE("amca equals a brute-force recomputation from raw logs") {
    Rng rng(404);
    const std::uint32_t n_classes = 7;
    const std::size_t n_macros = 5;
    struct Row {
        std::uint32_t pred, label;
        std::size_t macro;
    };
    std::vector<Row> log;
    for (int i = 0; i < 5000; ++i)
        log.push_back({std::uint32_t(rng.index(n_classes)),
                       std::uint32_t(rng.index(n_classes)), rng.index(n_macros)});

    auto r = make_report(n_classes, n_macros);
    for (auto& row : log) accumulate(r, row.macro, {row.pred}, {row.label});

    // independent recomputation straight from the log
    std::vector<std::vector<double>> corr(n_classes, std::vector<double>(n_macros, 0));
    std::vector<std::vector<double>> tot(n_classes, std::vector<double>(n_macros, 0));
    for (auto& row : log) {
        tot[row.label][row.macro] += 1;
        if (row.pred == row.label) corr[row.label][row.macro] += 1;
    }
    double sum = 0;
    std::size_t cells = 0;
    for (std::uint32_t c = 0; c < n_classes; ++c)
        for (std::size_t e = 0; e < n_macros; ++e)
            if (tot[c][e] > 0) {
                sum += corr[c][e] / tot[c][e];
                cells += 1;
            }
    CHECK(amca(r) == Approx(sum / double(cells)).epsilon(1e-12));
}

TEST_CASE("amca ignores per-class test-set inflation at fixed accuracy") {
    auto r1 = make_report(2, 1);
    accumulate(r1, 0, {0, 1, 1}, {0, 1, 0});  // class 0: 1/2, class 1: 1/1
    auto r2 = make_report(2, 1);
    // triple every class-0 observation, same percentages
    accumulate(r2, 0, {0, 0, 0, 1, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0, 0, 1, 1, 1});
    CHECK(amca(r1) == Approx(amca(r2)).epsilon(1e-12));
}

TEST_CASE("temporal profile of a constant stream is zero") {
    StreamView s;
    s.d = 3;
    s.n_classes = 2;
    for (int i = 0; i < 100; ++i) {
        Sample x;
        x.id = std::size_t(i);
        x.label = 0;
        x.features = {1.0f, 2.0f, 3.0f};
        s.samples.push_back(std::move(x));
    }
    auto profile = temporal_similarity_profile(s, 10);
    REQUIRE(profile.size() == 10);
    for (auto& [k, v] : profile) CHECK(v == 0.0);

    CHECK_THROWS_AS(temporal_similarity_profile(s, 100), config_error);
    CHECK_THROWS_AS(temporal_similarity_profile(s, 250), config_error);
}

TEST_CASE("imbalance profile reports per-window frequencies and gini") {
    StreamView s;
    s.d = 1;
    s.n_classes = 4;
    // round robin: perfectly balanced windows
    for (int i = 0; i < 80; ++i) {
        Sample x;
        x.id = std::size_t(i);
        x.label = std::uint32_t(i % 4);
        x.features = {0.0f};
        s.samples.push_back(std::move(x));
    }
    auto prof = imbalance_profile(s, 4);
    REQUIRE(prof.size() == 20);
    for (auto& w : prof) {
        CHECK(w.gini == Approx(0.0).margin(1e-12));
        double sum = 0;
        for (auto f : w.freq) sum += f;
        CHECK(sum == Approx(1.0).epsilon(1e-12));
    }

    // single-class stream: point-mass gini (N_c - 1) / N_c
    for (auto& x : s.samples) x.label = 2;
    prof = imbalance_profile(s, 10);
    for (auto& w : prof) CHECK(w.gini == Approx(3.0 / 4).epsilon(1e-12));

    CHECK_THROWS_AS(imbalance_profile(s, 0), config_error);
}

TEST_CASE("imbalance profile recovers zipf frequencies on a skewed stream") {
    Rng rng(77);
    auto weights = std::vector<double>{0.48, 0.24, 0.16, 0.12};
    StreamView s;
    s.d = 1;
    s.n_classes = 4;
    for (int i = 0; i < 50000; ++i) {
        const double u = rng.unit();
        double acc = 0;
        std::uint32_t label = 3;
        for (std::uint32_t c = 0; c < 4; ++c) {
            acc += weights[c];
            if (u < acc) {
                label = c;
                break;
            }
        }
        Sample x;
        x.id = std::size_t(i);
        x.label = label;
        x.features = {0.0f};
        s.samples.push_back(std::move(x));
    }
    auto prof = imbalance_profile(s, 50000);
    REQUIRE(prof.size() == 1);
    for (std::uint32_t c = 0; c < 4; ++c)
        CHECK(std::abs(prof[0].freq[c] - weights[c]) < 0.02);
    CHECK(prof[0].gini > 0.2);
}

TEST_CASE("spearman rank correlation") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {9, 7, 5, 3}) == Approx(-1.0));
    // monotone but nonlinear is still rank-perfect
    CHECK(spearman({1, 2, 3, 4, 5}, {1, 8, 27, 64, 125}) == Approx(1.0));
    // ties get average ranks
    const double r = spearman({1, 2, 2, 3}, {1, 2, 2, 3});
    CHECK(r == Approx(1.0));
    CHECK_THROWS_AS(spearman({1}, {1}), config_error);
    CHECK_THROWS_AS(spearman({1, 1, 1}, {1, 2, 3}), numeric_error);
}

TEST_CASE("report csv lists every cell and a summary per checkpoint") {
    auto r = make_report(2, 2);
    accumulate(r, 0, {0, 1}, {0, 1});
    accumulate(r, 1, {0, 1}, {0, 0});
    std::ostringstream os;
    write_report_csv(os, {r, r});
    std::istringstream is(os.str());
    std::string line;
    std::size_t rows = 0, summaries = 0;
    std::getline(is, line);
    CHECK(line == "checkpoint,macro_experience,class,correct,total,accuracy");
    while (std::getline(is, line)) {
        rows += 1;
        if (line.find("summary") != std::string::npos) summaries += 1;
    }
    CHECK(rows == 2 * (4 + 1));
    CHECK(summaries == 2);
}
