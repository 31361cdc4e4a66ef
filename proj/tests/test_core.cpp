#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "nds/core.hpp"
#include "nds/rng.hpp"

using namespace nds;

namespace {

StreamView make_stream(std::size_t n, std::size_t d = 3, std::uint32_t n_classes = 4) {
    StreamView s;
    s.d = d;
    s.n_classes = n_classes;
    s.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.samples[i].id = i;
        s.samples[i].label = static_cast<std::uint32_t>(i % n_classes);
        s.samples[i].run_id = static_cast<std::uint32_t>(i / 5);
        s.samples[i].features = {float(i), float(2 * i), float(3 * i)};
    }
    return s;
}

}  // namespace

TEST_CASE("split_into_experiences sizes follow ceiling division") {
    auto s = make_stream(25);
    auto batches = split_into_experiences(s, 10);
    REQUIRE(batches.size() == 3);
    CHECK(batches[0].samples.size() == 10);
    CHECK(batches[1].samples.size() == 10);
    CHECK(batches[2].samples.size() == 5);
    for (std::size_t i = 0; i < batches.size(); ++i) CHECK(batches[i].index == i);
}

TEST_CASE("split_into_experiences with E=1 yields singletons in order") {
    auto s = make_stream(7);
    auto batches = split_into_experiences(s, 1);
    REQUIRE(batches.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        REQUIRE(batches[i].samples.size() == 1);
        CHECK(batches[i].samples[0].id == i);
    }
}

TEST_CASE("experience concatenation round-trips for many E") {
    auto s = make_stream(53);
    for (std::size_t e : {1, 2, 3, 7, 10, 53, 100}) {
        auto batches = split_into_experiences(s, e);
        std::vector<Sample> joined;
        for (auto& b : batches)
            joined.insert(joined.end(), b.samples.begin(), b.samples.end());
        REQUIRE(joined.size() == s.size());
        for (std::size_t i = 0; i < joined.size(); ++i) {
            CHECK(joined[i].id == s.samples[i].id);
            CHECK(joined[i].label == s.samples[i].label);
        }
        // only the final batch may be short
        for (std::size_t i = 0; i + 1 < batches.size(); ++i)
            CHECK(batches[i].samples.size() == e);
    }
}

TEST_CASE("split_into_experiences rejects bad input") {
    auto s = make_stream(5);
    CHECK_THROWS_AS(split_into_experiences(s, 0), config_error);
    StreamView empty;
    CHECK_THROWS_AS(split_into_experiences(empty, 10), config_error);
}

TEST_CASE("shuffle_stream is a deterministic permutation with dense ids") {
    auto s = make_stream(101);
    auto a = shuffle_stream(s, 42);
    auto b = shuffle_stream(s, 42);
    auto c = shuffle_stream(s, 43);

    REQUIRE(a.size() == s.size());
    // determinism
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.samples[i].label == b.samples[i].label);
        CHECK(a.samples[i].features == b.samples[i].features);
    }
    // different seed gives a different order (overwhelmingly likely for n=101)
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.samples[i].features != c.samples[i].features) any_diff = true;
    CHECK(any_diff);

    // multiset of (features, label) preserved
    auto key = [](const Sample& x) { return std::make_pair(x.features, x.label); };
    std::multiset<std::pair<std::vector<float>, std::uint32_t>> before, after;
    for (auto& x : s.samples) before.insert(key(x));
    for (auto& x : a.samples) after.insert(key(x));
    CHECK(before == after);

    // ids dense and unique
    std::set<std::uint64_t> ids;
    for (auto& x : a.samples) ids.insert(x.id);
    REQUIRE(ids.size() == a.size());
    CHECK(*ids.begin() == 0);
    CHECK(*ids.rbegin() == a.size() - 1);

    // per-class counts preserved
    std::map<std::uint32_t, int> cnt_before, cnt_after;
    for (auto& x : s.samples) cnt_before[x.label]++;
    for (auto& x : a.samples) cnt_after[x.label]++;
    CHECK(cnt_before == cnt_after);

    // macro plan carried positionally
    CHECK(a.macro_plan.size() == s.macro_plan.size());
}

TEST_CASE("shuffling twice with different seeds still preserves the multiset") {
    auto s = make_stream(64);
    auto t = shuffle_stream(shuffle_stream(s, 1), 2);
    std::multiset<std::uint32_t> before, after;
    for (auto& x : s.samples) before.insert(x.label);
    for (auto& x : t.samples) after.insert(x.label);
    CHECK(before == after);
}

TEST_CASE("rng unit() stays in [0,1) and has sane mean") {
    Rng rng(7);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double u = rng.unit();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("rng index() is unbiased across a small range") {
    Rng rng(11);
    const std::uint64_t k = 7;
    std::vector<int> counts(k, 0);
    const int n = 140000;
    for (int i = 0; i < n; ++i) counts[rng.index(k)]++;
    for (auto c : counts) CHECK(std::abs(c - n / double(k)) < 5 * std::sqrt(n / double(k)));
    CHECK_THROWS_AS(rng.index(0), config_error);
}

TEST_CASE("rng normal() has near-standard moments") {
    Rng rng(13);
    const int n = 200000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("rng is reproducible for a fixed seed") {
    Rng a(99), b(99);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.u64() == b.u64());
    Rng c(99), d(99);
    for (int i = 0; i < 1000; ++i) REQUIRE(c.normal() == d.normal());
}

TEST_CASE("derive_seed separates stage streams") {
    const std::uint64_t s = 12345;
    CHECK(derive_seed(s, 1) != derive_seed(s, 2));
    CHECK(derive_seed(s, 1) != s);
    CHECK(derive_seed(s, 1) == derive_seed(s, 1));
}

TEST_CASE("uniform_int covers both endpoints") {
    Rng rng(5);
    bool lo = false, hi = false;
    for (int i = 0; i < 1000; ++i) {
        auto v = rng.uniform_int(3, 9);
        REQUIRE(v >= 3);
        REQUIRE(v <= 9);
        if (v == 3) lo = true;
        if (v == 9) hi = true;
    }
    CHECK(lo);
    CHECK(hi);
}
