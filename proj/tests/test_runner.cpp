#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>
#include <vector>

#include "nds/runner.hpp"

using namespace nds;
using Catch::Approx;

namespace {

StreamSpec small_spec(std::uint64_t seed) {
    StreamSpec spec = preset_profile("openloris-like");
    spec.n_macros = 4;
    spec.samples_per_macro = 150;
    spec.test_samples_per_macro = 60;
    spec.d = 8;
    spec.n_classes = 5;
    spec.seed = seed;
    return spec;
}

RunConfig small_config(LearnerKind learner, ReplayPolicy policy, Regime regime,
                       std::uint64_t seed) {
    RunConfig cfg;
    cfg.learner = learner;
    cfg.policy = policy;
    cfg.regime = regime;
    cfg.seed = seed;
    cfg.memory_capacity = 100;
    cfg.hyper.lr = 0.1;
    cfg.hyper.replay_k = 5;
    return cfg;
}

std::string report_csv(const RunResult& res) {
    std::vector<EvalReport> reports;
    for (const auto& ck : res.checkpoints) reports.push_back(ck.report);
    std::ostringstream os;
    write_report_csv(os, reports);
    return os.str();
}

}  // namespace

TEST_CASE("identical configs produce byte-identical logs and reports") {
    const GeneratedStreams streams = generate_stream(small_spec(7));
    const RunConfig cfg = small_config(LearnerKind::sgd, ReplayPolicy::reservoir,
                                       Regime::shuffled_balanced, 7);
    const RunResult a = run_experiment(streams.train, streams.test, cfg);
    const RunResult b = run_experiment(streams.train, streams.test, cfg);
    REQUIRE(a.log_lines == b.log_lines);
    REQUIRE(report_csv(a) == report_csv(b));
    REQUIRE(a.final_amca == b.final_amca);
}

TEST_CASE("checkpoints fire once per training macro-experience") {
    const GeneratedStreams streams = generate_stream(small_spec(3));
    for (auto regime : {Regime::ordered_unbalanced, Regime::ordered_balanced,
                        Regime::shuffled_balanced}) {
        const RunResult res = run_experiment(
            streams.train, streams.test,
            small_config(LearnerKind::slda, ReplayPolicy::none, regime, 3));
        REQUIRE(res.checkpoints.size() == 4);
        for (std::size_t k = 0; k < 4; ++k) {
            REQUIRE(res.checkpoints[k].train_macro == k);
            REQUIRE(res.checkpoints[k].samples_seen == (k + 1) * 150);
            REQUIRE(res.checkpoints[k].report.n_macros == 4);
        }
        REQUIRE(res.final_amca == res.checkpoints.back().amca_full);
        REQUIRE(res.checkpoints.back().amca_seen ==
                Approx(res.checkpoints.back().amca_full));
    }
}

TEST_CASE("the metric trace is attached to every checkpoint report") {
    const GeneratedStreams streams = generate_stream(small_spec(9));
    const RunResult res = run_experiment(
        streams.train, streams.test,
        small_config(LearnerKind::sgd, ReplayPolicy::random, Regime::ordered_balanced, 9));
    REQUIRE(res.checkpoints.size() == 4);
    for (const auto& ck : res.checkpoints) {
        REQUIRE(ck.report.amca_trace.size() == 4);
        for (std::size_t k = 0; k < 4; ++k)
            REQUIRE(ck.report.amca_trace[k] == res.checkpoints[k].amca_full);
    }
}

TEST_CASE("macro-experience boundaries never influence the learner") {
    const GeneratedStreams streams = generate_stream(small_spec(5));
    StreamView coarse = streams.train;
    // Same data, different virtual division: two fat macro-experiences.
    coarse.macro_plan.clear();
    MacroExperienceDescriptor first;
    first.start = 0;
    first.end = 300;
    first.drift_tag = "half-one";
    MacroExperienceDescriptor second;
    second.start = 300;
    second.end = streams.train.size();
    second.drift_tag = "half-two";
    coarse.macro_plan = {first, second};

    const RunConfig cfg = small_config(LearnerKind::sgd, ReplayPolicy::reservoir,
                                       Regime::ordered_unbalanced, 5);
    const RunResult fine = run_experiment(streams.train, streams.test, cfg);
    const RunResult fat = run_experiment(coarse, streams.test, cfg);
    REQUIRE(fine.checkpoints.size() == 4);
    REQUIRE(fat.checkpoints.size() == 2);

    const auto pa = predict_experience(fine.learner, streams.test.samples);
    const auto pb = predict_experience(fat.learner, streams.test.samples);
    REQUIRE(pa == pb);
}

TEST_CASE("learner and policy constraints are enforced before any work") {
    const GeneratedStreams streams = generate_stream(small_spec(2));
    RunConfig cfg = small_config(LearnerKind::slda, ReplayPolicy::reservoir,
                                 Regime::ordered_unbalanced, 2);
    REQUIRE_THROWS_AS(run_experiment(streams.train, streams.test, cfg), config_error);
    cfg = small_config(LearnerKind::exstream, ReplayPolicy::gss,
                       Regime::ordered_unbalanced, 2);
    REQUIRE_THROWS_AS(run_experiment(streams.train, streams.test, cfg), config_error);

    // The distillation learner silently drops the policy instead.
    cfg = small_config(LearnerKind::lwf, ReplayPolicy::reservoir,
                       Regime::ordered_unbalanced, 2);
    const RunResult res = run_experiment(streams.train, streams.test, cfg);
    REQUIRE(res.memory.n == 0);
    REQUIRE(res.log_lines.front().find("\"policy\":\"none\"") != std::string::npos);
}

TEST_CASE("the run log carries enough to recompute the metric exactly") {
    const GeneratedStreams streams = generate_stream(small_spec(11));
    const RunResult res = run_experiment(
        streams.train, streams.test,
        small_config(LearnerKind::sgd, ReplayPolicy::reservoir, Regime::ordered_unbalanced,
                     11));
    std::size_t checkpoints_seen = 0;
    for (const auto& line : res.log_lines) {
        const auto j = nlohmann::json::parse(line);
        if (j.at("type") != "checkpoint") continue;
        const auto corr = j.at("corr").get<std::vector<std::vector<std::uint64_t>>>();
        const auto tot = j.at("tot").get<std::vector<std::vector<std::uint64_t>>>();
        double sum = 0;
        std::size_t cells = 0;
        for (std::size_t c = 0; c < corr.size(); ++c)
            for (std::size_t e = 0; e < corr[c].size(); ++e) {
                if (tot[c][e] == 0) continue;
                sum += double(corr[c][e]) / double(tot[c][e]);
                ++cells;
            }
        REQUIRE(cells > 0);
        REQUIRE(j.at("amca").get<double>() == Approx(sum / cells).epsilon(1e-12));
        ++checkpoints_seen;
    }
    REQUIRE(checkpoints_seen == res.checkpoints.size());
}

TEST_CASE("stored flags are logged for the replay-backed learner only") {
    const GeneratedStreams streams = generate_stream(small_spec(13));
    const RunResult with_mem = run_experiment(
        streams.train, streams.test,
        small_config(LearnerKind::sgd, ReplayPolicy::reservoir, Regime::ordered_unbalanced,
                     13));
    bool saw_stored = false;
    for (const auto& line : with_mem.log_lines) {
        const auto j = nlohmann::json::parse(line);
        if (j.at("type") == "experience" && j.contains("stored")) {
            saw_stored = true;
            REQUIRE(j.at("stored").size() == j.at("size").get<std::size_t>());
        }
    }
    REQUIRE(saw_stored);

    const RunResult without = run_experiment(
        streams.train, streams.test,
        small_config(LearnerKind::slda, ReplayPolicy::none, Regime::ordered_unbalanced,
                     13));
    for (const auto& line : without.log_lines)
        REQUIRE(nlohmann::json::parse(line).contains("stored") == false);
}

TEST_CASE("a snapshot restarts a run from stored state") {
    const GeneratedStreams streams = generate_stream(small_spec(17));
    const RunConfig cfg = small_config(LearnerKind::sgd, ReplayPolicy::reservoir,
                                       Regime::ordered_unbalanced, 17);
    const RunResult first = run_experiment(streams.train, streams.test, cfg);

    LearnerSnapshot snap;
    snap.learner = first.learner;
    snap.memory = first.memory;
    const RunResult resumed = run_experiment(streams.train, streams.test, cfg, &snap);
    const RunResult fresh = run_experiment(streams.train, streams.test, cfg);

    // Same bytes in, same bytes out; a warm start diverges from a cold one.
    REQUIRE(resumed.final_amca ==
            run_experiment(streams.train, streams.test, cfg, &snap).final_amca);
    const auto warm = predict_experience(resumed.learner, streams.test.samples);
    const auto cold = predict_experience(fresh.learner, streams.test.samples);
    REQUIRE(warm.size() == cold.size());
    REQUIRE(resumed.memory.n == 2 * fresh.memory.n);
}

TEST_CASE("the grid expands with the policy axis collapsed for stateful learners") {
    GridSpec spec;
    spec.learners = {LearnerKind::sgd, LearnerKind::slda, LearnerKind::lwf};
    spec.policies = {ReplayPolicy::none, ReplayPolicy::reservoir};
    spec.regimes = {Regime::ordered_unbalanced};
    spec.seeds = {1};
    const auto cells = expand_grid(spec);
    REQUIRE(cells.size() == 4);  // sgd x 2 policies, slda x 1, lwf x 1
    std::size_t sgd_cells = 0;
    for (const auto& cfg : cells) {
        if (cfg.learner == LearnerKind::sgd) ++sgd_cells;
        else REQUIRE(cfg.policy == ReplayPolicy::none);
    }
    REQUIRE(sgd_cells == 2);
}

TEST_CASE("a grid of one matches the single run row for row") {
    const GeneratedStreams streams = generate_stream(small_spec(19));
    GridSpec spec;
    spec.learners = {LearnerKind::sgd};
    spec.policies = {ReplayPolicy::random};
    spec.regimes = {Regime::ordered_balanced};
    spec.seeds = {19};
    spec.base = small_config(LearnerKind::sgd, ReplayPolicy::random,
                             Regime::ordered_balanced, 19);

    const auto cells = run_grid(spec, [&](std::uint64_t) {
        return std::make_pair(&streams.train, &streams.test);
    });
    REQUIRE(cells.size() == 1);
    REQUIRE(cells[0].ok);

    const RunResult solo = run_experiment(streams.train, streams.test, spec.base);
    REQUIRE(cells[0].amca_trace.size() == solo.checkpoints.size());
    for (std::size_t k = 0; k < cells[0].amca_trace.size(); ++k)
        REQUIRE(cells[0].amca_trace[k] == solo.checkpoints[k].amca_full);

    const std::string csv = curves_csv(cells);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    REQUIRE(line == "checkpoint,learner,policy,regime,amca");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        REQUIRE(line.find("sgd,random,ordered-balanced") != std::string::npos);
        ++rows;
    }
    REQUIRE(rows == solo.checkpoints.size());
}

TEST_CASE("one failing cell does not sink the grid") {
    const GeneratedStreams streams = generate_stream(small_spec(23));
    GridSpec spec;
    spec.learners = {LearnerKind::sgd};
    spec.policies = {ReplayPolicy::random};
    spec.regimes = {Regime::ordered_unbalanced};
    spec.seeds = {1, 2, 3};
    spec.base = small_config(LearnerKind::sgd, ReplayPolicy::random,
                             Regime::ordered_unbalanced, 1);

    const StreamView empty;
    const auto cells = run_grid(spec, [&](std::uint64_t seed)
                                          -> std::pair<const StreamView*, const StreamView*> {
        if (seed == 2) return {&empty, &streams.test};
        return {&streams.train, &streams.test};
    });
    REQUIRE(cells.size() == 3);
    REQUIRE(cells[0].ok);
    REQUIRE_FALSE(cells[1].ok);
    REQUIRE(cells[1].error.find("empty training stream") != std::string::npos);
    REQUIRE(cells[2].ok);

    // Per-seed curve rows skip the failed cell.
    const std::string by_seed = curves_by_seed_csv(cells);
    REQUIRE(by_seed.find(",2,") == std::string::npos);
    REQUIRE(by_seed.find(",1,") != std::string::npos);
    REQUIRE(by_seed.find(",3,") != std::string::npos);
}

TEST_CASE("curves average the per-seed traces") {
    GridCell a, b;
    a.cfg = small_config(LearnerKind::sgd, ReplayPolicy::random,
                         Regime::ordered_unbalanced, 1);
    b.cfg = a.cfg;
    b.cfg.seed = 2;
    a.ok = b.ok = true;
    a.amca_trace = {0.2, 0.4};
    b.amca_trace = {0.4, 0.8};
    const std::string csv = curves_csv({a, b});
    REQUIRE(csv.find("0,sgd,random,ordered-unbalanced,0.300000000") != std::string::npos);
    REQUIRE(csv.find("1,sgd,random,ordered-unbalanced,0.600000000") != std::string::npos);
}

TEST_CASE("runs reject mismatched stream shapes") {
    const GeneratedStreams streams = generate_stream(small_spec(29));
    StreamSpec other = small_spec(29);
    other.d = 4;
    const GeneratedStreams narrow = generate_stream(other);
    const RunConfig cfg = small_config(LearnerKind::sgd, ReplayPolicy::none,
                                       Regime::ordered_unbalanced, 29);
    REQUIRE_THROWS_AS(run_experiment(streams.train, narrow.test, cfg), config_error);
}
