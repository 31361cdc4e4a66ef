#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nds/nds.hpp"

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw nds::io_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw nds::format_error("'" + path + "': " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw nds::io_error("cannot write '" + path + "'");
}

// Config file is the base layer, an explicitly passed flag wins. Values the
// parser already wrote stay put; everything else falls back to the file.
template <typename T>
void fill_from_config(const CLI::App& sub, const std::string& flag, const json& cfg,
                      const std::string& key, T& slot) {
    if (sub.count("--" + flag) > 0) return;
    if (!cfg.contains(key)) return;
    try {
        slot = cfg.at(key).get<T>();
    } catch (const json::exception& e) {
        throw nds::config_error("config key '" + key + "': " + e.what());
    }
}

struct HyperFlags {
    nds::TrainHyper h;

    void attach(CLI::App* sub) {
        sub->add_option("--lr", h.lr, "learning rate");
        sub->add_option("--replay_k", h.replay_k, "replay samples drawn per experience");
        sub->add_option("--replay_with_replacement", h.replay_with_replacement,
                        "draw replay samples with replacement");
        sub->add_option("--lwf_lambda", h.lwf_lambda, "distillation weight");
        sub->add_option("--lwf_temperature", h.lwf_temperature, "distillation temperature");
        sub->add_option("--teacher_refresh", h.teacher_refresh,
                        "experiences between teacher snapshots");
        sub->add_option("--exstream_passes", h.exstream_passes,
                        "prototype training passes per experience");
        sub->add_option("--exstream_buffer", h.exstream_buffer,
                        "prototype buffer capacity per class");
        sub->add_option("--gss_samples", h.gss_samples,
                        "memory samples compared per gradient-similarity offer");
        sub->add_option("--hidden_width", h.hidden_width,
                        "hidden layer width, 0 for a linear head");
        sub->add_option("--slda_epsilon", h.slda_epsilon, "covariance shrinkage");
        sub->add_option("--slda_plastic", h.slda_plastic,
                        "keep updating the covariance after the base fit");
        sub->add_option("--slda_base_experiences", h.slda_base_experiences,
                        "experiences buffered for the base fit, 0 streams from scratch");
    }

    void fill(const CLI::App& sub, const json& cfg) {
        fill_from_config(sub, "lr", cfg, "lr", h.lr);
        fill_from_config(sub, "replay_k", cfg, "replay_k", h.replay_k);
        fill_from_config(sub, "replay_with_replacement", cfg, "replay_with_replacement",
                         h.replay_with_replacement);
        fill_from_config(sub, "lwf_lambda", cfg, "lwf_lambda", h.lwf_lambda);
        fill_from_config(sub, "lwf_temperature", cfg, "lwf_temperature", h.lwf_temperature);
        fill_from_config(sub, "teacher_refresh", cfg, "teacher_refresh", h.teacher_refresh);
        fill_from_config(sub, "exstream_passes", cfg, "exstream_passes", h.exstream_passes);
        fill_from_config(sub, "exstream_buffer", cfg, "exstream_buffer", h.exstream_buffer);
        fill_from_config(sub, "gss_samples", cfg, "gss_samples", h.gss_samples);
        fill_from_config(sub, "hidden_width", cfg, "hidden_width", h.hidden_width);
        fill_from_config(sub, "slda_epsilon", cfg, "slda_epsilon", h.slda_epsilon);
        fill_from_config(sub, "slda_plastic", cfg, "slda_plastic", h.slda_plastic);
        fill_from_config(sub, "slda_base_experiences", cfg, "slda_base_experiences",
                         h.slda_base_experiences);
    }
};

bool looks_like_manifest(const std::string& source) {
    if (source.size() > 5 && source.substr(source.size() - 5) == ".json") return true;
    return std::filesystem::exists(source);
}

// A preset source regenerates per seed; a manifest pair is fixed on disk.
void resolve_streams(const std::string& source, const std::string& test_source,
                     std::uint64_t seed, nds::StreamView& train, nds::StreamView& test) {
    if (source.empty()) throw nds::config_error("a stream source is required");
    if (looks_like_manifest(source)) {
        train = nds::load_stream(source);
        std::string test_path = test_source;
        if (test_path.empty()) {
            test_path = source;
            const auto pos = test_path.rfind("_train");
            if (pos == std::string::npos)
                throw nds::config_error(
                    "cannot derive a test manifest from '" + source +
                    "'; pass test_source explicitly");
            test_path.replace(pos, 6, "_test");
        }
        test = nds::load_stream(test_path);
        return;
    }
    nds::StreamSpec spec = nds::preset_profile(source);
    spec.seed = seed;
    nds::GeneratedStreams g = nds::generate_stream(spec);
    train = std::move(g.train);
    test = std::move(g.test);
}

std::string report_csv_text(const std::vector<nds::CheckpointRecord>& checkpoints) {
    std::vector<nds::EvalReport> reports;
    reports.reserve(checkpoints.size());
    for (const auto& ck : checkpoints) reports.push_back(ck.report);
    std::ostringstream os;
    nds::write_report_csv(os, reports);
    return os.str();
}

std::string joined_log(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& line : lines) {
        out += line;
        out += '\n';
    }
    return out;
}

json run_summary_json(const nds::RunConfig& cfg, const nds::RunResult& res) {
    json trace = json::array();
    for (const auto& ck : res.checkpoints) trace.push_back(ck.amca_full);
    return json{{"learner", nds::learner_kind_name(cfg.learner)},
                {"policy", nds::policy_name(cfg.policy)},
                {"regime", nds::regime_name(cfg.regime)},
                {"seed", cfg.seed},
                {"experience_size", cfg.experience_size},
                {"memory_capacity", cfg.memory_capacity},
                {"checkpoints", res.checkpoints.size()},
                {"final_amca", res.final_amca},
                {"amca_trace", trace}};
}

void write_run_outputs(const std::string& dir, const nds::RunConfig& cfg,
                       const nds::RunResult& res) {
    const std::filesystem::path base(dir);
    write_text_file((base / "report.csv").string(), report_csv_text(res.checkpoints));
    write_text_file((base / "run_log.jsonl").string(), joined_log(res.log_lines));
    write_text_file((base / "summary.json").string(),
                    run_summary_json(cfg, res).dump(2) + "\n");
}

// ---------------------------------------------------------------- gen

struct GenArgs {
    std::string preset;
    std::string spec_path;
    std::string out;
    std::string basename = "stream";
    std::string regime = "ordered-unbalanced";
    std::uint64_t seed = 0;
};

int cmd_gen(const CLI::App& sub, GenArgs& a) {
    if (a.preset.empty() == a.spec_path.empty())
        throw nds::config_error("gen: pass exactly one of --preset or --spec");
    nds::StreamSpec spec;
    if (!a.preset.empty()) {
        spec = nds::preset_profile(a.preset);
        if (sub.count("--seed") == 0)
            throw nds::config_error("gen: --seed is required with --preset");
    } else {
        const json body = read_json_file(a.spec_path);
        body.get_to(spec);
        if (sub.count("--seed") == 0 && !body.contains("seed"))
            throw nds::config_error("gen: the spec file has no seed; pass --seed");
    }
    if (sub.count("--seed") > 0) spec.seed = a.seed;

    nds::GeneratedStreams g = nds::generate_stream(spec);
    g.train = nds::prepare_regime(g.train, nds::parse_regime(a.regime), spec.seed);
    nds::write_stream_bundle(g.train, a.out, a.basename + "_train", "train", spec);
    nds::write_stream_bundle(g.test, a.out, a.basename + "_test", "test", spec);
    std::printf("wrote %s/%s_train.{nds,json} (%zu samples) and %s/%s_test.{nds,json} (%zu samples)\n",
                a.out.c_str(), a.basename.c_str(), g.train.size(), a.out.c_str(),
                a.basename.c_str(), g.test.size());
    return 0;
}

// ---------------------------------------------------------------- run

struct RunArgs {
    std::string config_path;
    std::string source;
    std::string test_source;
    std::string out;
    std::string regime = "ordered-unbalanced";
    std::string learner = "sgd";
    std::string policy = "none";
    std::size_t experience_size = 10;
    std::size_t memory_capacity = 1000;
    std::uint64_t seed = 0;
    std::string save_state;
    std::string init_state;
    HyperFlags hyper;
};

void fill_run_args(const CLI::App& sub, RunArgs& a) {
    json cfg = json::object();
    if (!a.config_path.empty()) cfg = read_json_file(a.config_path);
    fill_from_config(sub, "source", cfg, "source", a.source);
    fill_from_config(sub, "test_source", cfg, "test_source", a.test_source);
    fill_from_config(sub, "out", cfg, "out", a.out);
    fill_from_config(sub, "regime", cfg, "regime", a.regime);
    fill_from_config(sub, "learner", cfg, "learner", a.learner);
    fill_from_config(sub, "policy", cfg, "policy", a.policy);
    fill_from_config(sub, "experience_size", cfg, "experience_size", a.experience_size);
    fill_from_config(sub, "memory_capacity", cfg, "memory_capacity", a.memory_capacity);
    fill_from_config(sub, "save_state", cfg, "save_state", a.save_state);
    fill_from_config(sub, "init_state", cfg, "init_state", a.init_state);
    a.hyper.fill(sub, cfg);
    if (sub.count("--seed") == 0) {
        if (!cfg.contains("seed"))
            throw nds::config_error("run: a seed is required (flag or config key)");
        a.seed = cfg.at("seed").get<std::uint64_t>();
    }
}

int cmd_run(const CLI::App& sub, RunArgs& a) {
    fill_run_args(sub, a);

    nds::RunConfig cfg;
    cfg.regime = nds::parse_regime(a.regime);
    cfg.learner = nds::parse_learner_kind(a.learner);
    cfg.policy = nds::parse_policy(a.policy);
    cfg.experience_size = a.experience_size;
    cfg.memory_capacity = a.memory_capacity;
    cfg.seed = a.seed;
    cfg.hyper = a.hyper.h;

    nds::StreamView train, test;
    resolve_streams(a.source, a.test_source, a.seed, train, test);

    std::optional<nds::LearnerSnapshot> init;
    if (!a.init_state.empty()) init = nds::load_snapshot(a.init_state);

    const nds::RunResult res =
        nds::run_experiment(train, test, cfg, init ? &*init : nullptr);

    if (!a.out.empty()) write_run_outputs(a.out, cfg, res);
    if (!a.save_state.empty())
        nds::save_snapshot(res.learner, a.save_state, &res.memory);

    std::printf("final AMCA %.6f over %zu checkpoints\n", res.final_amca,
                res.checkpoints.size());
    return 0;
}

// ---------------------------------------------------------------- grid

struct GridArgs {
    std::string config_path;
    std::string source;
    std::string test_source;
    std::string out;
    std::vector<std::string> learners;
    std::vector<std::string> policies;
    std::vector<std::string> regimes;
    std::vector<std::uint64_t> seeds;
    std::size_t experience_size = 10;
    std::size_t memory_capacity = 1000;
    HyperFlags hyper;
};

int cmd_grid(const CLI::App& sub, GridArgs& a) {
    json cfg = json::object();
    if (!a.config_path.empty()) cfg = read_json_file(a.config_path);
    fill_from_config(sub, "source", cfg, "source", a.source);
    fill_from_config(sub, "test_source", cfg, "test_source", a.test_source);
    fill_from_config(sub, "out", cfg, "out", a.out);
    fill_from_config(sub, "learners", cfg, "learners", a.learners);
    fill_from_config(sub, "policies", cfg, "policies", a.policies);
    fill_from_config(sub, "regimes", cfg, "regimes", a.regimes);
    fill_from_config(sub, "seeds", cfg, "seeds", a.seeds);
    fill_from_config(sub, "experience_size", cfg, "experience_size", a.experience_size);
    fill_from_config(sub, "memory_capacity", cfg, "memory_capacity", a.memory_capacity);
    a.hyper.fill(sub, cfg);
    if (a.out.empty()) throw nds::config_error("grid: an output directory is required");

    nds::GridSpec spec;
    for (const auto& l : a.learners) spec.learners.push_back(nds::parse_learner_kind(l));
    for (const auto& p : a.policies) spec.policies.push_back(nds::parse_policy(p));
    for (const auto& r : a.regimes) spec.regimes.push_back(nds::parse_regime(r));
    spec.seeds = a.seeds;
    spec.base.experience_size = a.experience_size;
    spec.base.memory_capacity = a.memory_capacity;
    spec.base.hyper = a.hyper.h;

    // Manifest sources are fixed files shared by every seed; preset sources
    // regenerate per seed so seeds vary the data as well as the run.
    std::map<std::uint64_t, std::pair<nds::StreamView, nds::StreamView>> cache;
    const auto streams_for_seed =
        [&](std::uint64_t seed) -> std::pair<const nds::StreamView*, const nds::StreamView*> {
        auto it = cache.find(seed);
        if (it == cache.end()) {
            std::pair<nds::StreamView, nds::StreamView> entry;
            resolve_streams(a.source, a.test_source, seed, entry.first, entry.second);
            it = cache.emplace(seed, std::move(entry)).first;
        }
        return {&it->second.first, &it->second.second};
    };

    const std::filesystem::path base(a.out);
    const auto cells = nds::run_grid(
        spec, streams_for_seed, [&](const nds::GridCell& cell, const nds::RunResult& res) {
            write_run_outputs((base / "cells" / cell.name).string(), cell.cfg, res);
        });

    write_text_file((base / "curves.csv").string(), nds::curves_csv(cells));
    write_text_file((base / "curves_by_seed.csv").string(), nds::curves_by_seed_csv(cells));

    json summary = json::array();
    std::size_t failed = 0;
    for (const auto& cell : cells) {
        json row{{"name", cell.name}, {"ok", cell.ok}};
        if (cell.ok) {
            row["final_amca"] = cell.final_amca;
        } else {
            row["error"] = cell.error;
            ++failed;
        }
        summary.push_back(std::move(row));
    }
    write_text_file((base / "grid_summary.json").string(), summary.dump(2) + "\n");

    for (const auto& cell : cells) {
        if (cell.ok)
            std::printf("%-48s AMCA %.6f\n", cell.name.c_str(), cell.final_amca);
        else
            std::printf("%-48s FAILED: %s\n", cell.name.c_str(), cell.error.c_str());
    }
    std::printf("%zu/%zu cells ok, outputs in %s\n", cells.size() - failed, cells.size(),
                a.out.c_str());
    return failed == 0 ? 0 : 4;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string log_path;
    std::string out;
};

int cmd_eval(const CLI::App&, EvalArgs& a) {
    std::ifstream in(a.log_path);
    if (!in) throw nds::io_error("cannot open '" + a.log_path + "'");

    std::ostringstream table;
    table << "checkpoint,train_macro,samples_seen,amca,amca_recomputed\n";
    char buf[64];

    std::size_t checkpoints = 0;
    double last_amca = 0;
    bool saw_final = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw nds::format_error("'" + a.log_path + "' line " +
                                    std::to_string(line_no) + ": " + e.what());
        }
        const std::string type = j.value("type", "");
        if (type == "checkpoint") {
            const auto corr = j.at("corr").get<std::vector<std::vector<std::uint64_t>>>();
            const auto tot = j.at("tot").get<std::vector<std::vector<std::uint64_t>>>();
            if (corr.size() != tot.size())
                throw nds::corruption_error("'" + a.log_path + "' line " +
                                            std::to_string(line_no) +
                                            ": count matrices disagree in shape");
            double sum = 0;
            std::size_t cells = 0;
            for (std::size_t c = 0; c < corr.size(); ++c) {
                if (corr[c].size() != tot[c].size())
                    throw nds::corruption_error("'" + a.log_path + "' line " +
                                                std::to_string(line_no) +
                                                ": count matrices disagree in shape");
                for (std::size_t e = 0; e < corr[c].size(); ++e) {
                    if (corr[c][e] > tot[c][e])
                        throw nds::corruption_error(
                            "'" + a.log_path + "' line " + std::to_string(line_no) +
                            ": more correct than total in a cell");
                    if (tot[c][e] == 0) continue;
                    sum += double(corr[c][e]) / double(tot[c][e]);
                    ++cells;
                }
            }
            if (cells == 0)
                throw nds::corruption_error("'" + a.log_path + "' line " +
                                            std::to_string(line_no) +
                                            ": checkpoint with no populated cells");
            const double recomputed = sum / static_cast<double>(cells);
            const double logged = j.at("amca").get<double>();
            if (std::abs(recomputed - logged) > 1e-12)
                throw nds::corruption_error(
                    "'" + a.log_path + "' line " + std::to_string(line_no) +
                    ": logged AMCA disagrees with the recorded counts");
            std::snprintf(buf, sizeof buf, "%.9f,%.9f", logged, recomputed);
            table << j.at("index").get<std::size_t>() << ','
                  << j.at("train_macro").get<std::size_t>() << ','
                  << j.at("samples_seen").get<std::uint64_t>() << ',' << buf << '\n';
            last_amca = logged;
            ++checkpoints;
        } else if (type == "final") {
            saw_final = true;
            if (checkpoints == 0 ||
                std::abs(j.at("amca").get<double>() - last_amca) > 1e-12 ||
                j.at("checkpoints").get<std::size_t>() != checkpoints)
                throw nds::corruption_error("'" + a.log_path +
                                            "': final record disagrees with checkpoints");
        }
    }
    if (checkpoints == 0)
        throw nds::corruption_error("'" + a.log_path + "': no checkpoint records");
    if (!saw_final)
        throw nds::corruption_error("'" + a.log_path + "': missing final record");

    if (!a.out.empty()) write_text_file(a.out, table.str());
    std::fputs(table.str().c_str(), stdout);
    std::printf("log verified: %zu checkpoints, final AMCA %.6f\n", checkpoints, last_amca);
    return 0;
}

// ---------------------------------------------------------------- diag

struct DiagArgs {
    std::string manifest;
    std::size_t max_lag = 40;
    std::size_t window = 0;
    double spearman_threshold = 0.5;
    double gini_threshold = 0.2;
    std::string out;
};

int cmd_diag(const CLI::App&, DiagArgs& a) {
    const nds::StreamView stream = nds::load_stream(a.manifest);

    std::size_t window = a.window;
    if (window == 0) {
        if (!stream.macro_plan.empty())
            window = stream.macro_plan.front().end - stream.macro_plan.front().start;
        else
            window = std::max<std::size_t>(1, stream.size() / 10);
    }

    const auto profile = nds::temporal_similarity_profile(stream, a.max_lag);
    const auto windows = nds::imbalance_profile(stream, window);

    std::vector<double> lags, dists;
    for (const auto& [lag, dist] : profile) {
        lags.push_back(static_cast<double>(lag));
        dists.push_back(dist);
    }
    double rho = 0;
    try {
        rho = nds::spearman(lags, dists);
    } catch (const nds::numeric_error&) {
        rho = 0;  // perfectly flat profile: no temporal structure at all
    }
    double mean_gini = 0;
    for (const auto& w : windows) mean_gini += w.gini;
    mean_gini /= static_cast<double>(windows.size());

    // A non-positive threshold disables that axis.
    const bool temporal_ok = a.spearman_threshold <= 0 || rho > a.spearman_threshold;
    const bool imbalance_ok = a.gini_threshold <= 0 || mean_gini > a.gini_threshold;
    const bool natural = temporal_ok && imbalance_ok;

    char buf[96];
    std::ostringstream sim_csv;
    sim_csv << "lag,mean_distance\n";
    for (const auto& [lag, dist] : profile) {
        std::snprintf(buf, sizeof buf, "%zu,%.9f", lag, dist);
        sim_csv << buf << '\n';
    }
    std::ostringstream imb_csv;
    imb_csv << "start,end,gini";
    for (std::uint32_t c = 0; c < stream.n_classes; ++c) imb_csv << ",freq_" << c;
    imb_csv << '\n';
    for (const auto& w : windows) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.9f", w.start, w.end, w.gini);
        imb_csv << buf;
        for (double f : w.freq) {
            std::snprintf(buf, sizeof buf, ",%.9f", f);
            imb_csv << buf;
        }
        imb_csv << '\n';
    }

    if (!a.out.empty()) {
        const std::filesystem::path base(a.out);
        write_text_file((base / "similarity.csv").string(), sim_csv.str());
        write_text_file((base / "imbalance.csv").string(), imb_csv.str());
        json verdict{{"spearman", rho},
                     {"mean_gini", mean_gini},
                     {"spearman_threshold", a.spearman_threshold},
                     {"gini_threshold", a.gini_threshold},
                     {"temporal_ok", temporal_ok},
                     {"imbalance_ok", imbalance_ok},
                     {"verdict", natural ? "natural" : "not natural"}};
        write_text_file((base / "diag.json").string(), verdict.dump(2) + "\n");
    }

    std::fputs(sim_csv.str().c_str(), stdout);
    std::fputs(imb_csv.str().c_str(), stdout);
    std::printf("temporal similarity: Spearman %.4f over %zu lags (threshold %.2f) %s\n",
                rho, profile.size(), a.spearman_threshold, temporal_ok ? "ok" : "flat");
    std::printf("imbalance: mean Gini %.4f over %zu windows of %zu (threshold %.2f) %s\n",
                mean_gini, windows.size(), window, a.gini_threshold,
                imbalance_ok ? "ok" : "balanced");
    std::printf("verdict: %s\n", natural ? "natural" : "not natural");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nds: synthetic natural-data-stream benchmark tool"};
    app.require_subcommand(1);

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "generate a stream bundle");
    gen->add_option("--preset", gen_args.preset, "preset profile name");
    gen->add_option("--spec", gen_args.spec_path, "stream spec JSON file");
    gen->add_option("--seed", gen_args.seed, "generator seed");
    gen->add_option("--out", gen_args.out, "output directory")->required();
    gen->add_option("--basename", gen_args.basename, "bundle file prefix");
    gen->add_option("--regime", gen_args.regime,
                    "treatment applied to the train stream before writing");

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run one experiment");
    run->add_option("--config", run_args.config_path, "experiment config JSON");
    run->add_option("--source", run_args.source, "preset name or train manifest path");
    run->add_option("--test_source", run_args.test_source, "test manifest path");
    run->add_option("--out", run_args.out, "output directory");
    run->add_option("--regime", run_args.regime, "training-order treatment");
    run->add_option("--learner", run_args.learner, "learner kind");
    run->add_option("--policy", run_args.policy, "replay memory policy");
    run->add_option("--experience_size", run_args.experience_size, "samples per update");
    run->add_option("--memory_capacity", run_args.memory_capacity, "replay memory slots");
    run->add_option("--seed", run_args.seed, "run seed");
    run->add_option("--save_state", run_args.save_state, "write a learner snapshot here");
    run->add_option("--init_state", run_args.init_state, "start from a learner snapshot");
    run_args.hyper.attach(run);

    GridArgs grid_args;
    CLI::App* grid = app.add_subcommand("grid", "run a learner/policy/regime grid");
    grid->add_option("--config", grid_args.config_path, "grid config JSON");
    grid->add_option("--source", grid_args.source, "preset name or train manifest path");
    grid->add_option("--test_source", grid_args.test_source, "test manifest path");
    grid->add_option("--out", grid_args.out, "output directory");
    grid->add_option("--learners", grid_args.learners, "learner kinds")->delimiter(',');
    grid->add_option("--policies", grid_args.policies, "replay policies")->delimiter(',');
    grid->add_option("--regimes", grid_args.regimes, "training-order treatments")
        ->delimiter(',');
    grid->add_option("--seeds", grid_args.seeds, "run seeds")->delimiter(',');
    grid->add_option("--experience_size", grid_args.experience_size, "samples per update");
    grid->add_option("--memory_capacity", grid_args.memory_capacity, "replay memory slots");
    grid_args.hyper.attach(grid);

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "verify a run log offline");
    eval->add_option("--log", eval_args.log_path, "run_log.jsonl path")->required();
    eval->add_option("--out", eval_args.out, "write the recomputed table here");

    DiagArgs diag_args;
    CLI::App* diag = app.add_subcommand("diag", "check a stream for natural structure");
    diag->add_option("--manifest", diag_args.manifest, "stream manifest path")->required();
    diag->add_option("--max_lag", diag_args.max_lag, "largest lag to profile");
    diag->add_option("--window", diag_args.window,
                     "imbalance window, 0 uses the macro-experience size");
    diag->add_option("--spearman_threshold", diag_args.spearman_threshold,
                     "temporal axis threshold, <= 0 disables");
    diag->add_option("--gini_threshold", diag_args.gini_threshold,
                     "imbalance axis threshold, <= 0 disables");
    diag->add_option("--out", diag_args.out, "directory for the diagnostic tables");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_gen(*gen, gen_args);
        if (run->parsed()) return cmd_run(*run, run_args);
        if (grid->parsed()) return cmd_grid(*grid, grid_args);
        if (eval->parsed()) return cmd_eval(*eval, eval_args);
        if (diag->parsed()) return cmd_diag(*diag, diag_args);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    } catch (const nds::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const nds::numeric_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const nds::io_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
