// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dicl/dataset.hpp"
#include "dicl/error.hpp"
#include "dicl/human_eval.hpp"
#include "dicl/pipeline.hpp"

namespace fs = std::filesystem;
using namespace dicl;

namespace {

struct RunFlags {
    std::string config;
    std::string run_dir;
    std::size_t workers = 1;
    std::optional<std::string> dataset;
    std::optional<std::string> mode;
    std::optional<std::size_t> k;
    std::optional<int> ts, tb, ti;
    std::optional<int> repetitions;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> provider;
    std::optional<std::string> mock_script;
    std::optional<std::string> replay_log;
    std::optional<std::string> embedder;
    std::optional<std::string> embed_url;
    std::optional<std::string> hit_counting;
    bool no_self_correct = false;
    bool no_feedback = false;
    bool no_rules = false;
    bool no_demo_intents = false;
    bool random_neighbor = false;
    bool quiet = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config, "Run config file (JSON)");
    cmd->add_option("--run-dir", f.run_dir, "Run directory")->required();
    cmd->add_option("--workers", f.workers, "Concurrent sessions")->check(CLI::PositiveNumber);
    cmd->add_option("--dataset", f.dataset, "Dataset file (line-delimited JSON)");
    cmd->add_option("--mode", f.mode, "dicl, few-shot or zero-shot")
        ->check(CLI::IsMember({"dicl", "few-shot", "few_shot_random", "zero-shot", "zero_shot"}));
    cmd->add_option("--k", f.k, "Neighbors per target session")->check(CLI::PositiveNumber);
    cmd->add_option("--ts", f.ts, "Self-correction rounds")->check(CLI::NonNegativeNumber);
    cmd->add_option("--tb", f.tb, "Bundle feedback rounds")->check(CLI::NonNegativeNumber);
    cmd->add_option("--ti", f.ti, "Intent feedback rounds")->check(CLI::NonNegativeNumber);
    cmd->add_option("--repetitions", f.repetitions, "Rating repetitions per rater")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "Sampling seed");
    cmd->add_option("--provider", f.provider, "Chat provider for all roles")
        ->check(CLI::IsMember({"mock", "remote", "replay"}));
    cmd->add_option("--mock-script", f.mock_script, "Mock provider script");
    cmd->add_option("--replay-log", f.replay_log, "Response log to replay");
    cmd->add_option("--embedder", f.embedder, "hash or remote")->check(CLI::IsMember({"hash", "remote"}));
    cmd->add_option("--embed-url", f.embed_url, "Embedding service base URL");
    cmd->add_option("--hit-counting", f.hit_counting, "literal or unique-gt")
        ->check(CLI::IsMember({"literal", "unique-gt"}));
    cmd->add_flag("--no-self-correct", f.no_self_correct, "Drop self-correction turns from demonstrations");
    cmd->add_flag("--no-feedback", f.no_feedback, "Drop auto-feedback turns from demonstrations");
    cmd->add_flag("--no-rules", f.no_rules, "Drop the rules turn from demonstrations");
    cmd->add_flag("--no-demo-intents", f.no_demo_intents, "Drop intent turns from demonstrations");
    cmd->add_flag("--random-neighbor", f.random_neighbor, "Sample demonstration sessions instead of ranking");
    cmd->add_flag("-q,--quiet", f.quiet, "No progress output");
}

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

pipeline::RunConfig resolve_config(const RunFlags& f) {
    pipeline::RunConfig c;
    if (!f.config.empty()) {
        c = pipeline::RunConfig::load(f.config);
    } else if (fs::exists(fs::path(f.run_dir) / pipeline::files::kConfig)) {
        c = pipeline::RunConfig::load(fs::path(f.run_dir) / pipeline::files::kConfig);
    }
    c.run_dir = f.run_dir;
    if (f.dataset) c.dataset = absolute(*f.dataset);
    if (f.mode) c.inference.mode = infer::parse_mode(*f.mode);
    if (f.k) c.inference.k = *f.k;
    if (f.ts) c.loops.self_correct = *f.ts;
    if (f.tb) c.loops.bundle_feedback = *f.tb;
    if (f.ti) c.loops.intent_feedback = *f.ti;
    if (f.repetitions) c.rater_repetitions = *f.repetitions;
    if (f.seed) c.seed = *f.seed;
    for (auto* p : {&c.generator, &c.rater1, &c.rater2}) {
        if (f.provider) p->kind = *f.provider;
        if (f.mock_script) p->mock_script = absolute(*f.mock_script);
        if (f.replay_log) p->replay_log = absolute(*f.replay_log);
    }
    if (f.embedder) c.embedder.kind = *f.embedder;
    if (f.embed_url) c.embedder.base_url = *f.embed_url;
    if (f.hit_counting) c.hit_counting = eval::parse_counting(*f.hit_counting);
    if (f.no_self_correct) c.inference.flags.use_self_correct = false;
    if (f.no_feedback) c.inference.flags.use_auto_feedback = false;
    if (f.no_rules) c.inference.flags.use_rules = false;
    if (f.no_demo_intents) c.inference.flags.use_intents_in_demo = false;
    if (f.random_neighbor) c.inference.flags.use_top_neighbor = false;
    return c;
}

pipeline::Pipeline open_pipeline(const RunFlags& f) {
    pipeline::Runtime rt;
    rt.workers = f.workers;
    rt.progress = f.quiet ? nullptr : &std::cerr;
    return pipeline::Pipeline(resolve_config(f), rt);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bundle generation and intent inference with dynamic in-context learning"};
    app.require_subcommand(1);

    RunFlags f;
    std::vector<std::pair<std::string, CLI::App*>> stages;
    for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"ingest", "Load and split the dataset"},
             {"embed", "Embed session descriptions"},
             {"retrieve", "Find neighbor sessions for the test split"},
             {"demo", "Build demonstrations for retrieved neighbors"},
             {"infer", "Run inference on the test split"},
             {"eval", "Score the inference results"},
             {"run", "Run every stage in order"}}) {
        auto* cmd = app.add_subcommand(name, help);
        add_run_flags(cmd, f);
        stages.emplace_back(name, cmd);
    }

    std::vector<std::string> report_dirs;
    std::string report_out;
    auto* report_cmd = app.add_subcommand("report", "Metric table over run directories");
    report_cmd->add_option("run_dirs", report_dirs, "Run directories")->required();
    report_cmd->add_option("--out", report_out, "Also write the table here");

    std::string oracle_dataset, oracle_out;
    auto* oracle_cmd = app.add_subcommand("oracle-script", "Mock script answering with the ground truth");
    oracle_cmd->add_option("--dataset", oracle_dataset, "Dataset file")->required();
    oracle_cmd->add_option("--out", oracle_out, "Output script path")->required();

    std::vector<std::string> he_dirs;
    std::size_t he_n = 20, he_raters = 1;
    std::uint64_t he_seed = 42;
    std::string he_out;
    auto* he_cmd = app.add_subcommand("export-human-eval", "Blinded intent samples for human raters");
    he_cmd->add_option("run_dirs", he_dirs, "Run directories, one per domain")->required();
    he_cmd->add_option("--n", he_n, "Samples per domain")->check(CLI::PositiveNumber);
    he_cmd->add_option("--raters", he_raters, "Rater files to write")->check(CLI::PositiveNumber);
    he_cmd->add_option("--seed", he_seed, "Sampling seed");
    he_cmd->add_option("--out", he_out, "Output directory")->required();

    std::string stats_dataset;
    auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics");
    stats_cmd->add_option("--dataset", stats_dataset, "Dataset file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
    }

    try {
        for (const auto& [name, cmd] : stages) {
            if (!cmd->parsed()) continue;
            auto p = open_pipeline(f);
            if (name == "ingest") p.ingest();
            if (name == "embed") p.embed();
            if (name == "retrieve") p.retrieve();
            if (name == "demo") p.demo();
            if (name == "infer") p.infer();
            if (name == "eval") std::cout << p.evaluate().table();
            if (name == "run") std::cout << p.run_all().table();
            return 0;
        }
        if (report_cmd->parsed()) {
            std::vector<fs::path> dirs(report_dirs.begin(), report_dirs.end());
            const auto table = pipeline::report(dirs);
            std::cout << table;
            if (!report_out.empty()) pipeline::write_file_atomic(report_out, table);
        } else if (oracle_cmd->parsed()) {
            const auto ds = dataset::load_dataset(oracle_dataset);
            pipeline::write_file_atomic(oracle_out, pipeline::oracle_script(ds).to_json().dump(2) + "\n");
        } else if (he_cmd->parsed()) {
            std::vector<dataset::Dataset> datasets;
            datasets.reserve(he_dirs.size());
            std::vector<eval::HumanEvalDomain> domains;
            for (const auto& d : he_dirs) datasets.push_back(dataset::load_dataset(fs::path(d) / pipeline::files::kDataset));
            for (std::size_t i = 0; i < he_dirs.size(); ++i) {
                const fs::path dir(he_dirs[i]);
                eval::HumanEvalDomain dom;
                dom.name = dir.filename().string();
                dom.catalog = &datasets[i].catalog;
                dom.ground_truth = &datasets[i].ground_truth;
                const auto manifest = pipeline::read_json(dir / pipeline::files::kManifest);
                for (const auto& r : manifest.at("results")) {
                    dom.results.push_back(infer::SessionResult::from_json(
                        pipeline::read_json(dir / r.at("file").get<std::string>())));
                }
                domains.push_back(std::move(dom));
            }
            const auto samples = eval::sample_human_eval(domains, he_n, he_seed);
            for (const auto& p : eval::write_human_eval(samples, he_raters, he_seed, he_out)) {
                std::cout << p.string() << "\n";
            }
        } else if (stats_cmd->parsed()) {
            const auto st = dataset::compute_stats(dataset::load_dataset(stats_dataset));
            std::cout << "users " << st.users << "\nitems " << st.items << "\nsessions " << st.sessions
                      << "\nbundles " << st.bundles << "\ndistinct_intents " << st.distinct_intents
                      << "\ninteractions " << st.interactions << "\naverage_bundle_size " << st.average_bundle_size
                      << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::kInternal);
    }
    return 0;
}
