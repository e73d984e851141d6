// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dicl/dataset.hpp"
#include "dicl/demo.hpp"
#include "dicl/embedding.hpp"
#include "dicl/eval.hpp"
#include "dicl/infer.hpp"
#include "dicl/llm.hpp"
#include "dicl/prompts.hpp"

namespace dicl::pipeline {

namespace fs = std::filesystem;

struct ProviderConfig {
    std::string kind = "mock";  // mock | remote | replay
    std::string mock_script;
    std::string replay_log;
    std::string env_prefix = "DICL_LLM_";
    std::string model;  // remote only; empty keeps the environment's choice
    std::optional<double> temperature;

    nlohmann::json to_json() const;
    static ProviderConfig from_json(const nlohmann::json& j);
    bool operator==(const ProviderConfig&) const = default;
};

struct EmbedderConfig {
    std::string kind = "hash";  // hash | remote
    std::string base_url = "http://127.0.0.1:8080";
    std::size_t dim = retrieval::HashEmbedder::kDefaultDim;
    bool fallback = true;  // remote failures fall back to the hash embedder

    nlohmann::json to_json() const;
    static EmbedderConfig from_json(const nlohmann::json& j);
    bool operator==(const EmbedderConfig&) const = default;
};

struct RunConfig {
    std::string dataset;
    dataset::SplitRatios split = dataset::kDefaultSplitRatios;
    ProviderConfig generator;
    ProviderConfig rater1;
    ProviderConfig rater2;
    EmbedderConfig embedder;
    demo::LoopConfig loops;
    infer::InferenceMode inference;
    int rater_repetitions = 3;
    eval::HitCounting hit_counting = eval::HitCounting::kLiteral;
    int max_retries = 2;
    double requests_per_minute = 0.0;
    std::uint64_t seed = 42;
    std::string run_dir;

    void validate() const;
    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const fs::path& path);
};

/// Process-level settings that do not affect results.
struct Runtime {
    std::size_t workers = 1;
    std::ostream* progress = nullptr;
    /// When set, used instead of the providers named in the config.
    std::shared_ptr<llm::ChatProvider> generator;
    std::shared_ptr<llm::ChatProvider> rater1;
    std::shared_ptr<llm::ChatProvider> rater2;
    std::shared_ptr<retrieval::EmbeddingProvider> embedder;
    llm::ChatClient::Sleeper sleeper;
};

/// File names inside a run directory.
namespace files {
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kLock = "run.lock";
inline constexpr const char* kDataset = "dataset.jsonl";
inline constexpr const char* kSplit = "split.json";
inline constexpr const char* kStats = "stats.json";
inline constexpr const char* kEmbeddingCache = "embeddings.bin";
inline constexpr const char* kEmbeddings = "embed.json";
inline constexpr const char* kNeighbors = "neighbors.json";
inline constexpr const char* kDemos = "demos";
inline constexpr const char* kResults = "results";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kEval = "eval.json";
inline constexpr const char* kEvalTable = "eval.txt";
inline constexpr const char* kLlmLog = "llm_log.jsonl";
inline constexpr const char* kLlmCache = "llm_cache.jsonl";
}  // namespace files

/// File-system-safe name for a session id; ids that need escaping get a
/// short digest suffix. Distinct ids never share a name.
std::string safe_name(const std::string& id);

/// Writes `text` to `path` through a temporary file and a rename.
void write_file_atomic(const fs::path& path, const std::string& text);
nlohmann::json read_json(const fs::path& path);

/// Exclusive advisory lock on <dir>/run.lock for the object's lifetime.
class RunLock {
public:
    explicit RunLock(const fs::path& dir);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    int fd_ = -1;
};

/// One run directory. The constructor takes the lock and records the config,
/// or checks it against the recorded one.
class Pipeline {
public:
    Pipeline(RunConfig config, Runtime runtime = {});
    ~Pipeline();

    void ingest();
    void embed();
    void retrieve();
    void demo();
    void infer();
    eval::EvalReport evaluate();
    eval::EvalReport run_all();

    const RunConfig& config() const { return config_; }
    const fs::path& dir() const { return dir_; }
    fs::path path(const std::string& name) const { return dir_ / name; }

private:
    struct Clients;

    dataset::Dataset load_run_dataset() const;
    std::map<std::string, std::vector<std::string>> load_split() const;
    Clients& clients();
    void require(const char* name, const char* stage) const;
    void note(const std::string& line) const;

    RunConfig config_;
    Runtime runtime_;
    fs::path dir_;
    std::unique_ptr<RunLock> lock_;
    std::unique_ptr<Clients> clients_;
};

/// Consolidated metric table over several run directories.
std::string report(const std::vector<fs::path>& run_dirs);

/// Mock script answering every bundle prompt with the session's ground truth
/// and every intent prompt with its ground-truth intents. Raters score the
/// two intents equally.
llm::MockScript oracle_script(const dataset::Dataset& ds);

}  // namespace dicl::pipeline
