// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "dicl/hash.hpp"
#include "dicl/human_eval.hpp"
#include "dicl/neighbor_index.hpp"
#include "dicl/parse.hpp"
#include "dicl/text.hpp"

namespace dicl::pipeline {

using nlohmann::json;

// ---- config ------------------------------------------------------------------------

json ProviderConfig::to_json() const {
    json j = {{"kind", kind}};
    if (kind == "mock") j["mock_script"] = mock_script;
    if (kind == "replay") j["replay_log"] = replay_log;
    if (kind == "remote") {
        j["env_prefix"] = env_prefix;
        j["model"] = model;
        j["temperature"] = temperature ? json(*temperature) : json(nullptr);
    }
    return j;
}

ProviderConfig ProviderConfig::from_json(const json& j) {
    ProviderConfig c;
    c.kind = j.value("kind", std::string("mock"));
    if (c.kind != "mock" && c.kind != "remote" && c.kind != "replay") {
        throw UsageError("unknown chat provider kind '" + c.kind + "'");
    }
    c.mock_script = j.value("mock_script", std::string{});
    c.replay_log = j.value("replay_log", std::string{});
    c.env_prefix = j.value("env_prefix", std::string("DICL_LLM_"));
    c.model = j.value("model", std::string{});
    if (j.contains("temperature") && !j.at("temperature").is_null()) c.temperature = j.at("temperature").get<double>();
    return c;
}

json EmbedderConfig::to_json() const {
    return {{"kind", kind}, {"base_url", base_url}, {"dim", dim}, {"fallback", fallback}};
}

EmbedderConfig EmbedderConfig::from_json(const json& j) {
    EmbedderConfig c;
    c.kind = j.value("kind", std::string("hash"));
    if (c.kind != "hash" && c.kind != "remote") throw UsageError("unknown embedder kind '" + c.kind + "'");
    c.base_url = j.value("base_url", c.base_url);
    c.dim = j.value("dim", c.dim);
    c.fallback = j.value("fallback", true);
    return c;
}

void RunConfig::validate() const {
    loops.validate();
    inference.validate();
    if (rater_repetitions < 1) throw UsageError("rater_repetitions must be >= 1");
    if (max_retries < 0) throw UsageError("max_retries must be >= 0");
    if (embedder.dim == 0) throw UsageError("embedder dim must be positive");
    for (const auto* p : {&generator, &rater1, &rater2}) {
        if (p->kind == "mock" && p->mock_script.empty()) throw UsageError("mock provider needs a mock script");
        if (p->kind == "replay" && p->replay_log.empty()) throw UsageError("replay provider needs a response log");
    }
}

json RunConfig::to_json() const {
    return {{"dataset", dataset},
            {"split", split},
            {"providers", {{"generator", generator.to_json()}, {"rater1", rater1.to_json()}, {"rater2", rater2.to_json()}}},
            {"embedder", embedder.to_json()},
            {"loops",
             {{"self_correct", loops.self_correct},
              {"bundle_feedback", loops.bundle_feedback},
              {"intent_feedback", loops.intent_feedback}}},
            {"inference", inference.to_json()},
            {"rater_repetitions", rater_repetitions},
            {"hit_counting", eval::counting_name(hit_counting)},
            {"max_retries", max_retries},
            {"requests_per_minute", requests_per_minute},
            {"seed", seed},
            {"run_dir", run_dir}};
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    try {
        c.dataset = j.value("dataset", std::string{});
        if (j.contains("split")) c.split = j.at("split").get<dataset::SplitRatios>();
        if (j.contains("providers")) {
            const auto& p = j.at("providers");
            if (p.contains("generator")) c.generator = ProviderConfig::from_json(p.at("generator"));
            if (p.contains("rater1")) c.rater1 = ProviderConfig::from_json(p.at("rater1"));
            if (p.contains("rater2")) c.rater2 = ProviderConfig::from_json(p.at("rater2"));
        }
        if (j.contains("embedder")) c.embedder = EmbedderConfig::from_json(j.at("embedder"));
        if (j.contains("loops")) {
            const auto& l = j.at("loops");
            c.loops.self_correct = l.value("self_correct", c.loops.self_correct);
            c.loops.bundle_feedback = l.value("bundle_feedback", c.loops.bundle_feedback);
            c.loops.intent_feedback = l.value("intent_feedback", c.loops.intent_feedback);
        }
        if (j.contains("inference")) c.inference = infer::InferenceMode::from_json(j.at("inference"));
        c.rater_repetitions = j.value("rater_repetitions", c.rater_repetitions);
        c.hit_counting = eval::parse_counting(j.value("hit_counting", std::string("literal")));
        c.max_retries = j.value("max_retries", c.max_retries);
        c.requests_per_minute = j.value("requests_per_minute", c.requests_per_minute);
        c.seed = j.value("seed", c.seed);
        c.run_dir = j.value("run_dir", std::string{});
    } catch (const json::exception& e) {
        throw UsageError(std::string("malformed run config: ") + e.what());
    }
    return c;
}

RunConfig RunConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw UsageError("config " + path.string() + ": " + e.what());
    }
}

// ---- files ---------------------------------------------------------------------------

std::string safe_name(const std::string& id) {
    bool clean = !id.empty() && id.front() != '.';
    std::string out;
    for (char c : id) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') {
            out += c;
        } else {
            out += '_';
            clean = false;
        }
    }
    if (clean) return out;
    return out + "-" + sha256_hex(id).substr(0, 12);
}

void write_file_atomic(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw PrerequisiteError("missing " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

namespace {

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr first;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const auto i = next.fetch_add(1);
                if (i >= n || stop.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lk(mu);
                    if (!first) first = std::current_exception();
                    stop = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

std::uint64_t session_seed(std::uint64_t seed, const std::string& id) { return seed ^ fnv1a64(id); }

}  // namespace

// ---- lock ----------------------------------------------------------------------------

RunLock::RunLock(const fs::path& dir) {
    fs::create_directories(dir);
    const auto file = dir / files::kLock;
    fd_ = ::open(file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error("cannot open " + file.string() + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw LockError("run directory " + dir.string() + " is in use by another process");
    }
}

RunLock::~RunLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

// ---- pipeline ------------------------------------------------------------------------

struct Pipeline::Clients {
    std::shared_ptr<llm::ResponseCache> cache;
    std::shared_ptr<llm::RunLog> log;
    std::shared_ptr<llm::RateLimiter> limiter;
    std::unique_ptr<llm::ChatClient> generator;
    std::unique_ptr<llm::ChatClient> rater1;
    std::unique_ptr<llm::ChatClient> rater2;
};

namespace {

std::shared_ptr<llm::ChatProvider> make_chat_provider(const ProviderConfig& c, const std::string& role) {
    if (c.kind == "mock") return std::make_shared<llm::MockProvider>(llm::MockScript::load(c.mock_script));
    if (c.kind == "replay") return std::make_shared<llm::ReplayProvider>(c.replay_log, role);
    auto rc = llm::RemoteChatConfig::from_env(c.env_prefix);
    if (!c.model.empty()) rc.model = c.model;
    if (c.temperature) rc.temperature = *c.temperature;
    if (rc.api_key.empty()) throw PrerequisiteError("no API key in " + c.env_prefix + "API_KEY for " + role);
    return std::make_shared<llm::RemoteChatProvider>(rc);
}

json config_identity(const RunConfig& c) {
    auto j = c.to_json();
    j.erase("run_dir");
    return j;
}

}  // namespace

Pipeline::Pipeline(RunConfig config, Runtime runtime) : config_(std::move(config)), runtime_(std::move(runtime)) {
    if (config_.run_dir.empty()) throw UsageError("a run directory is required");
    config_.validate();
    dir_ = config_.run_dir;
    lock_ = std::make_unique<RunLock>(dir_);
    const auto cfg = path(files::kConfig);
    if (fs::exists(cfg)) {
        const auto recorded = RunConfig::from_json(read_json(cfg));
        if (config_identity(recorded) != config_identity(config_)) {
            throw ConfigMismatchError("config differs from the one recorded in " + cfg.string());
        }
    } else {
        write_json(cfg, config_.to_json());
    }
}

Pipeline::~Pipeline() = default;

void Pipeline::note(const std::string& line) const {
    if (runtime_.progress) *runtime_.progress << line << std::endl;
}

void Pipeline::require(const char* name, const char* stage) const {
    if (!fs::exists(path(name))) {
        throw PrerequisiteError(std::string("missing ") + name + " in " + dir_.string() + "; run '" + stage +
                                "' first");
    }
}

dataset::Dataset Pipeline::load_run_dataset() const {
    require(files::kDataset, "ingest");
    return dataset::load_dataset(path(files::kDataset));
}

std::map<std::string, std::vector<std::string>> Pipeline::load_split() const {
    require(files::kSplit, "ingest");
    return read_json(path(files::kSplit)).get<std::map<std::string, std::vector<std::string>>>();
}

Pipeline::Clients& Pipeline::clients() {
    if (clients_) return *clients_;
    auto c = std::make_unique<Clients>();
    c->cache = std::make_shared<llm::ResponseCache>(path(files::kLlmCache));
    c->log = std::make_shared<llm::RunLog>(path(files::kLlmLog));
    c->limiter = std::make_shared<llm::RateLimiter>(config_.requests_per_minute);
    const auto make = [&](const std::shared_ptr<llm::ChatProvider>& injected, const ProviderConfig& pc,
                          const std::string& role) {
        auto provider = injected ? injected : make_chat_provider(pc, role);
        llm::ClientOptions opts;
        opts.role = role;
        opts.max_retries = config_.max_retries;
        auto client = std::make_unique<llm::ChatClient>(provider, opts, c->cache, c->log, c->limiter);
        if (runtime_.sleeper) client->set_sleeper(runtime_.sleeper);
        return client;
    };
    c->generator = make(runtime_.generator, config_.generator, "generator");
    c->rater1 = make(runtime_.rater1, config_.rater1, "rater1");
    c->rater2 = make(runtime_.rater2, config_.rater2, "rater2");
    clients_ = std::move(c);
    return *clients_;
}

void Pipeline::ingest() {
    if (fs::exists(path(files::kSplit))) {
        note("ingest: up to date");
        return;
    }
    if (config_.dataset.empty()) throw UsageError("no dataset configured");
    const auto ds = dataset::load_dataset(config_.dataset);
    const auto split = dataset::chronological_split(ds, config_.split);
    const auto ids = [](const std::vector<dataset::Session>& v) {
        std::vector<std::string> out;
        for (const auto& s : v) out.push_back(s.session_id);
        return out;
    };
    const auto st = dataset::compute_stats(ds);
    dataset::save_dataset(ds, path(files::kDataset));
    write_json(path(files::kStats), {{"users", st.users},
                                     {"items", st.items},
                                     {"sessions", st.sessions},
                                     {"bundles", st.bundles},
                                     {"distinct_intents", st.distinct_intents},
                                     {"interactions", st.interactions},
                                     {"average_bundle_size", st.average_bundle_size}});
    write_json(path(files::kSplit),
               {{"train", ids(split.train)}, {"validation", ids(split.validation)}, {"test", ids(split.test)}});
    note("ingest: " + std::to_string(split.train.size()) + " train, " + std::to_string(split.validation.size()) +
         " validation, " + std::to_string(split.test.size()) + " test");
}

void Pipeline::embed() {
    if (fs::exists(path(files::kEmbeddings))) {
        note("embed: up to date");
        return;
    }
    auto ds = load_run_dataset();
    load_split();
    retrieval::describe_catalog(ds.catalog, retrieval::StopWords::english());
    std::vector<retrieval::SessionDescription> descriptions;
    for (const auto& s : ds.sessions) descriptions.push_back(retrieval::session_description(s, ds.catalog));

    retrieval::HashEmbedder hash(config_.embedder.dim);
    std::shared_ptr<retrieval::EmbeddingProvider> primary = runtime_.embedder;
    if (!primary) {
        if (config_.embedder.kind == "remote") {
            retrieval::RemoteEmbedderConfig rc;
            rc.base_url = config_.embedder.base_url;
            primary = std::make_shared<retrieval::RemoteEmbedder>(rc);
        } else {
            primary = std::make_shared<retrieval::HashEmbedder>(config_.embedder.dim);
        }
    }
    retrieval::EmbeddingCache cache(path(files::kEmbeddingCache));
    retrieval::EmbedStats stats;
    const auto vectors = retrieval::embed_sessions(descriptions, *primary, cache,
                                                   config_.embedder.fallback ? &hash : nullptr, &stats);
    json sessions = json::array();
    for (const auto& e : vectors) sessions.push_back({{"session_id", e.session_id}, {"vector", e.vector}});
    write_json(path(files::kEmbeddings), {{"provider", stats.provider_id},
                                          {"used_fallback", stats.used_fallback},
                                          {"dim", vectors.empty() ? 0 : vectors.front().dim()},
                                          {"sessions", std::move(sessions)}});
    note("embed: " + std::to_string(vectors.size()) + " sessions via " + stats.provider_id + " (" +
         std::to_string(stats.cache_hits) + " cached)");
}

void Pipeline::retrieve() {
    if (fs::exists(path(files::kNeighbors))) {
        note("retrieve: up to date");
        return;
    }
    const auto ds = load_run_dataset();
    const auto split = load_split();
    require(files::kEmbeddings, "embed");
    const auto emb = read_json(path(files::kEmbeddings));
    std::map<std::string, retrieval::Vector> vectors;
    for (const auto& e : emb.at("sessions")) {
        vectors[e.at("session_id").get<std::string>()] = e.at("vector").get<retrieval::Vector>();
    }

    std::vector<retrieval::SessionEmbedding> corpus;
    for (const auto& id : split.at("train")) {
        if (ds.find_ground_truth(id)) corpus.push_back({id, vectors.at(id)});
    }
    const auto& test = split.at("test");
    const auto& mode = config_.inference;
    const bool zero_shot = mode.mode == infer::Mode::kZeroShot;
    if (!zero_shot && corpus.empty()) throw DataError("no training session with ground truth to draw demonstrations from");

    json neighbors = json::object();
    const bool ranked = mode.mode == infer::Mode::kDicl && mode.flags.use_top_neighbor;
    if (ranked) {
        retrieval::NeighborIndex index(corpus);
        std::vector<retrieval::SessionEmbedding> queries;
        for (const auto& id : test) queries.push_back({id, vectors.at(id)});
        const auto ranked_lists = index.top_k_batch(queries, mode.k);
        for (std::size_t q = 0; q < test.size(); ++q) {
            json arr = json::array();
            for (const auto& n : ranked_lists[q]) arr.push_back({{"session_id", n.session_id}, {"score", n.score}});
            neighbors[test[q]] = std::move(arr);
        }
    } else {
        for (const auto& id : test) {
            json arr = json::array();
            if (!zero_shot) {
                auto pool = corpus;
                std::mt19937_64 rng(session_seed(config_.seed, id));
                eval::seeded_shuffle(pool, rng);
                pool.resize(std::min(pool.size(), mode.k));
                for (const auto& p : pool) arr.push_back({{"session_id", p.session_id}, {"score", nullptr}});
            }
            neighbors[id] = std::move(arr);
        }
    }
    write_json(path(files::kNeighbors), {{"mode", infer::mode_name(mode.mode)},
                                         {"ranked", ranked},
                                         {"corpus", corpus.size()},
                                         {"neighbors", std::move(neighbors)}});
    note("retrieve: " + std::to_string(test.size()) + " test sessions against " + std::to_string(corpus.size()) +
         " candidates");
}

void Pipeline::demo() {
    require(files::kNeighbors, "retrieve");
    if (config_.inference.mode != infer::Mode::kDicl) {
        note("demo: not used by " + std::string(infer::mode_name(config_.inference.mode)));
        return;
    }
    const auto ds = load_run_dataset();
    const auto nb = read_json(path(files::kNeighbors));
    std::set<std::string> unique;
    for (const auto& [_, list] : nb.at("neighbors").items()) {
        for (const auto& n : list) unique.insert(n.at("session_id").get<std::string>());
    }
    std::map<std::string, const dataset::Session*> by_id;
    for (const auto& s : ds.sessions) by_id[s.session_id] = &s;

    std::vector<std::string> todo;
    for (const auto& id : unique) {
        if (!fs::exists(path(files::kDemos) / (safe_name(id) + ".json"))) todo.push_back(id);
    }
    auto& c = clients();
    demo::DemoBuilder builder(ds.catalog, *c.generator,
                              demo::RaterPanel{{c.rater1.get(), c.rater2.get()}, config_.rater_repetitions});
    parallel_for(todo.size(), runtime_.workers, [&](std::size_t i) {
        const auto& id = todo[i];
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("neighbor '" + id + "' is not in the dataset");
        const auto d = builder.build(*it->second, ds.find_ground_truth(id), config_.loops);
        write_json(path(files::kDemos) / (safe_name(id) + ".json"), d.to_json());
    });
    note("demo: " + std::to_string(todo.size()) + " built, " + std::to_string(unique.size() - todo.size()) +
         " up to date");
}

void Pipeline::infer() {
    require(files::kNeighbors, "retrieve");
    const auto ds = load_run_dataset();
    const auto split = load_split();
    const auto nb = read_json(path(files::kNeighbors)).at("neighbors");
    const auto& mode = config_.inference;
    const auto& registry = prompts::PromptRegistry::standard();

    std::map<std::string, const dataset::Session*> by_id;
    for (const auto& s : ds.sessions) by_id[s.session_id] = &s;

    std::map<std::string, std::vector<llm::Turn>> transcripts;
    for (const auto& [_, list] : nb.items()) {
        for (const auto& n : list) {
            const auto id = n.at("session_id").get<std::string>();
            if (transcripts.contains(id)) continue;
            if (mode.mode == infer::Mode::kDicl) {
                const auto file = path(files::kDemos) / (safe_name(id) + ".json");
                if (!fs::exists(file)) throw PrerequisiteError("missing demonstration for '" + id + "'; run 'demo' first");
                transcripts[id] = demo::Demonstration::from_json(read_json(file)).conversation.turns();
            } else {
                const auto* gt = ds.find_ground_truth(id);
                if (!gt) throw DataError("sampled session '" + id + "' has no ground truth");
                transcripts[id] = infer::ideal_transcript(*by_id.at(id), *gt, ds.catalog, registry);
            }
        }
    }

    const auto& test = split.at("test");
    auto& c = clients();
    std::atomic<std::size_t> ran{0};
    parallel_for(test.size(), runtime_.workers, [&](std::size_t i) {
        const auto& id = test[i];
        const auto file = path(files::kResults) / (safe_name(id) + ".json");
        if (fs::exists(file)) return;
        std::vector<std::vector<llm::Turn>> context;
        std::vector<std::string> sources;
        for (const auto& n : nb.at(id)) {
            const auto sid = n.at("session_id").get<std::string>();
            sources.push_back(sid);
            context.push_back(transcripts.at(sid));
        }
        const auto prefix = infer::assemble_context(context, mode);
        if (mode.mode == infer::Mode::kZeroShot) sources.clear();
        const auto result = infer::infer_target(*by_id.at(id), prefix, sources, ds.catalog, *c.generator, registry);
        write_json(file, result.to_json());
        ++ran;
    });

    json results = json::array();
    for (const auto& id : test) {
        results.push_back({{"session_id", id}, {"file", std::string(files::kResults) + "/" + safe_name(id) + ".json"}});
    }
    json providers = {{"generator", c.generator->provider().id()},
                      {"rater1", c.rater1->provider().id()},
                      {"rater2", c.rater2->provider().id()}};
    write_json(path(files::kManifest), {{"config", config_identity(config_)},
                                        {"split",
                                         {{"train", split.at("train").size()},
                                          {"validation", split.at("validation").size()},
                                          {"test", test.size()}}},
                                        {"providers", std::move(providers)},
                                        {"results", std::move(results)}});
    note("infer: " + std::to_string(ran.load()) + " sessions inferred, " + std::to_string(test.size() - ran.load()) +
         " up to date");
}

eval::EvalReport Pipeline::evaluate() {
    require(files::kManifest, "infer");
    const auto ds = load_run_dataset();
    const auto manifest = read_json(path(files::kManifest));
    std::vector<eval::SessionInput> inputs;
    std::size_t failed = 0;
    for (const auto& r : manifest.at("results")) {
        const auto file = path(r.at("file").get<std::string>());
        if (!fs::exists(file)) throw PrerequisiteError("missing result file " + file.string() + "; run 'infer' first");
        const auto result = infer::SessionResult::from_json(read_json(file));
        eval::SessionInput in;
        in.session_id = result.session_id;
        if (result.failed) {
            ++failed;
        } else {
            in.predictions = result.predicted_sets();
        }
        if (const auto* gt = ds.find_ground_truth(result.session_id)) {
            for (const auto& b : gt->bundles) in.ground_truth.push_back(b.items);
        }
        inputs.push_back(std::move(in));
    }
    auto report = eval::evaluate(inputs, config_.hit_counting);
    report.failed_sessions = failed;
    write_json(path(files::kEval), report.to_json());
    write_file_atomic(path(files::kEvalTable), report.table());
    note("eval: " + std::to_string(report.sessions) + " sessions scored");
    return report;
}

eval::EvalReport Pipeline::run_all() {
    ingest();
    embed();
    retrieve();
    demo();
    infer();
    return evaluate();
}

// ---- report -------------------------------------------------------------------------

std::string report(const std::vector<fs::path>& run_dirs) {
    std::ostringstream os;
    os << "run\tmode\tk\tprecision\trecall\tcoverage\tsessions\thit_bundles\n";
    for (const auto& dir : run_dirs) {
        const auto cfg = read_json(dir / files::kConfig);
        if (!fs::exists(dir / files::kEval)) throw PrerequisiteError("missing " + (dir / files::kEval).string());
        const auto ev = read_json(dir / files::kEval);
        const auto metric = [&](const char* name) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4f", ev.at(name).at("value").get<double>());
            return std::string(buf);
        };
        const auto& inf = cfg.at("inference");
        os << dir.filename().string() << '\t' << inf.at("mode").get<std::string>() << '\t'
           << inf.at("k").get<std::size_t>() << '\t' << metric("precision") << '\t' << metric("recall") << '\t'
           << metric("coverage") << '\t' << ev.at("sessions").get<std::size_t>() << '\t'
           << ev.at("hit_bundles").get<std::size_t>() << '\n';
    }
    return os.str();
}

// ---- oracle script --------------------------------------------------------------------

llm::MockScript oracle_script(const dataset::Dataset& ds) {
    struct Entry {
        std::string marker;
        std::string bundles;
        std::string intents;
    };
    std::vector<Entry> entries;
    for (const auto& s : ds.sessions) {
        std::vector<std::string> titles;
        for (const auto& id : s.item_ids) titles.push_back(ds.catalog.at(id).raw_title);
        parse::BundleMap bundles;
        parse::IntentMap intents;
        if (const auto* gt = ds.find_ground_truth(s.session_id)) {
            for (std::size_t b = 0; b < gt->bundles.size(); ++b) {
                parse::IndexSet positions;
                for (std::size_t p = 0; p < s.item_ids.size(); ++p) {
                    if (gt->bundles[b].items.contains(s.item_ids[p])) positions.insert(p + 1);
                }
                bundles.insert("bundle " + std::to_string(b + 1), std::move(positions));
                intents.insert("bundle " + std::to_string(b + 1), gt->bundles[b].intent);
            }
        }
        entries.push_back({"\n" + prompts::product_lines(titles) + "\n", parse::format_bundles(bundles),
                           parse::format_intents(intents)});
    }
    // Longest product list first.
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.marker.size() > b.marker.size(); });

    llm::MockScript script;
    for (const auto& e : entries) {
        for (const char* tag : {"*_bundles", "*bundle_feedback_round_*"}) {
            script.rules.push_back({tag, e.marker, e.bundles, std::nullopt});
        }
        for (const char* tag : {"*_intents", "*intent_feedback_round_*"}) {
            script.rules.push_back({tag, e.marker, e.intents, std::nullopt});
        }
    }
    script.rules.push_back({"*rules", std::nullopt,
                            "1. A bundle groups products bought together for one purpose.\n"
                            "2. Complementary products and close alternatives belong together.",
                            std::nullopt});
    script.rules.push_back(
        {"*rate_intent", std::nullopt,
         "{'intent 1': ['Naturalness':3, 'Coverage':3, 'Motivation':2], "
         "'intent 2': ['Naturalness':3, 'Coverage':3, 'Motivation':2]}",
         std::nullopt});
    return script;
}

}  // namespace dicl::pipeline
