// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/llm.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <thread>

#include "dicl/hash.hpp"

namespace dicl::llm {

using nlohmann::json;

std::string_view role_name(Role role) {
    switch (role) {
        case Role::kSystem: return "system";
        case Role::kUser: return "user";
        case Role::kAssistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view name) {
    if (name == "system") return Role::kSystem;
    if (name == "user") return Role::kUser;
    if (name == "assistant") return Role::kAssistant;
    throw DataError("unknown chat role '" + std::string(name) + "'");
}

// ---- Conversation ---------------------------------------------------------------

Conversation::Conversation(std::string id, std::optional<std::string> system)
    : id_(std::move(id)), system_(std::move(system)) {}

void Conversation::append_all(const std::vector<Turn>& turns) {
    turns_.insert(turns_.end(), turns.begin(), turns.end());
}

std::vector<std::string> Conversation::tags() const {
    std::vector<std::string> out;
    out.reserve(turns_.size());
    for (const auto& t : turns_) out.push_back(t.tag);
    return out;
}

std::vector<Message> Conversation::messages() const {
    std::vector<Message> out;
    out.reserve(turns_.size() * 2 + 1);
    if (system_) out.push_back({Role::kSystem, *system_});
    for (const auto& t : turns_) {
        out.push_back({Role::kUser, t.user});
        out.push_back({Role::kAssistant, t.assistant});
    }
    return out;
}

json Conversation::to_json() const {
    json turns = json::array();
    for (const auto& t : turns_) turns.push_back({{"tag", t.tag}, {"user", t.user}, {"assistant", t.assistant}});
    return {{"id", id_}, {"system", system_ ? json(*system_) : json(nullptr)}, {"turns", std::move(turns)}};
}

Conversation Conversation::from_json(const json& j) {
    std::optional<std::string> system;
    if (j.contains("system") && j["system"].is_string()) system = j["system"].get<std::string>();
    Conversation c(j.value("id", std::string{}), std::move(system));
    for (const auto& t : j.at("turns")) {
        c.append({t.at("tag").get<std::string>(), t.at("user").get<std::string>(),
                  t.at("assistant").get<std::string>()});
    }
    return c;
}

std::string ChatRequest::task_segment() const {
    std::vector<const std::string*> users;
    for (const auto& m : messages) {
        if (m.role == Role::kUser) users.push_back(&m.content);
    }
    std::size_t start = 0;
    for (std::size_t i = 0; i < users.size() && i < tags.size(); ++i) {
        if (tags[i] == "initial_bundles" || tags[i] == "target_bundles") start = i;
    }
    std::string out;
    for (std::size_t i = start; i < users.size(); ++i) {
        if (!out.empty()) out.push_back('\n');
        out += *users[i];
    }
    return out;
}

namespace {

json messages_json(const std::vector<Message>& messages) {
    json arr = json::array();
    for (const auto& m : messages) arr.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    return arr;
}

}  // namespace

std::string request_key(std::string_view model, double temperature, const std::vector<Message>& messages,
                        std::string_view salt) {
    const json j{{"model", model}, {"temperature", temperature}, {"messages", messages_json(messages)},
                 {"salt", salt}};
    return sha256_hex(j.dump());
}

std::string history_key(const std::vector<Message>& messages, std::string_view salt) {
    const json j{{"messages", messages_json(messages)}, {"salt", salt}};
    return sha256_hex(j.dump());
}

// ---- Mock ---------------------------------------------------------------------

bool glob_match(std::string_view pattern, std::string_view text) {
    // Iterative '*' matcher with single-star backtracking.
    std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (p < pattern.size() && pattern[p] == text[t]) {
            ++p;
            ++t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

MockScript MockScript::from_json(const json& j) {
    MockScript s;
    if (!j.is_object()) throw DataError("mock script must be a JSON object");
    if (j.contains("rules")) {
        for (const auto& r : j.at("rules")) {
            MockRule rule;
            rule.tag = r.value("tag", std::string("*"));
            if (r.contains("contains") && !r["contains"].is_null()) rule.contains = r["contains"].get<std::string>();
            if (!r.contains("response") || !r["response"].is_string()) {
                throw DataError("mock rule for tag '" + rule.tag + "' lacks a string 'response'");
            }
            rule.response = r["response"].get<std::string>();
            if (r.contains("times") && !r["times"].is_null()) rule.times = r["times"].get<std::size_t>();
            s.rules.push_back(std::move(rule));
        }
    }
    if (j.contains("fallback") && j["fallback"].is_string()) s.fallback = j["fallback"].get<std::string>();
    return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open mock script " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw DataError("invalid mock script " + path.string() + ": " + e.what());
    }
}

json MockScript::to_json() const {
    json arr = json::array();
    for (const auto& r : rules) {
        json jr{{"tag", r.tag}, {"response", r.response}};
        if (r.contains) jr["contains"] = *r.contains;
        if (r.times) jr["times"] = *r.times;
        arr.push_back(std::move(jr));
    }
    json out{{"rules", std::move(arr)}};
    if (fallback) out["fallback"] = *fallback;
    return out;
}

MockProvider::MockProvider(MockScript script, std::string name)
    : script_(std::move(script)), name_(std::move(name)), uses_(script_.rules.size(), 0) {}

std::string MockProvider::complete(const ChatRequest& request) {
    ++calls_;
    const auto& tag = request.tag();
    std::string segment;
    bool have_segment = false;
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < script_.rules.size(); ++i) {
        const auto& rule = script_.rules[i];
        if (rule.times && uses_[i] >= *rule.times) continue;
        if (!glob_match(rule.tag, tag)) continue;
        if (rule.contains) {
            if (!have_segment) {
                segment = request.task_segment();
                have_segment = true;
            }
            if (segment.find(*rule.contains) == std::string::npos) continue;
        }
        ++uses_[i];
        return rule.response;
    }
    if (script_.fallback) return *script_.fallback;
    throw MockScriptMiss("mock script '" + name_ + "' has no rule for step '" + tag + "'");
}

// ---- Replay -------------------------------------------------------------------

ReplayProvider::ReplayProvider(const std::filesystem::path& log_file, std::string role) : role_(std::move(role)) {
    for (const auto& rec : RunLog::read(log_file)) {
        if (rec.value("role", std::string{}) != role_) continue;
        const auto status = rec.value("status", std::string{});
        if (status != "ok" && status != "cached") continue;
        model_ = rec.value("model", model_);
        temperature_ = rec.value("temperature", temperature_);
        responses_.insert_or_assign(rec.at("history").get<std::string>(), rec.at("response").get<std::string>());
    }
}

std::string ReplayProvider::complete(const ChatRequest& request) {
    auto it = responses_.find(history_key(request.messages, request.salt));
    if (it == responses_.end()) {
        throw ProviderError("replay log has no response for step '" + request.tag() + "' of conversation '" +
                                request.conversation_id + "'",
                            false);
    }
    return it->second;
}

// ---- RateLimiter ----------------------------------------------------------------

RateLimiter::RateLimiter(double requests_per_minute, double burst)
    : rate_per_sec_(requests_per_minute / 60.0), burst_(std::max(1.0, burst)), tokens_(burst_),
      last_(Clock::now()) {}

void RateLimiter::acquire() {
    if (rate_per_sec_ <= 0.0) return;
    std::unique_lock lock(mu_);
    for (;;) {
        const auto now = Clock::now();
        tokens_ = std::min(burst_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_per_sec_);
        last_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_per_sec_);
        std::this_thread::sleep_for(wait);
    }
}

// ---- ResponseCache --------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path file) : file_(std::move(file)) {
    if (!std::filesystem::exists(*file_)) return;
    std::ifstream in(*file_);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            auto j = json::parse(line);
            entries_.insert_or_assign(j.at("key").get<std::string>(), j.at("response").get<std::string>());
        } catch (const json::exception&) {
            // torn trailing line from an interrupted run
        }
    }
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::put(const std::string& key, const std::string& response) {
    std::lock_guard lock(mu_);
    if (!entries_.emplace(key, response).second) return;
    if (file_) {
        std::ofstream out(*file_, std::ios::app);
        out << json{{"key", key}, {"response", response}}.dump() << '\n';
    }
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

// ---- RunLog -------------------------------------------------------------------

RunLog::RunLog(std::filesystem::path file) : file_(std::move(file)) {
    std::ifstream in(*file_);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ++seq_;
    }
}

void RunLog::write(json record) {
    if (!file_) return;
    const auto now = std::chrono::system_clock::now();
    record["time"] = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
    std::lock_guard lock(mu_);
    record["seq"] = seq_++;
    std::ofstream out(*file_, std::ios::app);
    out << record.dump() << '\n';
}

std::vector<json> RunLog::read(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read run log " + file.string());
    std::vector<json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw DataError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

// ---- ChatClient -----------------------------------------------------------------

ChatClient::ChatClient(std::shared_ptr<ChatProvider> provider, ClientOptions options,
                       std::shared_ptr<ResponseCache> cache, std::shared_ptr<RunLog> log,
                       std::shared_ptr<RateLimiter> limiter)
    : provider_(std::move(provider)), options_(std::move(options)), cache_(std::move(cache)),
      log_(std::move(log)), limiter_(std::move(limiter)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    if (!provider_) throw UsageError("chat client needs a provider");
    if (options_.max_retries < 0) throw UsageError("max_retries must be >= 0");
}

ClientStats ChatClient::stats() const {
    return {provider_calls_.load(), cache_hits_.load(), failures_.load()};
}

std::string ChatClient::send(Conversation& conversation, const std::string& user_message, const std::string& tag,
                             const std::string& salt) {
    ChatRequest req;
    req.messages = conversation.messages();
    req.messages.push_back({Role::kUser, user_message});
    req.tags = conversation.tags();
    req.tags.push_back(tag);
    req.conversation_id = conversation.id();
    req.salt = salt;

    const auto key = request_key(provider_->model(), provider_->temperature(), req.messages, salt);
    json base{{"role", options_.role},
              {"conversation", conversation.id()},
              {"tag", tag},
              {"provider", provider_->id()},
              {"model", provider_->model()},
              {"temperature", provider_->temperature()},
              {"salt", salt},
              {"key", key},
              {"history", history_key(req.messages, salt)},
              {"request_chars", user_message.size()}};

    const auto finish = [&](std::string reply, json record) {
        record["response"] = reply;
        record["response_chars"] = reply.size();
        if (log_) log_->write(std::move(record));
        conversation.append({tag, user_message, reply});
        return reply;
    };

    if (options_.use_cache && cache_) {
        if (auto hit = cache_->get(key)) {
            ++cache_hits_;
            json rec = base;
            rec["status"] = "cached";
            rec["attempt"] = 0;
            rec["request"] = messages_json(req.messages);
            return finish(std::move(*hit), std::move(rec));
        }
    }

    std::string last_error;
    const int attempts = options_.max_retries + 1;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (limiter_) limiter_->acquire();
        ++provider_calls_;
        try {
            auto reply = provider_->complete(req);
            if (options_.use_cache && cache_) cache_->put(key, reply);
            json rec = base;
            rec["status"] = "ok";
            rec["attempt"] = attempt;
            rec["request"] = messages_json(req.messages);
            return finish(std::move(reply), std::move(rec));
        } catch (const ProviderError& e) {
            ++failures_;
            last_error = e.what();
            if (log_) {
                json rec = base;
                rec["status"] = "error";
                rec["attempt"] = attempt;
                rec["error"] = last_error;
                log_->write(std::move(rec));
            }
            if (!e.transient()) throw;
            if (attempt < attempts) sleeper_(options_.backoff * (1LL << (attempt - 1)));
        }
    }
    throw ProviderError(options_.role + " request for step '" + tag + "' failed after " + std::to_string(attempts) +
                            " attempts: " + last_error,
                        true);
}

}  // namespace dicl::llm
