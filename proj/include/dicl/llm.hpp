// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dicl/error.hpp"

namespace dicl::llm {

enum class Role { kSystem, kUser, kAssistant };

std::string_view role_name(Role role);
Role parse_role(std::string_view name);

struct Message {
    Role role = Role::kUser;
    std::string content;

    bool operator==(const Message&) const = default;
};

/// One user prompt, its step tag, and the model's reply.
struct Turn {
    std::string tag;
    std::string user;
    std::string assistant;

    bool operator==(const Turn&) const = default;
};

inline constexpr std::string_view kDefaultSystemPreamble = "You are a helpful assistant.";

/// Multi-turn chat transcript. Stored as an optional system message plus
/// completed turns, so roles always alternate user/assistant and there is
/// exactly one tag per user turn.
class Conversation {
public:
    explicit Conversation(std::string id = {},
                          std::optional<std::string> system = std::string(kDefaultSystemPreamble));

    const std::string& id() const { return id_; }
    const std::optional<std::string>& system() const { return system_; }
    const std::vector<Turn>& turns() const { return turns_; }

    void append(Turn turn) { turns_.push_back(std::move(turn)); }
    void append_all(const std::vector<Turn>& turns);

    std::size_t user_turns() const { return turns_.size(); }
    std::vector<std::string> tags() const;
    std::vector<Message> messages() const;
    std::size_t size() const { return messages().size(); }

    nlohmann::json to_json() const;
    static Conversation from_json(const nlohmann::json& j);

    bool operator==(const Conversation&) const = default;

private:
    std::string id_;
    std::optional<std::string> system_;
    std::vector<Turn> turns_;
};

/// Everything a backend sees for one completion.
struct ChatRequest {
    std::vector<Message> messages;  // full history, ending with the new user message
    std::vector<std::string> tags;  // one per user message, aligned
    std::string conversation_id;
    std::string salt;  // distinguishes deliberate repeats of an identical history

    const std::string& tag() const { return tags.back(); }
    /// User messages from the most recent task-opening turn (tag
    /// "initial_bundles" or "target_bundles") through the new message,
    /// joined by newlines. Mock content predicates match against this.
    std::string task_segment() const;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string id() const = 0;
    virtual std::string model() const = 0;
    virtual double temperature() const { return 0.0; }
    /// Throws ProviderError; transient() errors are retried by ChatClient.
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// Request fingerprint used by the response cache and the replay provider.
std::string request_key(std::string_view model, double temperature, const std::vector<Message>& messages,
                        std::string_view salt);

// ---- mock -------------------------------------------------------------------

struct MockRule {
    std::string tag;                      // exact tag, or a glob with '*'
    std::optional<std::string> contains;  // substring of ChatRequest::task_segment()
    std::string response;
    std::optional<std::size_t> times;  // rule retires after this many uses
};

/// First matching live rule wins; the fallback answers when nothing
/// matches. A request that matches nothing without a fallback is an error.
struct MockScript {
    std::vector<MockRule> rules;
    std::optional<std::string> fallback;

    static MockScript from_json(const nlohmann::json& j);
    static MockScript load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

bool glob_match(std::string_view pattern, std::string_view text);

class MockScriptMiss : public ProviderError {
public:
    explicit MockScriptMiss(const std::string& what) : ProviderError(what, false) {}
};

class MockProvider final : public ChatProvider {
public:
    explicit MockProvider(MockScript script, std::string name = "mock");

    std::string id() const override { return "mock:" + name_; }
    std::string model() const override { return name_; }
    std::string complete(const ChatRequest& request) override;

    std::size_t calls() const { return calls_.load(); }

private:
    MockScript script_;
    std::string name_;
    std::mutex mu_;
    std::vector<std::size_t> uses_;
    std::atomic<std::size_t> calls_{0};
};

// ---- replay -------------------------------------------------------------------

/// Serves responses recorded in a run log, looked up by the request history
/// of one client role ("generator", "rater1", ...).
class ReplayProvider final : public ChatProvider {
public:
    ReplayProvider(const std::filesystem::path& log_file, std::string role);

    std::string id() const override { return "replay:" + role_; }
    std::string model() const override { return model_; }
    double temperature() const override { return temperature_; }
    std::string complete(const ChatRequest& request) override;

    std::size_t size() const { return responses_.size(); }

private:
    std::string role_;
    std::string model_ = "replay";
    double temperature_ = 0.0;
    std::map<std::string, std::string> responses_;  // history hash -> response
};

/// Hash of (messages, salt) only; the replay lookup key.
std::string history_key(const std::vector<Message>& messages, std::string_view salt);

// ---- remote -------------------------------------------------------------------

struct RemoteChatConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.0;
    std::chrono::milliseconds timeout{60000};

    /// Reads <prefix>BASE_URL, <prefix>API_KEY and <prefix>MODEL, falling
    /// back to the DICL_LLM_ variables and then to the defaults above.
    static RemoteChatConfig from_env(const std::string& prefix = "DICL_LLM_");
};

/// OpenAI-style POST {base_url}/chat/completions.
class RemoteChatProvider final : public ChatProvider {
public:
    explicit RemoteChatProvider(RemoteChatConfig config);

    std::string id() const override { return "remote:" + config_.model; }
    std::string model() const override { return config_.model; }
    double temperature() const override { return config_.temperature; }
    std::string complete(const ChatRequest& request) override;

private:
    RemoteChatConfig config_;
};

// ---- client plumbing ----------------------------------------------------------

/// Token bucket shared by every client of a run. A rate of zero disables
/// limiting.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_minute = 0.0, double burst = 1.0);
    void acquire();

private:
    using Clock = std::chrono::steady_clock;
    double rate_per_sec_;
    double burst_;
    double tokens_;
    Clock::time_point last_;
    std::mutex mu_;
};

/// Response cache, optionally persisted as line-delimited {"key","response"}.
class ResponseCache {
public:
    ResponseCache() = default;
    explicit ResponseCache(std::filesystem::path file);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& response);
    std::size_t size() const;

private:
    std::optional<std::filesystem::path> file_;
    mutable std::mutex mu_;
    std::map<std::string, std::string> entries_;
};

/// Append-only run log: one JSON object per request attempt.
class RunLog {
public:
    RunLog() = default;  // discard
    explicit RunLog(std::filesystem::path file);

    void write(nlohmann::json record);
    const std::optional<std::filesystem::path>& file() const { return file_; }

    static std::vector<nlohmann::json> read(const std::filesystem::path& file);

private:
    std::optional<std::filesystem::path> file_;
    std::mutex mu_;
    std::uint64_t seq_ = 0;
};

struct ClientOptions {
    std::string role = "generator";
    int max_retries = 2;
    std::chrono::milliseconds backoff{500};
    bool use_cache = true;
};

struct ClientStats {
    std::size_t provider_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t failures = 0;
};

class ChatClient {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    ChatClient(std::shared_ptr<ChatProvider> provider, ClientOptions options,
               std::shared_ptr<ResponseCache> cache = nullptr, std::shared_ptr<RunLog> log = nullptr,
               std::shared_ptr<RateLimiter> limiter = nullptr);

    /// Sends `user_message` after the conversation's history, appends the
    /// completed turn and returns the reply. Transient provider failures are
    /// retried with exponential backoff, max_retries times.
    std::string send(Conversation& conversation, const std::string& user_message, const std::string& tag,
                     const std::string& salt = {});

    const ClientOptions& options() const { return options_; }
    const ChatProvider& provider() const { return *provider_; }
    ClientStats stats() const;

    /// Test hook replacing std::this_thread::sleep_for.
    void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

private:
    std::shared_ptr<ChatProvider> provider_;
    ClientOptions options_;
    std::shared_ptr<ResponseCache> cache_;
    std::shared_ptr<RunLog> log_;
    std::shared_ptr<RateLimiter> limiter_;
    Sleeper sleeper_;
    std::atomic<std::size_t> provider_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
    std::atomic<std::size_t> failures_{0};
};

}  // namespace dicl::llm
