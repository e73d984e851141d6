// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "dicl/llm.hpp"
#include "http_util.hpp"

namespace dicl::llm {

using nlohmann::json;

namespace {

std::string env_or(const std::string& name, const std::string& fallback_name, const std::string& dflt) {
    if (const char* v = std::getenv(name.c_str()); v && *v) return v;
    if (const char* v = std::getenv(fallback_name.c_str()); v && *v) return v;
    return dflt;
}

}  // namespace

RemoteChatConfig RemoteChatConfig::from_env(const std::string& prefix) {
    RemoteChatConfig c;
    c.base_url = env_or(prefix + "BASE_URL", "DICL_LLM_BASE_URL", c.base_url);
    c.api_key = env_or(prefix + "API_KEY", "DICL_LLM_API_KEY", c.api_key);
    c.model = env_or(prefix + "MODEL", "DICL_LLM_MODEL", c.model);
    return c;
}

RemoteChatProvider::RemoteChatProvider(RemoteChatConfig config) : config_(std::move(config)) {}

std::string RemoteChatProvider::complete(const ChatRequest& request) {
    const auto url = detail::split_url(config_.base_url);
    httplib::Client client(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    json messages = json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    const json body{{"model", config_.model}, {"temperature", config_.temperature}, {"messages", std::move(messages)}};

    auto res = client.Post(url.path_prefix + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
        throw ProviderError("chat endpoint " + config_.base_url + " unreachable: " + httplib::to_string(res.error()),
                            true);
    }
    if (res->status != 200) {
        throw ProviderError("chat endpoint returned HTTP " + std::to_string(res->status) + ": " +
                                res->body.substr(0, 500),
                            detail::is_transient_status(res->status));
    }
    try {
        const auto reply = json::parse(res->body);
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw ProviderError("chat reply content is not a string", false);
        return content.get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed chat reply: ") + e.what(), false);
    }
}

}  // namespace dicl::llm
