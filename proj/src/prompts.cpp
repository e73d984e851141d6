// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/prompts.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dicl::prompts {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string id, std::string_view file_text) {
    constexpr std::string_view kKey = "placeholders:";
    const auto nl = file_text.find('\n');
    const auto header = file_text.substr(0, nl);
    if (header.substr(0, kKey.size()) != kKey) {
        throw PromptError("template '" + id + "' must start with a 'placeholders:' line");
    }
    PromptTemplate t;
    t.id = std::move(id);
    std::stringstream names{std::string(header.substr(kKey.size()))};
    std::string name;
    while (std::getline(names, name, ',')) {
        if (auto n = trim(name); !n.empty()) t.placeholders.push_back(std::move(n));
    }
    t.body = nl == std::string_view::npos ? std::string{} : std::string(file_text.substr(nl + 1));
    if (!t.body.empty() && t.body.back() == '\n') t.body.pop_back();
    for (const auto& p : t.placeholders) {
        if (t.body.find("{" + p + "}") == std::string::npos) {
            throw PromptError("template '" + t.id + "' declares '" + p + "' but never uses it");
        }
    }
    return t;
}

PromptRegistry PromptRegistry::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw PromptError("prompt directory not found: " + dir.string());
    PromptRegistry reg;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        auto id = entry.path().stem().string();
        reg.templates_.emplace(id, PromptTemplate::parse(id, buf.str()));
    }
    return reg;
}

const PromptRegistry& PromptRegistry::standard() {
    static const PromptRegistry reg = [] {
        if (const char* dir = std::getenv("DICL_PROMPT_DIR"); dir && *dir) return load(dir);
        return load(DICL_DEFAULT_PROMPT_DIR);
    }();
    return reg;
}

bool PromptRegistry::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

const PromptTemplate& PromptRegistry::get(std::string_view id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw PromptError("unknown prompt template '" + std::string(id) + "'");
    return it->second;
}

std::vector<std::string> PromptRegistry::template_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

std::string PromptRegistry::render(std::string_view id, const Bindings& bindings) const {
    const auto& t = get(id);
    std::map<std::string_view, const std::string*> values;
    for (const auto& name : t.placeholders) {
        auto it = bindings.find(name);
        if (it == bindings.end()) throw PromptError("template '" + t.id + "' needs a binding for '" + name + "'");
        if (it->second.empty()) throw PromptError("template '" + t.id + "' got an empty value for '" + name + "'");
        values.emplace(name, &it->second);
    }
    // Single left-to-right pass; inserted values are never rescanned.
    std::string out;
    out.reserve(t.body.size());
    std::size_t pos = 0;
    while (pos < t.body.size()) {
        const auto open = t.body.find('{', pos);
        if (open == std::string::npos) break;
        const auto close = t.body.find('}', open + 1);
        const auto it = close == std::string::npos
                            ? values.end()
                            : values.find(std::string_view(t.body).substr(open + 1, close - open - 1));
        if (it == values.end()) {
            out.append(t.body, pos, open + 1 - pos);
            pos = open + 1;
            continue;
        }
        out.append(t.body, pos, open - pos);
        out += *it->second;
        pos = close + 1;
    }
    out.append(t.body, pos);
    return out;
}

std::string product_lines(const std::vector<std::string>& titles) {
    if (titles.empty()) throw PromptError("product list is empty");
    std::string out;
    for (std::size_t i = 0; i < titles.size(); ++i) {
        if (i) out.push_back('\n');
        out += "product " + std::to_string(i + 1) + ": " + titles[i];
    }
    return out;
}

std::string intent_lines(const std::vector<std::string>& intents) {
    if (intents.empty()) throw PromptError("intent list is empty");
    std::string out;
    for (std::size_t i = 0; i < intents.size(); ++i) {
        if (i) out.push_back('\n');
        out += "intent " + std::to_string(i + 1) + ": " + intents[i];
    }
    return out;
}

}  // namespace dicl::prompts
