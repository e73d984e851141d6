// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/text.hpp"

#include <fstream>
#include <sstream>

#include "dicl/error.hpp"

namespace dicl::retrieval {

namespace {

std::string normalize(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (unsigned char c : raw) {
        if (c >= 'A' && c <= 'Z') {
            out.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            out.push_back(static_cast<char>(c));
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            out.push_back(' ');
        }
    }
    return out;
}

}  // namespace

StopWords::StopWords(const std::vector<std::string>& words) {
    for (const auto& w : words) {
        auto n = normalize(w);
        if (!n.empty() && n.find(' ') == std::string::npos) words_.insert(std::move(n));
    }
}

StopWords StopWords::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open stop-word list " + path.string());
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        words.push_back(line);
    }
    return StopWords(words);
}

const StopWords& StopWords::english() {
    static const StopWords list = load(std::filesystem::path(DICL_DEFAULT_DATA_DIR) / "stopwords_en.txt");
    return list;
}

std::vector<std::string> preprocess_title(std::string_view raw_title, const StopWords& stopwords) {
    std::istringstream in(normalize(raw_title));
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) {
        if (!stopwords.contains(tok)) tokens.push_back(tok);
    }
    return tokens;
}

ItemDescription describe_item(const dataset::Item& item, const StopWords& stopwords) {
    return {item.item_id, preprocess_title(item.raw_title, stopwords)};
}

void describe_catalog(dataset::Catalog& catalog, const StopWords& stopwords) {
    for (auto& [_, item] : catalog) item.description = preprocess_title(item.raw_title, stopwords);
}

SessionDescription session_description(const dataset::Session& session, const dataset::Catalog& catalog) {
    SessionDescription d{session.session_id, {}};
    for (const auto& id : session.item_ids) {
        auto it = catalog.find(id);
        if (it == catalog.end()) {
            throw DataError("dangling item reference '" + id + "' in session '" + session.session_id + "'");
        }
        for (const auto& tok : it->second.description) {
            if (!d.text.empty()) d.text.push_back(' ');
            d.text += tok;
        }
    }
    return d;
}

}  // namespace dicl::retrieval
