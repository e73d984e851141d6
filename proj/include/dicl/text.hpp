// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dicl/dataset.hpp"

namespace dicl::retrieval {

/// Stop-word list. Entries are normalized with the same character filter as
/// titles, so "don't" is stored as "dont".
class StopWords {
public:
    StopWords() = default;
    explicit StopWords(const std::vector<std::string>& words);

    static StopWords load(const std::filesystem::path& path);
    /// The English list shipped under data/stopwords_en.txt.
    static const StopWords& english();

    bool contains(std::string_view token) const { return words_.contains(std::string(token)); }
    std::size_t size() const { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

struct ItemDescription {
    dataset::ItemId item_id;
    std::vector<std::string> tokens;
};

struct SessionDescription {
    dataset::SessionId session_id;
    std::string text;
};

/// Lowercase, drop every character outside [a-z0-9 ], split on whitespace,
/// drop stop words. Token order is preserved.
std::vector<std::string> preprocess_title(std::string_view raw_title, const StopWords& stopwords);

ItemDescription describe_item(const dataset::Item& item, const StopWords& stopwords);

/// Fills Item::description for every catalog entry.
void describe_catalog(dataset::Catalog& catalog, const StopWords& stopwords);

/// Space-joined item tokens in session order. Repeated items repeat. Reads
/// Item::description, so describe_catalog must have run first.
SessionDescription session_description(const dataset::Session& session, const dataset::Catalog& catalog);

}  // namespace dicl::retrieval
