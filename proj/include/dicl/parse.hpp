// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dicl/error.hpp"

namespace dicl::parse {

/// 1-based positions of products within one session.
using IndexSet = std::set<std::size_t>;

/// Labelled values in answer order. Labels are unique.
template <typename V>
class LabelledMap {
public:
    using Entry = std::pair<std::string, V>;

    bool insert(std::string label, V value) {
        if (find(label)) return false;
        entries_.emplace_back(std::move(label), std::move(value));
        return true;
    }
    const V* find(std::string_view label) const {
        for (const auto& [l, v] : entries_) {
            if (l == label) return &v;
        }
        return nullptr;
    }
    void insert_or_assign(std::string label, V value) {
        for (auto& [l, v] : entries_) {
            if (l == label) {
                v = std::move(value);
                return;
            }
        }
        entries_.emplace_back(std::move(label), std::move(value));
    }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }
    const Entry& operator[](std::size_t i) const { return entries_[i]; }

    bool operator==(const LabelledMap&) const = default;

private:
    std::vector<Entry> entries_;
};

/// label -> product positions. Distinct labels hold distinct sets.
using BundleMap = LabelledMap<IndexSet>;
/// label -> intent text.
using IntentMap = LabelledMap<std::string>;

struct RatingTriple {
    double naturalness = 0;  // 1..3
    double coverage = 0;     // 1..3
    double motivation = 0;   // 1..2

    bool operator==(const RatingTriple&) const = default;
};
using RatingMap = LabelledMap<RatingTriple>;

struct BundleParse {
    BundleMap bundles;
    std::vector<std::string> warnings;
};

/// "bundle 3", "Bundle 3", "3", "#3" -> "bundle 3" (prefix configurable);
/// anything else is returned trimmed.
std::string canonical_label(std::string_view raw, std::string_view prefix);

/// Accepts the answer format {'bundle number':['product number']} with
/// either quote style, optional whitespace, bare numbers, and string values
/// listing several products. Out-of-range indices, empty bundles, repeated
/// labels and repeated sets are dropped with a warning. Throws ParseError
/// when no dictionary can be read.
BundleParse parse_bundle_answer(std::string_view text, std::size_t session_length);

/// {'bundle number':'intent'}. Throws ParseError on empty intents.
IntentMap parse_intent_answer(std::string_view text);

/// {'intent number': ['Naturalness':n, 'Coverage':c, 'Motivation':m]}.
/// Labels become "intent N". Throws ParseError on a missing metric or an
/// out-of-scale score.
RatingMap parse_rating_answer(std::string_view text);

std::string format_bundles(const BundleMap& bundles);
std::string format_intents(const IntentMap& intents);
std::string format_ratings(const RatingMap& ratings);

/// Set-of-sets comparison that ignores labels and order.
bool same_bundles(const BundleMap& a, const BundleMap& b);

}  // namespace dicl::parse
