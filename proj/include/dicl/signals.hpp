// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "dicl/set_ops.hpp"

namespace dicl::demo {

/// Feedback for one generated bundle, compared with the ground truth.
enum class BundleSignalType {
    kKeep = 1,             // equals its matched ground-truth bundle
    kInvalid = 2,          // shares no product with any ground-truth bundle
    kRemoveUnrelated = 3,  // holds products outside its match
    kAppendRelated = 4,    // strict subset of its match, size > 1
    kExpandSingleton = 5,  // strict subset of its match, size 1
};

/// Feedback for one generated intent, from the rater panel.
enum class IntentSignalType {
    kNaturalness = 1,
    kCoverage = 2,
    kMotivation = 3,
};

std::string_view describe(BundleSignalType type);
std::string_view describe(IntentSignalType type);

/// Result of matching predicted bundles against ground truth.
///
/// `primary` is a one-to-one partial matching built greedily: repeatedly
/// take the unmatched (pred, gt) pair with the highest Jaccard > 0, ties to
/// the lower pred position then the lower gt index. `reference` extends it:
/// a pred left unmatched while still overlapping some gt bundle refers to
/// its highest-Jaccard gt (lower index on ties), so it is typed 3, 4 or 5
/// rather than invalid.
struct Matching {
    std::vector<std::optional<std::size_t>> primary;
    std::vector<std::optional<std::size_t>> reference;
    std::vector<Rational> similarity;  // Jaccard against `reference`, 0 when none
};

template <typename T>
Matching match_bundles(const std::vector<std::set<T>>& preds, const std::vector<std::set<T>>& gts) {
    struct Candidate {
        Rational score;
        std::size_t pred;
        std::size_t gt;
    };
    std::vector<Candidate> candidates;
    for (std::size_t p = 0; p < preds.size(); ++p) {
        for (std::size_t g = 0; g < gts.size(); ++g) {
            auto j = jaccard_exact(preds[p], gts[g]);
            if (j > Rational(0)) candidates.push_back({j, p, g});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return std::tie(a.pred, a.gt) < std::tie(b.pred, b.gt);
    });

    Matching m;
    m.primary.assign(preds.size(), std::nullopt);
    m.reference.assign(preds.size(), std::nullopt);
    m.similarity.assign(preds.size(), Rational(0));
    std::vector<bool> gt_taken(gts.size(), false);
    for (const auto& c : candidates) {
        if (m.primary[c.pred] || gt_taken[c.gt]) continue;
        m.primary[c.pred] = c.gt;
        m.reference[c.pred] = c.gt;
        m.similarity[c.pred] = c.score;
        gt_taken[c.gt] = true;
    }
    // Sorted order means the first candidate seen per pred is its best one.
    for (const auto& c : candidates) {
        if (m.reference[c.pred]) continue;
        m.reference[c.pred] = c.gt;
        m.similarity[c.pred] = c.score;
    }
    return m;
}

/// Types a bundle against its reference ground-truth bundle (nullptr when
/// it overlaps none). A bundle that both misses products and carries
/// unrelated ones is typed kRemoveUnrelated.
template <typename T>
BundleSignalType classify_bundle_signal(const std::set<T>& pred, const std::set<T>* matched) {
    if (matched == nullptr || intersection_size(pred, *matched) == 0) return BundleSignalType::kInvalid;
    if (pred == *matched) return BundleSignalType::kKeep;
    if (!is_subset(pred, *matched)) return BundleSignalType::kRemoveUnrelated;
    return pred.size() > 1 ? BundleSignalType::kAppendRelated : BundleSignalType::kExpandSingleton;
}

template <typename T>
std::vector<BundleSignalType> classify_all(const std::vector<std::set<T>>& preds,
                                           const std::vector<std::set<T>>& gts) {
    const auto m = match_bundles(preds, gts);
    std::vector<BundleSignalType> out;
    out.reserve(preds.size());
    for (std::size_t p = 0; p < preds.size(); ++p) {
        out.push_back(classify_bundle_signal(preds[p], m.reference[p] ? &gts[*m.reference[p]] : nullptr));
    }
    return out;
}

}  // namespace dicl::demo
