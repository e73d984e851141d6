// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dicl/dataset.hpp"
#include "dicl/rational.hpp"

namespace dicl::eval {

using dataset::ItemSet;

/// How hits enter the precision and recall numerators.
enum class HitCounting {
    kLiteral,            // every hitting prediction counts; recall capped at 1
    kUniqueGroundTruth,  // distinct matched ground-truth bundles
};

std::string_view counting_name(HitCounting counting);
HitCounting parse_counting(std::string_view name);

struct HitResult {
    bool hit = false;
    std::optional<std::size_t> matched;
};

/// Hit when |pred| >= 2 and pred is a subset of some ground-truth bundle.
/// The match is the superset with the highest Jaccard, then the smaller
/// bundle, then the earlier one.
HitResult is_hit(const ItemSet& pred, const std::vector<ItemSet>& gts);

/// |pred| / |matched|. Throws UsageError unless pred is a non-empty subset.
Rational bundle_coverage(const ItemSet& pred, const ItemSet& matched);

struct SessionInput {
    dataset::SessionId session_id;
    std::vector<ItemSet> predictions;
    std::vector<ItemSet> ground_truth;
};

struct BundleHit {
    std::size_t prediction = 0;
    std::size_t ground_truth = 0;
    Rational coverage;
};

struct SessionMetrics {
    dataset::SessionId session_id;
    std::size_t predicted = 0;
    std::size_t ground_truth = 0;
    std::size_t hits = 0;             // hitting predictions
    std::size_t distinct_matched = 0;  // ground-truth bundles matched at least once
    Rational precision;
    std::optional<Rational> recall;  // empty when the session has no ground truth
    std::vector<BundleHit> hit_bundles;
};

SessionMetrics session_metrics(const SessionInput& input, HitCounting counting = HitCounting::kLiteral);

struct EvalReport {
    HitCounting counting = HitCounting::kLiteral;
    Rational precision;
    Rational recall;
    Rational coverage;  // 0 when there are no hits
    std::size_t sessions = 0;
    std::size_t recall_sessions = 0;
    std::size_t hit_bundles = 0;
    std::size_t failed_sessions = 0;
    std::vector<SessionMetrics> per_session;

    nlohmann::json to_json() const;
    std::string table() const;
};

/// Per-session metrics run as an OpenMP loop; the averages are reduced in
/// input order and match reference::evaluate exactly.
EvalReport evaluate(const std::vector<SessionInput>& sessions, HitCounting counting = HitCounting::kLiteral);

namespace reference {
EvalReport evaluate(const std::vector<SessionInput>& sessions, HitCounting counting = HitCounting::kLiteral);
}  // namespace reference

}  // namespace dicl::eval
