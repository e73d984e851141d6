// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "dicl/demo.hpp"
#include "dicl/signals.hpp"
#include "oracles.hpp"

using namespace dicl;
using namespace dicl::demo;
using oracle::Mask;

namespace {

std::set<int> to_set(Mask m) {
    std::set<int> s;
    for (int i = 0; i < 32; ++i) {
        if (m & (Mask{1} << i)) s.insert(i + 1);
    }
    return s;
}

BundleSignalType classify(const std::set<int>& pred, const std::vector<std::set<int>>& gts) {
    return classify_all(std::vector<std::set<int>>{pred}, gts).front();
}

}  // namespace

TEST_CASE("bundle signal examples") {
    CHECK(classify({1, 2}, {{1, 2}}) == BundleSignalType::kKeep);
    CHECK(classify({1}, {{1, 2, 3}}) == BundleSignalType::kExpandSingleton);
    CHECK(classify({1, 2, 9}, {{1, 2, 3}}) == BundleSignalType::kRemoveUnrelated);
    CHECK(classify({1, 2}, {{1, 2, 3}}) == BundleSignalType::kAppendRelated);
    CHECK(classify({1, 2, 3}, {{1, 2}}) == BundleSignalType::kRemoveUnrelated);
    CHECK(classify({7, 8}, {{1, 2}}) == BundleSignalType::kInvalid);
    CHECK(classify({7, 8}, {}) == BundleSignalType::kInvalid);
}

TEST_CASE("greedy matching prefers exact twins") {
    const std::vector<std::set<int>> preds{{1, 2}, {2, 3}};
    const std::vector<std::set<int>> gts{{1, 2}, {2, 3}};
    const auto m = match_bundles(preds, gts);
    CHECK(m.primary[0] == std::optional<std::size_t>(0));
    CHECK(m.primary[1] == std::optional<std::size_t>(1));
    CHECK(m.similarity[0] == Rational(1));

    const auto partial = match_bundles(std::vector<std::set<int>>{{1, 2}}, std::vector<std::set<int>>{{1, 2, 3}});
    CHECK(partial.similarity[0] == Rational(2, 3));
    const auto none = match_bundles(std::vector<std::set<int>>{{7, 8}}, std::vector<std::set<int>>{{1, 2}});
    CHECK_FALSE(none.primary[0].has_value());
    CHECK_FALSE(none.reference[0].has_value());
}

TEST_CASE("a pred that loses the one-to-one match is typed against its best overlap") {
    const std::vector<std::set<int>> preds{{1, 2}, {1, 2, 3}};
    const std::vector<std::set<int>> gts{{1, 2}};
    const auto m = match_bundles(preds, gts);
    CHECK(m.primary[0] == std::optional<std::size_t>(0));
    CHECK_FALSE(m.primary[1].has_value());
    CHECK(m.reference[1] == std::optional<std::size_t>(0));
    const auto types = classify_all(preds, gts);
    CHECK(types[0] == BundleSignalType::kKeep);
    CHECK(types[1] == BundleSignalType::kRemoveUnrelated);
}

TEST_CASE("every single-bundle configuration over six items has exactly one type") {
    const Mask universe = (Mask{1} << 6) - 1;
    std::vector<std::vector<Mask>> gt_lists{{}};
    for (Mask a = 1; a <= universe; ++a) {
        gt_lists.push_back({a});
        for (Mask b = 1; b <= universe; ++b) gt_lists.push_back({a, b});
    }
    std::size_t checked = 0;
    std::array<std::size_t, 5> seen{};
    for (Mask p = 1; p <= universe; ++p) {
        const auto pred = to_set(p);
        for (const auto& masks : gt_lists) {
            std::vector<std::set<int>> gts;
            for (Mask g : masks) gts.push_back(to_set(g));
            const unsigned bits = oracle::signal_predicates(p, masks);
            REQUIRE(std::popcount(bits) == 1);
            const int expected = std::countr_zero(bits) + 1;
            const int got = static_cast<int>(classify(pred, gts));
            if (got != expected) {
                FAIL_CHECK("pred " << p << " gts " << masks.size() << " got " << got << " expected " << expected);
            }
            ++seen[static_cast<std::size_t>(got - 1)];
            ++checked;
        }
    }
    CHECK(checked == 63u * (1 + 63 + 63 * 63));
    for (auto n : seen) CHECK(n > 0);
}

TEST_CASE("signal descriptions follow the feedback tip wording") {
    CHECK(describe(BundleSignalType::kKeep) == "correct and should be kept");
    CHECK(describe(BundleSignalType::kInvalid) == "invalid and should be removed");
    CHECK(describe(BundleSignalType::kExpandSingleton) ==
          "missing some products and should contain at least two related products");
    CHECK(describe(IntentSignalType::kMotivation) == "have a more motivational description");
}

TEST_CASE("bundle signals over session positions and their tips") {
    dataset::Session s{"s", "u", 0, {"a", "b", "c", "d", "e"}};
    dataset::GroundTruth gt{"s", {{{"a", "b", "c"}, "x"}, {{"d", "e"}, "y"}}};
    parse::BundleMap bundles;
    bundles.insert("bundle 1", {1, 2});
    bundles.insert("bundle 2", {4, 5});
    bundles.insert("bundle 3", {3, 4});
    const auto signals = compute_bundle_signals(s, bundles, gt);
    REQUIRE(signals.size() == 3);
    CHECK(signals[0] == BundleSignal{"bundle 1", BundleSignalType::kAppendRelated, 0});
    CHECK(signals[1] == BundleSignal{"bundle 2", BundleSignalType::kKeep, 1});
    CHECK(signals[2].type == BundleSignalType::kRemoveUnrelated);
    CHECK_FALSE(signals[2].matched_gt.has_value());
    CHECK(bundle_tips({signals[0], signals[1]}) ==
          "bundle 1 is Type 4 (missing some products and should append other related products), "
          "bundle 2 is Type 1 (correct and should be kept)");
    CHECK(bundle_tips({}) == "no bundle is detected, but the products contain bundles");
}

TEST_CASE("intent signals come from raters scoring below the ground truth") {
    RatingOutcome equal{{{3, 3, 2}, {3, 3, 2}}, {{3, 3, 2}, {3, 3, 2}}};
    CHECK(intent_signal_types(equal).empty());
    RatingOutcome lower{{{3, 2, 2}, {2, 3, 2}}, {{3, 3, 2}, {3, 3, 2}}};
    CHECK(intent_signal_types(lower) ==
          std::vector<IntentSignalType>{IntentSignalType::kNaturalness, IntentSignalType::kCoverage});
    RatingOutcome higher{{{3, 3, 2}}, {{1, 1, 1}}};
    CHECK(intent_signal_types(higher).empty());
    CHECK(intent_tips({{"bundle 2", {IntentSignalType::kCoverage, IntentSignalType::kMotivation}}}) ==
          "regenerate intent 2 to [Type 2 (cover more products within the bundle), "
          "Type 3 (have a more motivational description)]");
}
