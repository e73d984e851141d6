// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dicl/dataset.hpp"
#include "dicl/llm.hpp"
#include "dicl/parse.hpp"
#include "dicl/prompts.hpp"
#include "dicl/signals.hpp"

namespace dicl::demo {

/// Round budgets: self-correction, bundle feedback, intent feedback.
struct LoopConfig {
    int self_correct = 1;
    int bundle_feedback = 4;
    int intent_feedback = 1;

    void validate() const;
    bool operator==(const LoopConfig&) const = default;
};

/// Step tags used in conversations and the run log.
namespace tags {
inline constexpr std::string_view kInitialBundles = "initial_bundles";
inline constexpr std::string_view kInitialIntents = "initial_intents";
inline constexpr std::string_view kSelfCorrectBundles = "self_correct_bundles";
inline constexpr std::string_view kSelfCorrectIntents = "self_correct_intents";
inline constexpr std::string_view kBundleFeedbackPrefix = "bundle_feedback_round_";
inline constexpr std::string_view kReinferIntents = "reinfer_intents";
inline constexpr std::string_view kIntentFeedbackPrefix = "intent_feedback_round_";
inline constexpr std::string_view kRules = "rules";
inline constexpr std::string_view kRateIntent = "rate_intent";
inline constexpr std::string_view kTargetBundles = "target_bundles";
inline constexpr std::string_view kTargetIntents = "target_intents";
inline constexpr std::string_view kFormatReminderPrefix = "format_reminder:";

/// Strips a format-reminder prefix: "format_reminder:rules" -> "rules".
std::string_view base_tag(std::string_view tag);
}  // namespace tags

struct BundleSignal {
    std::string label;
    BundleSignalType type = BundleSignalType::kInvalid;
    std::optional<std::size_t> matched_gt;

    bool operator==(const BundleSignal&) const = default;
};

struct IntentSignal {
    std::string label;
    std::vector<IntentSignalType> types;  // ascending, no repeats

    bool operator==(const IntentSignal&) const = default;
};

struct RoundCounts {
    int self_correct = 0;
    int bundle_feedback = 0;
    int intent_feedback = 0;

    bool operator==(const RoundCounts&) const = default;
};

struct Demonstration {
    dataset::SessionId neighbor_session;
    llm::Conversation conversation;
    parse::BundleMap bundles;
    parse::IntentMap intents;
    std::string rules;
    RoundCounts rounds;
    std::vector<BundleSignal> final_bundle_signals;
    std::vector<IntentSignal> unresolved_intent_signals;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
    static Demonstration from_json(const nlohmann::json& j);
};

/// Two rater clients, each queried `repetitions` times per rating.
struct RaterPanel {
    std::vector<llm::ChatClient*> raters;
    int repetitions = 3;
};

/// Per-rater averaged scores for the generated intent and the ground truth.
struct RatingOutcome {
    std::vector<parse::RatingTriple> candidate;
    std::vector<parse::RatingTriple> ground_truth;
};

/// Metrics where some rater scored the candidate strictly below the ground
/// truth, deduplicated and ascending.
std::vector<IntentSignalType> intent_signal_types(const RatingOutcome& outcome);

/// Working state while a demonstration is built.
struct DemoState {
    const dataset::Session* session = nullptr;
    llm::Conversation conversation;
    parse::BundleMap bundles;
    parse::IntentMap intents;
    std::vector<std::string> warnings;
};

/// Bundle positions resolved to item ids of the session.
dataset::ItemSet resolve_items(const dataset::Session& session, const parse::IndexSet& positions);

/// Signals for every bundle of `bundles`, in label order.
std::vector<BundleSignal> compute_bundle_signals(const dataset::Session& session, const parse::BundleMap& bundles,
                                                 const dataset::GroundTruth& gt);

/// "bundle 1 is Type 1 (correct and should be kept), ..." plus a note when
/// nothing was detected.
std::string bundle_tips(const std::vector<BundleSignal>& signals);
std::string intent_tips(const std::vector<IntentSignal>& signals);

/// Runs the demonstration-generation steps against one generator
/// conversation. Every prompt goes through `generator`; ratings go through
/// the panel in fresh conversations.
class DemoBuilder {
public:
    DemoBuilder(const dataset::Catalog& catalog, llm::ChatClient& generator, RaterPanel panel,
                const prompts::PromptRegistry& registry = prompts::PromptRegistry::standard());

    DemoState generate_initial(const dataset::Session& session) const;
    int self_correct(DemoState& state, int max_rounds) const;
    int bundle_feedback_loop(DemoState& state, const dataset::GroundTruth& gt, int max_rounds,
                             std::vector<BundleSignal>* final_signals = nullptr) const;
    void reinfer_intents(DemoState& state) const;
    int intent_feedback_loop(DemoState& state, const dataset::GroundTruth& gt, int max_rounds,
                             std::vector<IntentSignal>* unresolved = nullptr) const;
    RatingOutcome rate_intent(const std::vector<std::string>& bundle_titles, const std::string& candidate,
                              const std::string& ground_truth, const std::string& context_id) const;
    std::string summarize_rules(DemoState& state) const;

    /// Full pipeline on one neighbor. Throws UsageError when `gt` is null or
    /// empty.
    Demonstration build(const dataset::Session& neighbor, const dataset::GroundTruth* gt,
                        const LoopConfig& loops = {}) const;

    std::vector<std::string> titles(const dataset::Session& session) const;

private:
    parse::BundleMap ask_bundles(DemoState& state, const std::string& prompt, const std::string& tag) const;
    parse::IntentMap ask_intents(DemoState& state, const std::string& prompt, const std::string& tag) const;
    std::vector<IntentSignal> compute_intent_signals(DemoState& state, const dataset::GroundTruth& gt) const;

    const dataset::Catalog& catalog_;
    llm::ChatClient& generator_;
    RaterPanel panel_;
    const prompts::PromptRegistry& registry_;
};

/// Bundle and intent prompts with one format-reminder retry. Shared with
/// inference.
parse::BundleMap ask_bundles(llm::ChatClient& client, llm::Conversation& conversation,
                             const prompts::PromptRegistry& registry, const std::string& prompt,
                             const std::string& tag, std::size_t session_length,
                             std::vector<std::string>* warnings = nullptr);
parse::IntentMap ask_intents(llm::ChatClient& client, llm::Conversation& conversation,
                             const prompts::PromptRegistry& registry, const std::string& prompt,
                             const std::string& tag);

}  // namespace dicl::demo
