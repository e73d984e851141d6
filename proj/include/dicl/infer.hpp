// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dicl/dataset.hpp"
#include "dicl/demo.hpp"
#include "dicl/llm.hpp"
#include "dicl/parse.hpp"
#include "dicl/prompts.hpp"

namespace dicl::infer {

enum class Mode { kDicl, kFewShotRandom, kZeroShot };

std::string_view mode_name(Mode mode);
/// Accepts "dicl", "few-shot", "few_shot_random", "zero-shot", "zero_shot".
Mode parse_mode(std::string_view name);

struct AblationFlags {
    bool use_self_correct = true;
    bool use_auto_feedback = true;
    bool use_rules = true;
    bool use_intents_in_demo = true;
    bool use_top_neighbor = true;

    bool operator==(const AblationFlags&) const = default;
};

struct InferenceMode {
    Mode mode = Mode::kDicl;
    std::size_t k = 1;
    AblationFlags flags;

    void validate() const;
    nlohmann::json to_json() const;
    static InferenceMode from_json(const nlohmann::json& j);
    bool operator==(const InferenceMode&) const = default;
};

/// Keeps the turns of `turns` allowed by `flags`; kept turns are unchanged.
std::vector<llm::Turn> filter_turns(const std::vector<llm::Turn>& turns, const AblationFlags& flags);

/// A demonstration answered directly with the ground truth: the initial
/// bundle prompt and the initial intent prompt, replied in canonical form.
std::vector<llm::Turn> ideal_transcript(const dataset::Session& session, const dataset::GroundTruth& gt,
                                        const dataset::Catalog& catalog, const prompts::PromptRegistry& registry);

/// Conversation prefix built from transcripts given in neighbor-rank order.
/// Throws UsageError when no transcript is given outside zero-shot mode.
std::vector<llm::Turn> assemble_context(const std::vector<std::vector<llm::Turn>>& transcripts,
                                        const InferenceMode& mode);

struct PredictedBundle {
    std::string label;
    parse::IndexSet positions;
    dataset::ItemSet items;
    std::optional<std::string> intent;
    bool singleton = false;

    bool operator==(const PredictedBundle&) const = default;
};

struct SessionResult {
    dataset::SessionId session_id;
    std::vector<PredictedBundle> bundles;
    std::vector<dataset::SessionId> sources;
    bool failed = false;
    std::string error;
    std::vector<std::string> warnings;
    std::vector<llm::Turn> transcript;  // the target turns only

    std::vector<dataset::ItemSet> predicted_sets() const;
    nlohmann::json to_json() const;
    static SessionResult from_json(const nlohmann::json& j);
};

/// Runs the bundle and intent prompts for `target` after `context`.
/// Unreadable answers (after one format reminder) yield a failed result
/// with no predictions; provider errors propagate.
SessionResult infer_target(const dataset::Session& target, const std::vector<llm::Turn>& context,
                           const std::vector<dataset::SessionId>& sources, const dataset::Catalog& catalog,
                           llm::ChatClient& client,
                           const prompts::PromptRegistry& registry = prompts::PromptRegistry::standard());

}  // namespace dicl::infer
