// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dicl/error.hpp"

namespace dicl::prompts {

namespace ids {
inline constexpr std::string_view kInitialBundles = "initial_bundles";
inline constexpr std::string_view kInitialIntents = "initial_intents";
inline constexpr std::string_view kSelfCorrectBundles = "self_correct_bundles";
inline constexpr std::string_view kSelfCorrectIntents = "self_correct_intents";
inline constexpr std::string_view kBundleFeedback = "bundle_feedback";
inline constexpr std::string_view kIntentFeedback = "intent_feedback";
inline constexpr std::string_view kRules = "rules";
inline constexpr std::string_view kRater = "rater";
inline constexpr std::string_view kTargetInference = "target_inference";
inline constexpr std::string_view kFormatReminder = "format_reminder";
}  // namespace ids

class PromptError : public Error {
public:
    explicit PromptError(const std::string& what) : Error(what, ExitCode::kData) {}
};

/// A template file is a front-matter line `placeholders: a, b` followed by
/// the body. `{name}` in the body is substituted only for declared names, so
/// literal braces in answer-format examples pass through untouched.
struct PromptTemplate {
    std::string id;
    std::vector<std::string> placeholders;
    std::string body;

    static PromptTemplate parse(std::string id, std::string_view file_text);
};

using Bindings = std::map<std::string, std::string>;

class PromptRegistry {
public:
    static PromptRegistry load(const std::filesystem::path& dir);
    /// Loaded from $DICL_PROMPT_DIR, or the prompts/ directory of the source
    /// tree.
    static const PromptRegistry& standard();

    bool contains(std::string_view id) const;
    const PromptTemplate& get(std::string_view id) const;
    std::vector<std::string> template_ids() const;

    /// Throws PromptError on an unknown id, a missing binding, or an empty
    /// binding value.
    std::string render(std::string_view id, const Bindings& bindings = {}) const;

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

/// "product 1: <title>" lines, 1-based, newline separated. Throws
/// PromptError on an empty list.
std::string product_lines(const std::vector<std::string>& titles);

/// "intent 1: <text>" lines for the rater prompt.
std::string intent_lines(const std::vector<std::string>& intents);

}  // namespace dicl::prompts
