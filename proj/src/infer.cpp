// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/infer.hpp"

#include <algorithm>

namespace dicl::infer {

using nlohmann::json;
namespace tags = demo::tags;

std::string_view mode_name(Mode mode) {
    switch (mode) {
        case Mode::kDicl:
            return "dicl";
        case Mode::kFewShotRandom:
            return "few_shot_random";
        case Mode::kZeroShot:
            return "zero_shot";
    }
    return "dicl";
}

Mode parse_mode(std::string_view name) {
    if (name == "dicl") return Mode::kDicl;
    if (name == "few-shot" || name == "few_shot" || name == "few_shot_random") return Mode::kFewShotRandom;
    if (name == "zero-shot" || name == "zero_shot") return Mode::kZeroShot;
    throw UsageError("unknown inference mode '" + std::string(name) + "'");
}

void InferenceMode::validate() const {
    if (mode != Mode::kZeroShot && k < 1) throw UsageError("k must be >= 1");
}

json InferenceMode::to_json() const {
    return {{"mode", mode_name(mode)},
            {"k", k},
            {"use_self_correct", flags.use_self_correct},
            {"use_auto_feedback", flags.use_auto_feedback},
            {"use_rules", flags.use_rules},
            {"use_intents_in_demo", flags.use_intents_in_demo},
            {"use_top_neighbor", flags.use_top_neighbor}};
}

InferenceMode InferenceMode::from_json(const json& j) {
    InferenceMode m;
    m.mode = parse_mode(j.value("mode", std::string("dicl")));
    m.k = j.value("k", std::size_t{1});
    m.flags.use_self_correct = j.value("use_self_correct", true);
    m.flags.use_auto_feedback = j.value("use_auto_feedback", true);
    m.flags.use_rules = j.value("use_rules", true);
    m.flags.use_intents_in_demo = j.value("use_intents_in_demo", true);
    m.flags.use_top_neighbor = j.value("use_top_neighbor", true);
    m.validate();
    return m;
}

namespace {

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

bool is_intent_step(std::string_view tag) {
    return tag == tags::kInitialIntents || tag == tags::kSelfCorrectIntents || tag == tags::kReinferIntents ||
           tag == tags::kTargetIntents || starts_with(tag, tags::kIntentFeedbackPrefix);
}

bool keep_turn(std::string_view tag, const AblationFlags& flags) {
    const auto base = tags::base_tag(tag);
    if (!flags.use_self_correct && (base == tags::kSelfCorrectBundles || base == tags::kSelfCorrectIntents)) {
        return false;
    }
    if (!flags.use_auto_feedback &&
        (starts_with(base, tags::kBundleFeedbackPrefix) || starts_with(base, tags::kIntentFeedbackPrefix) ||
         base == tags::kReinferIntents)) {
        return false;
    }
    if (!flags.use_rules && base == tags::kRules) return false;
    if (!flags.use_intents_in_demo && is_intent_step(base)) return false;
    return true;
}

}  // namespace

std::vector<llm::Turn> filter_turns(const std::vector<llm::Turn>& turns, const AblationFlags& flags) {
    std::vector<llm::Turn> out;
    for (const auto& t : turns) {
        if (keep_turn(t.tag, flags)) out.push_back(t);
    }
    return out;
}

std::vector<llm::Turn> ideal_transcript(const dataset::Session& session, const dataset::GroundTruth& gt,
                                        const dataset::Catalog& catalog, const prompts::PromptRegistry& registry) {
    std::vector<std::string> titles;
    for (const auto& id : session.item_ids) {
        auto it = catalog.find(id);
        if (it == catalog.end()) throw DataError("dangling item reference '" + id + "'");
        titles.push_back(it->second.raw_title);
    }
    parse::BundleMap bundles;
    parse::IntentMap intents;
    for (std::size_t b = 0; b < gt.bundles.size(); ++b) {
        parse::IndexSet positions;
        for (std::size_t p = 0; p < session.item_ids.size(); ++p) {
            if (gt.bundles[b].items.contains(session.item_ids[p])) positions.insert(p + 1);
        }
        const auto label = "bundle " + std::to_string(b + 1);
        bundles.insert(label, std::move(positions));
        intents.insert(label, gt.bundles[b].intent);
    }
    return {
        {std::string(tags::kInitialBundles),
         registry.render(prompts::ids::kInitialBundles, {{"products", prompts::product_lines(titles)}}),
         parse::format_bundles(bundles)},
        {std::string(tags::kInitialIntents), registry.render(prompts::ids::kInitialIntents),
         parse::format_intents(intents)},
    };
}

std::vector<llm::Turn> assemble_context(const std::vector<std::vector<llm::Turn>>& transcripts,
                                        const InferenceMode& mode) {
    mode.validate();
    if (mode.mode == Mode::kZeroShot) return {};
    if (transcripts.empty()) throw UsageError("no demonstration available for the target session");
    std::vector<llm::Turn> out;
    for (const auto& t : transcripts) {
        auto kept = filter_turns(t, mode.flags);
        out.insert(out.end(), kept.begin(), kept.end());
    }
    return out;
}

// ---- results -----------------------------------------------------------------------

std::vector<dataset::ItemSet> SessionResult::predicted_sets() const {
    std::vector<dataset::ItemSet> out;
    out.reserve(bundles.size());
    for (const auto& b : bundles) out.push_back(b.items);
    return out;
}

json SessionResult::to_json() const {
    json arr = json::array();
    for (const auto& b : bundles) {
        arr.push_back({{"label", b.label},
                       {"positions", b.positions},
                       {"items", b.items},
                       {"intent", b.intent ? json(*b.intent) : json(nullptr)},
                       {"singleton", b.singleton}});
    }
    json turns = json::array();
    for (const auto& t : transcript) turns.push_back({{"tag", t.tag}, {"user", t.user}, {"assistant", t.assistant}});
    return {{"session_id", session_id}, {"failed", failed},     {"error", error},    {"sources", sources},
            {"bundles", std::move(arr)}, {"warnings", warnings}, {"transcript", std::move(turns)}};
}

SessionResult SessionResult::from_json(const json& j) {
    SessionResult r;
    r.session_id = j.at("session_id").get<std::string>();
    r.failed = j.value("failed", false);
    r.error = j.value("error", std::string{});
    r.sources = j.value("sources", std::vector<std::string>{});
    r.warnings = j.value("warnings", std::vector<std::string>{});
    for (const auto& b : j.at("bundles")) {
        PredictedBundle pb;
        pb.label = b.at("label").get<std::string>();
        pb.positions = b.at("positions").get<parse::IndexSet>();
        pb.items = b.at("items").get<dataset::ItemSet>();
        if (b.contains("intent") && !b.at("intent").is_null()) pb.intent = b.at("intent").get<std::string>();
        pb.singleton = b.value("singleton", false);
        r.bundles.push_back(std::move(pb));
    }
    for (const auto& t : j.value("transcript", json::array())) {
        r.transcript.push_back({t.at("tag").get<std::string>(), t.at("user").get<std::string>(),
                                t.at("assistant").get<std::string>()});
    }
    return r;
}

// ---- inference ---------------------------------------------------------------------

SessionResult infer_target(const dataset::Session& target, const std::vector<llm::Turn>& context,
                           const std::vector<dataset::SessionId>& sources, const dataset::Catalog& catalog,
                           llm::ChatClient& client, const prompts::PromptRegistry& registry) {
    if (target.item_ids.empty()) throw UsageError("target session '" + target.session_id + "' is empty");
    std::vector<std::string> titles;
    for (const auto& id : target.item_ids) {
        auto it = catalog.find(id);
        if (it == catalog.end()) throw DataError("dangling item reference '" + id + "'");
        titles.push_back(it->second.raw_title);
    }

    SessionResult result;
    result.session_id = target.session_id;
    result.sources = sources;

    llm::Conversation conv("infer:" + target.session_id);
    conv.append_all(context);
    const bool has_rules = std::any_of(context.begin(), context.end(),
                                       [](const llm::Turn& t) { return tags::base_tag(t.tag) == tags::kRules; });
    const auto template_id = has_rules ? prompts::ids::kTargetInference : prompts::ids::kInitialBundles;
    const auto bundle_prompt = registry.render(template_id, {{"products", prompts::product_lines(titles)}});

    const auto finish = [&] {
        result.transcript.assign(conv.turns().begin() + static_cast<std::ptrdiff_t>(context.size()),
                                 conv.turns().end());
    };

    try {
        auto bundles = demo::ask_bundles(client, conv, registry, bundle_prompt, std::string(tags::kTargetBundles),
                                         target.item_ids.size(), &result.warnings);
        auto intents = demo::ask_intents(client, conv, registry, registry.render(prompts::ids::kInitialIntents),
                                         std::string(tags::kTargetIntents));
        for (const auto& [label, positions] : bundles) {
            PredictedBundle pb;
            pb.label = label;
            pb.positions = positions;
            pb.items = demo::resolve_items(target, positions);
            pb.singleton = pb.items.size() < 2;
            if (const auto* intent = intents.find(label)) pb.intent = *intent;
            if (pb.singleton) result.warnings.push_back(label + " holds a single product");
            result.bundles.push_back(std::move(pb));
        }
    } catch (const ParseError& e) {
        result.failed = true;
        result.error = e.what();
        result.bundles.clear();
    }
    finish();
    return result;
}

}  // namespace dicl::infer
