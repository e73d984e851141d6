// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/demo.hpp"

#include <algorithm>

namespace dicl::demo {

using nlohmann::json;

namespace {

constexpr std::string_view kBundleFormat = "{'bundle number':['product number']}";
constexpr std::string_view kIntentFormat = "{'bundle number':'intent'}";
constexpr std::string_view kRatingFormat =
    "{'intent number': ['Naturalness':score, 'Coverage':score, 'Motivation':score]}";

std::string reminder(const prompts::PromptRegistry& registry, std::string_view format) {
    return registry.render(prompts::ids::kFormatReminder, {{"format", std::string(format)}});
}

std::string reminder_tag(const std::string& tag) { return std::string(tags::kFormatReminderPrefix) + tag; }

json bundles_json(const parse::BundleMap& m) {
    json arr = json::array();
    for (const auto& [label, members] : m) arr.push_back({{"label", label}, {"products", members}});
    return arr;
}

parse::BundleMap bundles_from(const json& arr) {
    parse::BundleMap m;
    for (const auto& e : arr) m.insert(e.at("label").get<std::string>(), e.at("products").get<parse::IndexSet>());
    return m;
}

json intents_json(const parse::IntentMap& m) {
    json arr = json::array();
    for (const auto& [label, text] : m) arr.push_back({{"label", label}, {"intent", text}});
    return arr;
}

parse::IntentMap intents_from(const json& arr) {
    parse::IntentMap m;
    for (const auto& e : arr) m.insert(e.at("label").get<std::string>(), e.at("intent").get<std::string>());
    return m;
}

}  // namespace

std::string_view tags::base_tag(std::string_view tag) {
    while (tag.substr(0, kFormatReminderPrefix.size()) == kFormatReminderPrefix) {
        tag.remove_prefix(kFormatReminderPrefix.size());
    }
    return tag;
}

void LoopConfig::validate() const {
    if (self_correct < 0 || bundle_feedback < 0 || intent_feedback < 0) {
        throw UsageError("loop round budgets must be >= 0");
    }
}

// ---- serialization --------------------------------------------------------------

json Demonstration::to_json() const {
    json bsig = json::array();
    for (const auto& s : final_bundle_signals) {
        bsig.push_back({{"label", s.label},
                        {"type", static_cast<int>(s.type)},
                        {"matched_gt", s.matched_gt ? json(*s.matched_gt) : json(nullptr)}});
    }
    json isig = json::array();
    for (const auto& s : unresolved_intent_signals) {
        json types = json::array();
        for (auto t : s.types) types.push_back(static_cast<int>(t));
        isig.push_back({{"label", s.label}, {"types", std::move(types)}});
    }
    return {{"neighbor_session", neighbor_session},
            {"rounds",
             {{"self_correct", rounds.self_correct},
              {"bundle_feedback", rounds.bundle_feedback},
              {"intent_feedback", rounds.intent_feedback}}},
            {"bundles", bundles_json(bundles)},
            {"intents", intents_json(intents)},
            {"rules", rules},
            {"final_bundle_signals", std::move(bsig)},
            {"unresolved_intent_signals", std::move(isig)},
            {"warnings", warnings},
            {"conversation", conversation.to_json()}};
}

Demonstration Demonstration::from_json(const json& j) {
    Demonstration d;
    d.neighbor_session = j.at("neighbor_session").get<std::string>();
    const auto& r = j.at("rounds");
    d.rounds = {r.at("self_correct").get<int>(), r.at("bundle_feedback").get<int>(),
                r.at("intent_feedback").get<int>()};
    d.bundles = bundles_from(j.at("bundles"));
    d.intents = intents_from(j.at("intents"));
    d.rules = j.at("rules").get<std::string>();
    for (const auto& s : j.value("final_bundle_signals", json::array())) {
        BundleSignal b;
        b.label = s.at("label").get<std::string>();
        b.type = static_cast<BundleSignalType>(s.at("type").get<int>());
        if (!s.at("matched_gt").is_null()) b.matched_gt = s.at("matched_gt").get<std::size_t>();
        d.final_bundle_signals.push_back(std::move(b));
    }
    for (const auto& s : j.value("unresolved_intent_signals", json::array())) {
        IntentSignal i;
        i.label = s.at("label").get<std::string>();
        for (const auto& t : s.at("types")) i.types.push_back(static_cast<IntentSignalType>(t.get<int>()));
        d.unresolved_intent_signals.push_back(std::move(i));
    }
    d.warnings = j.value("warnings", std::vector<std::string>{});
    d.conversation = llm::Conversation::from_json(j.at("conversation"));
    return d;
}

// ---- signal helpers ---------------------------------------------------------------

std::vector<IntentSignalType> intent_signal_types(const RatingOutcome& outcome) {
    std::set<IntentSignalType> found;
    const auto n = std::min(outcome.candidate.size(), outcome.ground_truth.size());
    for (std::size_t r = 0; r < n; ++r) {
        const auto& c = outcome.candidate[r];
        const auto& g = outcome.ground_truth[r];
        if (c.naturalness < g.naturalness) found.insert(IntentSignalType::kNaturalness);
        if (c.coverage < g.coverage) found.insert(IntentSignalType::kCoverage);
        if (c.motivation < g.motivation) found.insert(IntentSignalType::kMotivation);
    }
    return {found.begin(), found.end()};
}

dataset::ItemSet resolve_items(const dataset::Session& session, const parse::IndexSet& positions) {
    dataset::ItemSet out;
    for (auto p : positions) {
        if (p >= 1 && p <= session.item_ids.size()) out.insert(session.item_ids[p - 1]);
    }
    return out;
}

std::vector<BundleSignal> compute_bundle_signals(const dataset::Session& session, const parse::BundleMap& bundles,
                                                 const dataset::GroundTruth& gt) {
    std::vector<dataset::ItemSet> preds;
    for (const auto& [_, positions] : bundles) preds.push_back(resolve_items(session, positions));
    std::vector<dataset::ItemSet> gts;
    for (const auto& b : gt.bundles) gts.push_back(b.items);

    const auto m = match_bundles(preds, gts);
    std::vector<BundleSignal> out;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto* ref = m.reference[i] ? &gts[*m.reference[i]] : nullptr;
        out.push_back({bundles[i].first, classify_bundle_signal(preds[i], ref), m.primary[i]});
    }
    return out;
}

std::string bundle_tips(const std::vector<BundleSignal>& signals) {
    if (signals.empty()) return "no bundle is detected, but the products contain bundles";
    std::string out;
    for (const auto& s : signals) {
        if (!out.empty()) out += ", ";
        out += s.label + " is Type " + std::to_string(static_cast<int>(s.type)) + " (" +
               std::string(describe(s.type)) + ")";
    }
    return out;
}

std::string intent_tips(const std::vector<IntentSignal>& signals) {
    std::string out;
    for (const auto& s : signals) {
        if (!out.empty()) out += ", ";
        auto label = s.label;
        if (label.rfind("bundle ", 0) == 0) label = "intent " + label.substr(7);
        out += "regenerate " + label + " to [";
        for (std::size_t i = 0; i < s.types.size(); ++i) {
            if (i) out += ", ";
            out += "Type " + std::to_string(static_cast<int>(s.types[i])) + " (" +
                   std::string(describe(s.types[i])) + ")";
        }
        out += "]";
    }
    return out;
}

// ---- prompting with one format reminder ---------------------------------------------

parse::BundleMap ask_bundles(llm::ChatClient& client, llm::Conversation& conversation,
                             const prompts::PromptRegistry& registry, const std::string& prompt,
                             const std::string& tag, std::size_t session_length, std::vector<std::string>* warnings) {
    auto reply = client.send(conversation, prompt, tag);
    parse::BundleParse parsed;
    try {
        parsed = parse::parse_bundle_answer(reply, session_length);
    } catch (const ParseError&) {
        reply = client.send(conversation, reminder(registry, kBundleFormat), reminder_tag(tag));
        try {
            parsed = parse::parse_bundle_answer(reply, session_length);
        } catch (const ParseError& e) {
            throw ParseError("step '" + tag + "': unreadable bundles after a format reminder: " + e.what());
        }
    }
    if (warnings) {
        for (auto& w : parsed.warnings) warnings->push_back(tag + ": " + w);
    }
    return std::move(parsed.bundles);
}

parse::IntentMap ask_intents(llm::ChatClient& client, llm::Conversation& conversation,
                             const prompts::PromptRegistry& registry, const std::string& prompt,
                             const std::string& tag) {
    auto reply = client.send(conversation, prompt, tag);
    try {
        return parse::parse_intent_answer(reply);
    } catch (const ParseError&) {
        reply = client.send(conversation, reminder(registry, kIntentFormat), reminder_tag(tag));
        try {
            return parse::parse_intent_answer(reply);
        } catch (const ParseError& e) {
            throw ParseError("step '" + tag + "': unreadable intents after a format reminder: " + e.what());
        }
    }
}

// ---- DemoBuilder -------------------------------------------------------------------

DemoBuilder::DemoBuilder(const dataset::Catalog& catalog, llm::ChatClient& generator, RaterPanel panel,
                         const prompts::PromptRegistry& registry)
    : catalog_(catalog), generator_(generator), panel_(std::move(panel)), registry_(registry) {
    if (panel_.repetitions < 1) throw UsageError("rater repetitions must be >= 1");
}

std::vector<std::string> DemoBuilder::titles(const dataset::Session& session) const {
    std::vector<std::string> out;
    for (const auto& id : session.item_ids) {
        auto it = catalog_.find(id);
        if (it == catalog_.end()) throw DataError("dangling item reference '" + id + "'");
        out.push_back(it->second.raw_title);
    }
    return out;
}

parse::BundleMap DemoBuilder::ask_bundles(DemoState& state, const std::string& prompt, const std::string& tag) const {
    return demo::ask_bundles(generator_, state.conversation, registry_, prompt, tag, state.session->item_ids.size(),
                             &state.warnings);
}

parse::IntentMap DemoBuilder::ask_intents(DemoState& state, const std::string& prompt, const std::string& tag) const {
    return demo::ask_intents(generator_, state.conversation, registry_, prompt, tag);
}

DemoState DemoBuilder::generate_initial(const dataset::Session& session) const {
    if (session.item_ids.empty()) throw UsageError("session '" + session.session_id + "' is empty");
    DemoState state;
    state.session = &session;
    state.conversation = llm::Conversation("demo:" + session.session_id);
    const auto bundle_prompt =
        registry_.render(prompts::ids::kInitialBundles, {{"products", prompts::product_lines(titles(session))}});
    state.bundles = ask_bundles(state, bundle_prompt, std::string(tags::kInitialBundles));
    state.intents = ask_intents(state, registry_.render(prompts::ids::kInitialIntents),
                                std::string(tags::kInitialIntents));
    return state;
}

int DemoBuilder::self_correct(DemoState& state, int max_rounds) const {
    int rounds = 0;
    for (int r = 1; r <= max_rounds; ++r) {
        auto adjusted = ask_bundles(state, registry_.render(prompts::ids::kSelfCorrectBundles),
                                    std::string(tags::kSelfCorrectBundles));
        rounds = r;
        if (parse::same_bundles(adjusted, state.bundles)) break;
        state.bundles = std::move(adjusted);
        state.intents = ask_intents(state, registry_.render(prompts::ids::kSelfCorrectIntents),
                                    std::string(tags::kSelfCorrectIntents));
    }
    return rounds;
}

int DemoBuilder::bundle_feedback_loop(DemoState& state, const dataset::GroundTruth& gt, int max_rounds,
                                      std::vector<BundleSignal>* final_signals) const {
    int rounds = 0;
    for (;;) {
        auto signals = compute_bundle_signals(*state.session, state.bundles, gt);
        const bool all_kept = !signals.empty() && std::all_of(signals.begin(), signals.end(), [](const auto& s) {
            return s.type == BundleSignalType::kKeep;
        });
        if (all_kept || rounds >= max_rounds) {
            if (final_signals) *final_signals = std::move(signals);
            return rounds;
        }
        ++rounds;
        const auto prompt = registry_.render(prompts::ids::kBundleFeedback, {{"tips", bundle_tips(signals)}});
        state.bundles = ask_bundles(state, prompt, std::string(tags::kBundleFeedbackPrefix) + std::to_string(rounds));
    }
}

void DemoBuilder::reinfer_intents(DemoState& state) const {
    state.intents = ask_intents(state, registry_.render(prompts::ids::kInitialIntents),
                                std::string(tags::kReinferIntents));
}

RatingOutcome DemoBuilder::rate_intent(const std::vector<std::string>& bundle_titles, const std::string& candidate,
                                       const std::string& ground_truth, const std::string& context_id) const {
    if (panel_.raters.empty()) throw UsageError("rater panel is empty");
    const auto prompt = registry_.render(
        prompts::ids::kRater,
        {{"products", prompts::product_lines(bundle_titles)},
         {"intents_block", prompts::intent_lines({candidate, ground_truth})}});

    RatingOutcome out;
    for (std::size_t r = 0; r < panel_.raters.size(); ++r) {
        auto& rater = *panel_.raters[r];
        std::vector<std::pair<parse::RatingTriple, parse::RatingTriple>> ok;
        std::string last_error;
        for (int rep = 0; rep < panel_.repetitions; ++rep) {
            llm::Conversation conv(context_id + ":rater" + std::to_string(r + 1) + ":rep" + std::to_string(rep + 1));
            const auto salt = "rep=" + std::to_string(rep + 1);
            const auto read = [](const std::string& reply) {
                auto m = parse::parse_rating_answer(reply);
                const auto* c = m.find("intent 1");
                const auto* g = m.find("intent 2");
                if (!c || !g) throw ParseError("rating answer must score 'intent 1' and 'intent 2'");
                return std::make_pair(*c, *g);
            };
            try {
                ok.push_back(read(rater.send(conv, prompt, std::string(tags::kRateIntent), salt)));
            } catch (const ParseError&) {
                try {
                    ok.push_back(read(rater.send(conv, reminder(registry_, kRatingFormat),
                                                 reminder_tag(std::string(tags::kRateIntent)), salt)));
                } catch (const ParseError& e) {
                    last_error = e.what();
                }
            }
        }
        const auto needed = static_cast<std::size_t>(std::min(2, panel_.repetitions));
        if (ok.size() < needed) {
            throw ParseError("rater " + std::to_string(r + 1) + " gave " + std::to_string(ok.size()) +
                             " readable ratings out of " + std::to_string(panel_.repetitions) + ": " + last_error);
        }
        parse::RatingTriple cand, gt;
        for (const auto& [c, g] : ok) {
            cand.naturalness += c.naturalness;
            cand.coverage += c.coverage;
            cand.motivation += c.motivation;
            gt.naturalness += g.naturalness;
            gt.coverage += g.coverage;
            gt.motivation += g.motivation;
        }
        const auto n = static_cast<double>(ok.size());
        out.candidate.push_back({cand.naturalness / n, cand.coverage / n, cand.motivation / n});
        out.ground_truth.push_back({gt.naturalness / n, gt.coverage / n, gt.motivation / n});
    }
    return out;
}

std::vector<IntentSignal> DemoBuilder::compute_intent_signals(DemoState& state, const dataset::GroundTruth& gt) const {
    const auto bundle_signals = compute_bundle_signals(*state.session, state.bundles, gt);
    std::vector<IntentSignal> out;
    for (std::size_t i = 0; i < bundle_signals.size(); ++i) {
        const auto& sig = bundle_signals[i];
        if (!sig.matched_gt) continue;
        const auto* intent = state.intents.find(sig.label);
        if (!intent) continue;
        std::vector<std::string> bundle_titles;
        for (auto pos : state.bundles[i].second) {
            bundle_titles.push_back(catalog_.at(state.session->item_ids[pos - 1]).raw_title);
        }
        const auto outcome = rate_intent(bundle_titles, *intent, gt.bundles[*sig.matched_gt].intent,
                                         state.conversation.id() + ":" + sig.label);
        auto types = intent_signal_types(outcome);
        if (!types.empty()) out.push_back({sig.label, std::move(types)});
    }
    return out;
}

int DemoBuilder::intent_feedback_loop(DemoState& state, const dataset::GroundTruth& gt, int max_rounds,
                                      std::vector<IntentSignal>* unresolved) const {
    if (max_rounds <= 0) return 0;
    int rounds = 0;
    for (;;) {
        auto signals = compute_intent_signals(state, gt);
        if (signals.empty()) return rounds;
        if (rounds >= max_rounds) {
            if (unresolved) *unresolved = std::move(signals);
            return rounds;
        }
        ++rounds;
        const auto prompt = registry_.render(prompts::ids::kIntentFeedback, {{"tips", intent_tips(signals)}});
        auto regenerated =
            ask_intents(state, prompt, std::string(tags::kIntentFeedbackPrefix) + std::to_string(rounds));
        for (const auto& [label, text] : regenerated) state.intents.insert_or_assign(label, text);
    }
}

std::string DemoBuilder::summarize_rules(DemoState& state) const {
    const auto prompt = registry_.render(prompts::ids::kRules);
    const auto trimmed = [](const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return std::string{};
        return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
    };
    auto rules = trimmed(generator_.send(state.conversation, prompt, std::string(tags::kRules)));
    if (rules.empty()) {
        rules = trimmed(generator_.send(state.conversation, prompt, reminder_tag(std::string(tags::kRules))));
    }
    if (rules.empty()) throw ParseError("model returned no rules for '" + state.conversation.id() + "'");
    return rules;
}

Demonstration DemoBuilder::build(const dataset::Session& neighbor, const dataset::GroundTruth* gt,
                                 const LoopConfig& loops) const {
    loops.validate();
    if (gt == nullptr || gt->bundles.empty()) {
        throw UsageError("neighbor session '" + neighbor.session_id + "' has no ground truth");
    }
    Demonstration demo;
    demo.neighbor_session = neighbor.session_id;

    auto state = generate_initial(neighbor);
    demo.rounds.self_correct = self_correct(state, loops.self_correct);
    demo.rounds.bundle_feedback = bundle_feedback_loop(state, *gt, loops.bundle_feedback, &demo.final_bundle_signals);
    reinfer_intents(state);
    demo.rounds.intent_feedback =
        intent_feedback_loop(state, *gt, loops.intent_feedback, &demo.unresolved_intent_signals);
    demo.rules = summarize_rules(state);

    demo.bundles = std::move(state.bundles);
    demo.intents = std::move(state.intents);
    demo.warnings = std::move(state.warnings);
    demo.conversation = std::move(state.conversation);
    return demo;
}

}  // namespace dicl::demo
