// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/human_eval.hpp"

#include <fstream>
#include <random>

#include "dicl/error.hpp"
#include "dicl/eval.hpp"

namespace dicl::eval {

namespace {

std::string tsv_cell(std::string s) {
    for (auto& c : s) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

std::string join_titles(const std::vector<std::string>& titles) {
    std::string out;
    for (const auto& t : titles) {
        if (!out.empty()) out += " | ";
        out += t;
    }
    return out;
}

}  // namespace

std::vector<HumanEvalSample> human_eval_candidates(const HumanEvalDomain& domain) {
    if (!domain.catalog || !domain.ground_truth) throw UsageError("human-eval domain '" + domain.name + "' is incomplete");
    std::vector<HumanEvalSample> out;
    for (const auto& r : domain.results) {
        if (r.failed) continue;
        auto gt_it = domain.ground_truth->find(r.session_id);
        if (gt_it == domain.ground_truth->end()) continue;
        std::vector<ItemSet> gts;
        for (const auto& b : gt_it->second.bundles) gts.push_back(b.items);
        for (const auto& b : r.bundles) {
            if (!b.intent) continue;
            const auto h = is_hit(b.items, gts);
            if (!h.hit) continue;
            HumanEvalSample s;
            s.domain = domain.name;
            s.session_id = r.session_id;
            s.bundle_label = b.label;
            for (const auto& id : b.items) s.titles.push_back(domain.catalog->at(id).raw_title);
            s.generated_intent = *b.intent;
            s.annotated_intent = gt_it->second.bundles[*h.matched].intent;
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::vector<HumanEvalSample> sample_human_eval(const std::vector<HumanEvalDomain>& domains, std::size_t n_per_domain,
                                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<HumanEvalSample> out;
    for (const auto& d : domains) {
        auto candidates = human_eval_candidates(d);
        if (candidates.size() < n_per_domain) {
            throw DataError("domain '" + d.name + "' has " + std::to_string(candidates.size()) +
                            " hit bundles with intents, " + std::to_string(n_per_domain - candidates.size()) +
                            " short of the requested " + std::to_string(n_per_domain));
        }
        seeded_shuffle(candidates, rng);
        candidates.resize(n_per_domain);
        out.insert(out.end(), std::make_move_iterator(candidates.begin()), std::make_move_iterator(candidates.end()));
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].record_id = "r" + std::to_string(i + 1);
    return out;
}

std::vector<std::filesystem::path> write_human_eval(const std::vector<HumanEvalSample>& samples, std::size_t raters,
                                                    std::uint64_t seed, const std::filesystem::path& out_dir) {
    if (raters == 0) throw UsageError("at least one rater is required");
    std::filesystem::create_directories(out_dir);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::filesystem::path> written;

    const auto key_path = out_dir / "answer_key.tsv";
    std::ofstream key(key_path);
    key << "rater\trecord_id\tdomain\tsession_id\tbundle_label\tintent_a_source\tintent_b_source\n";

    for (std::size_t r = 1; r <= raters; ++r) {
        std::vector<std::size_t> order(samples.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        seeded_shuffle(order, rng);

        const auto path = out_dir / ("rater_" + std::to_string(r) + ".tsv");
        std::ofstream out(path);
        out << "record_id\tdomain\tproducts\tintent_a\tintent_b\n";
        for (auto i : order) {
            const auto& s = samples[i];
            const bool generated_first = (rng() & 1U) == 0;
            const auto& a = generated_first ? s.generated_intent : s.annotated_intent;
            const auto& b = generated_first ? s.annotated_intent : s.generated_intent;
            out << s.record_id << '\t' << tsv_cell(s.domain) << '\t' << tsv_cell(join_titles(s.titles)) << '\t'
                << tsv_cell(a) << '\t' << tsv_cell(b) << '\n';
            key << r << '\t' << s.record_id << '\t' << tsv_cell(s.domain) << '\t' << tsv_cell(s.session_id) << '\t'
                << tsv_cell(s.bundle_label) << '\t' << (generated_first ? "generated\tannotated" : "annotated\tgenerated")
                << '\n';
        }
        if (!out) throw Error("cannot write " + path.string());
        written.push_back(path);
    }
    if (!key) throw Error("cannot write " + key_path.string());
    written.push_back(key_path);
    return written;
}

}  // namespace dicl::eval
