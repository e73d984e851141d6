// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>

#include "dicl/error.hpp"
#include "dicl/human_eval.hpp"
#include "support.hpp"

using namespace dicl;
using namespace dicl::eval;
using namespace dicl::testing;

namespace {

struct Domain {
    dataset::Dataset ds;
    HumanEvalDomain view;
};

/// Every session predicts its ground truth plus one non-hit bundle.
Domain make_domain(const std::string& name, std::size_t sessions, std::uint64_t seed) {
    Domain d{synthetic_dataset({sessions, sessions * 4, sessions, sessions, seed}), {}};
    d.view.name = name;
    for (const auto& s : d.ds.sessions) {
        infer::SessionResult r;
        r.session_id = s.session_id;
        const auto& gt = d.ds.ground_truth.at(s.session_id);
        for (std::size_t i = 0; i < gt.bundles.size(); ++i) {
            r.bundles.push_back({"bundle " + std::to_string(i + 1), {}, gt.bundles[i].items,
                                 "generated " + s.session_id + " " + std::to_string(i), false});
        }
        r.bundles.push_back({"bundle 9", {}, {s.item_ids.front()}, "lonely", true});
        d.view.results.push_back(std::move(r));
    }
    return d;
}

std::vector<std::string> lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("candidates are hit bundles with intents") {
    auto d = make_domain("electronic", 10, 3);
    d.view.catalog = &d.ds.catalog;
    d.view.ground_truth = &d.ds.ground_truth;
    const auto c = human_eval_candidates(d.view);
    std::size_t gt_bundles = 0;
    for (const auto& [_, gt] : d.ds.ground_truth) gt_bundles += gt.bundles.size();
    CHECK(c.size() == gt_bundles);
    for (const auto& s : c) {
        CHECK(s.generated_intent.rfind("generated ", 0) == 0);
        CHECK_FALSE(s.annotated_intent.empty());
        CHECK(s.titles.size() >= 2);
    }
}

TEST_CASE("sampling twenty per domain over three domains gives sixty records") {
    std::vector<Domain> domains;
    domains.push_back(make_domain("electronic", 30, 1));
    domains.push_back(make_domain("clothing", 30, 2));
    domains.push_back(make_domain("food", 30, 3));
    std::vector<HumanEvalDomain> views;
    for (auto& d : domains) {
        d.view.catalog = &d.ds.catalog;
        d.view.ground_truth = &d.ds.ground_truth;
        views.push_back(d.view);
    }
    const auto a = sample_human_eval(views, 20, 42);
    CHECK(a.size() == 60);
    std::map<std::string, int> per_domain;
    std::set<std::string> ids;
    for (const auto& s : a) {
        ++per_domain[s.domain];
        ids.insert(s.record_id);
    }
    CHECK(per_domain == std::map<std::string, int>{{"clothing", 20}, {"electronic", 20}, {"food", 20}});
    CHECK(ids.size() == 60);

    const auto b = sample_human_eval(views, 20, 42);
    REQUIRE(b.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].session_id == b[i].session_id);
        CHECK(a[i].bundle_label == b[i].bundle_label);
    }
    const auto c = sample_human_eval(views, 20, 43);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) differs = differs || a[i].session_id != c[i].session_id;
    CHECK(differs);

    try {
        sample_human_eval(views, 1000, 42);
        FAIL("expected a deficit error");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find("electronic") != std::string::npos);
        CHECK(what.find("1000") != std::string::npos);
    }

    TempDir dir("human-eval");
    const auto files = write_human_eval(a, 15, 7, dir.path());
    CHECK(files.size() == 16);
    const auto key = lines(dir / "answer_key.tsv");
    CHECK(key.size() == 1 + 15 * 60);
    const auto sheet = lines(dir / "rater_1.tsv");
    REQUIRE(sheet.size() == 61);
    CHECK(sheet[0] == "record_id\tdomain\tproducts\tintent_a\tintent_b");
    std::size_t generated_first = 0;
    for (std::size_t i = 1; i < sheet.size(); ++i) {
        CHECK(sheet[i].find("generated\t") == std::string::npos);
        const auto cols = std::count(sheet[i].begin(), sheet[i].end(), '\t');
        CHECK(cols == 4);
        generated_first += sheet[i].find("\tgenerated ") < sheet[i].rfind('\t');
    }
    CHECK(generated_first > 0);
    CHECK(generated_first < 60);
    CHECK(lines(dir / "rater_1.tsv") != lines(dir / "rater_2.tsv"));
}

TEST_CASE("seeded shuffle is a permutation") {
    std::mt19937_64 rng(1);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    auto w = v;
    seeded_shuffle(w, rng);
    CHECK(w != v);
    std::sort(w.begin(), w.end());
    CHECK(w == v);
}
