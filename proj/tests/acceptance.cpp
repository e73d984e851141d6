// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

// Prints one PASS/FAIL line per acceptance criterion and exits non-zero when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "dicl/error.hpp"
#include "dicl/eval.hpp"
#include "dicl/neighbor_index.hpp"
#include "dicl/parse.hpp"
#include "dicl/pipeline.hpp"
#include "dicl/signals.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dicl;
using namespace dicl::testing;
using oracle::Mask;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double limit_seconds, const std::function<Outcome()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = check();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = limit_seconds <= 0 || secs < limit_seconds;
    const bool pass = out.ok && in_time;
    failures += pass ? 0 : 1;
    std::ostringstream time;
    time.setf(std::ios::fixed);
    time.precision(3);
    time << secs << " s";
    if (limit_seconds > 0) time << " (limit " << limit_seconds << " s)";
    std::cout << (pass ? "PASS" : "FAIL") << "  " << name << "  " << out.detail << "  " << time.str() << std::endl;
}

eval::ItemSet to_items(Mask m) {
    eval::ItemSet s;
    for (int i = 0; i < 32; ++i) {
        if (m & (Mask{1} << i)) s.insert("i" + std::to_string(i));
    }
    return s;
}

std::set<int> to_ints(Mask m) {
    std::set<int> s;
    for (int i = 0; i < 32; ++i) {
        if (m & (Mask{1} << i)) s.insert(i);
    }
    return s;
}

Outcome metric_oracle() {
    std::mt19937_64 rng(20240);
    std::size_t instances = 0, mismatches = 0;
    for (int run = 0; run < 200; ++run) {
        std::vector<oracle::Instance> sessions(1 + rng() % 20);
        for (auto& s : sessions) {
            const int universe = 2 + static_cast<int>(rng() % 9);
            const Mask full = (Mask{1} << universe) - 1;
            auto pick = [&] {
                Mask m = 0;
                while (m == 0) m = static_cast<Mask>(rng()) & full;
                return m;
            };
            for (auto g = rng() % 5; g > 0; --g) {
                Mask m = pick();
                while (oracle::card(m) < 2 && universe >= 2) m = pick();
                s.gts.push_back(m);
            }
            for (auto p = rng() % 6; p > 0; --p) {
                Mask m = pick();
                if (!s.gts.empty() && rng() % 2) {
                    m = s.gts[rng() % s.gts.size()] & pick();
                    if (m == 0) m = pick();
                }
                s.preds.push_back(m);
            }
        }
        std::vector<eval::SessionInput> inputs;
        for (std::size_t i = 0; i < sessions.size(); ++i) {
            eval::SessionInput in{"s" + std::to_string(i), {}, {}};
            for (Mask m : sessions[i].preds) in.predictions.push_back(to_items(m));
            for (Mask m : sessions[i].gts) in.ground_truth.push_back(to_items(m));
            inputs.push_back(std::move(in));
        }
        for (bool unique : {false, true}) {
            const auto got = eval::evaluate(inputs, unique ? eval::HitCounting::kUniqueGroundTruth
                                                           : eval::HitCounting::kLiteral);
            const auto want = oracle::brute_force_metrics(sessions, unique);
            const auto same = [](const Rational& r, const oracle::Frac& f) {
                return r == Rational(f.numerator(), f.denominator());
            };
            if (!same(got.precision, want.precision) || !same(got.recall, want.recall) ||
                !same(got.coverage, want.coverage)) {
                ++mismatches;
            }
            ++instances;
        }
    }
    return {mismatches == 0, std::to_string(instances) + " instances, " + std::to_string(mismatches) + " mismatches"};
}

Outcome signal_exhaustiveness() {
    const Mask universe = (Mask{1} << 6) - 1;
    std::vector<std::vector<Mask>> gt_lists{{}};
    for (Mask a = 1; a <= universe; ++a) {
        gt_lists.push_back({a});
        for (Mask b = 1; b <= universe; ++b) gt_lists.push_back({a, b});
    }
    std::size_t configs = 0, bad = 0;
    for (Mask p = 1; p <= universe; ++p) {
        const std::vector<std::set<int>> preds{to_ints(p)};
        for (const auto& masks : gt_lists) {
            std::vector<std::set<int>> gts;
            for (Mask g : masks) gts.push_back(to_ints(g));
            const unsigned bits = oracle::signal_predicates(p, masks);
            const int got = static_cast<int>(demo::classify_all(preds, gts).front());
            if (std::popcount(bits) != 1 || got < 1 || got > 5 || got != std::countr_zero(bits) + 1) ++bad;
            ++configs;
        }
    }
    return {bad == 0, std::to_string(configs) + " configurations, " + std::to_string(bad) + " disagreements"};
}

Outcome retrieval_correctness() {
    std::mt19937_64 rng(64);
    std::normal_distribution<float> normal;
    std::vector<retrieval::SessionEmbedding> corpus(1000);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "c%04zu", (i * 7919) % 1000);
        corpus[i].session_id = id;
        if (i % 50 == 49) {
            corpus[i].vector = corpus[i - 1].vector;
        } else {
            corpus[i].vector.resize(64);
            for (auto& x : corpus[i].vector) x = normal(rng);
        }
    }
    corpus[10].vector.assign(64, 0.0f);

    std::size_t queries = 0, mismatches = 0;
    for (int q = 0; q < 20; ++q) {
        retrieval::SessionEmbedding query{"q", corpus[static_cast<std::size_t>(q) * 37].vector};
        if (q % 2) {
            for (auto& x : query.vector) x = normal(rng);
        }
        std::vector<std::pair<long double, std::string>> brute;
        for (const auto& c : corpus) {
            long double dot = 0, na = 0, nb = 0;
            for (std::size_t d = 0; d < 64; ++d) {
                dot += static_cast<long double>(query.vector[d]) * c.vector[d];
                na += static_cast<long double>(query.vector[d]) * query.vector[d];
                nb += static_cast<long double>(c.vector[d]) * c.vector[d];
            }
            const long double cos = (na == 0 || nb == 0) ? 0 : dot / (std::sqrt(na) * std::sqrt(nb));
            brute.emplace_back(-cos, c.session_id);
        }
        std::sort(brute.begin(), brute.end());
        for (std::size_t k : {1u, 5u, 50u}) {
            const auto got = retrieval::top_k_neighbors(query, corpus, k);
            bool ok = got.size() == k;
            for (std::size_t i = 0; ok && i < k; ++i) {
                ok = got[i].session_id == brute[i].second &&
                     std::abs(got[i].score - static_cast<double>(-brute[i].first)) < 1e-9;
            }
            mismatches += ok ? 0 : 1;
            ++queries;
        }
    }
    return {mismatches == 0, std::to_string(queries) + " rankings (k in {1,5,50}), " + std::to_string(mismatches) +
                                 " mismatches"};
}

fs::path write_script(const fs::path& dir, const std::string& name, const llm::MockScript& s) {
    const auto p = dir / name;
    std::ofstream(p) << s.to_json().dump(2);
    return p;
}

pipeline::RunConfig mock_config(const fs::path& script, const fs::path& run_dir) {
    pipeline::RunConfig c;
    c.dataset = kFixture.string();
    for (auto* p : {&c.generator, &c.rater1, &c.rater2}) {
        p->kind = "mock";
        p->mock_script = script.string();
    }
    c.run_dir = run_dir.string();
    return c;
}

pipeline::Runtime quiet() {
    pipeline::Runtime r;
    r.sleeper = [](std::chrono::milliseconds) {};
    return r;
}

Outcome perfect_oracle() {
    TempDir dir("acceptance-oracle");
    const auto script = write_script(dir.path(), "oracle.json", pipeline::oracle_script(dataset::load_dataset(kFixture)));
    pipeline::Pipeline p(mock_config(script, dir / "run"), quiet());
    const auto r = p.run_all();
    int feedback_rounds = 0;
    for (const auto& e : fs::directory_iterator(p.path(pipeline::files::kDemos))) {
        const auto d = pipeline::read_json(e.path());
        feedback_rounds += d.at("rounds").at("bundle_feedback").get<int>() + d.at("rounds").at("intent_feedback").get<int>();
    }
    const bool ok = r.precision == Rational(1) && r.recall == Rational(1) && r.coverage == Rational(1) &&
                    feedback_rounds == 0 && r.sessions > 0;
    return {ok, "P=" + r.precision.str() + " R=" + r.recall.str() + " C=" + r.coverage.str() + ", " +
                    std::to_string(feedback_rounds) + " feedback rounds"};
}

Outcome loop_budgets() {
    TempDir dir("acceptance-loops");
    const auto script = write_script(dir.path(), "never.json", never_repair_script());
    std::string detail;
    bool ok = true;
    for (const demo::LoopConfig loops : {demo::LoopConfig{1, 4, 1}, demo::LoopConfig{0, 0, 0}}) {
        const auto run = dir / ("run" + std::to_string(loops.bundle_feedback));
        auto config = mock_config(script, run);
        config.loops = loops;
        pipeline::Pipeline(config, quiet()).run_all();
        const auto log = llm::RunLog::read(run / pipeline::files::kLlmLog);
        std::set<std::string> conversations;
        for (const auto& r : log) {
            const auto c = r.at("conversation").get<std::string>();
            if (r.at("role") == "generator" && c.rfind("demo:", 0) == 0) conversations.insert(c);
        }
        for (const auto& c : conversations) {
            const auto tags = tags_of(log, "generator", c);
            const auto sc = count_prefix(tags, "self_correct_bundles");
            const auto bf = count_prefix(tags, "bundle_feedback_round_");
            const auto fi = count_prefix(tags, "intent_feedback_round_");
            ok = ok && sc == static_cast<std::size_t>(loops.self_correct) &&
                 bf == static_cast<std::size_t>(loops.bundle_feedback) &&
                 fi == static_cast<std::size_t>(loops.intent_feedback);
        }
        ok = ok && !conversations.empty();
        detail += "(" + std::to_string(loops.self_correct) + "," + std::to_string(loops.bundle_feedback) + "," +
                  std::to_string(loops.intent_feedback) + ") over " + std::to_string(conversations.size()) +
                  " demos; ";
    }
    return {ok, detail + "rounds counted from the run log"};
}

std::map<std::string, std::string> run_outputs(const fs::path& dir) {
    std::map<std::string, std::string> out;
    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    for (const char* sub : {pipeline::files::kDemos, pipeline::files::kResults}) {
        for (const auto& e : fs::directory_iterator(dir / sub)) {
            out[std::string(sub) + "/" + e.path().filename().string()] = slurp(e.path());
        }
    }
    out[pipeline::files::kEval] = slurp(dir / pipeline::files::kEval);
    return out;
}

Outcome determinism_replay() {
    TempDir dir("acceptance-determinism");
    auto s = never_repair_script();
    s.rules.insert(s.rules.begin(), rule("self_correct_bundles", "{'bundle 1': ['product 1', 'product 2']}"));
    const auto script = write_script(dir.path(), "script.json", s);
    pipeline::Pipeline(mock_config(script, dir / "a"), quiet()).run_all();
    pipeline::Pipeline(mock_config(script, dir / "b"), quiet()).run_all();
    auto replay = mock_config(script, dir / "c");
    for (auto* p : {&replay.generator, &replay.rater1, &replay.rater2}) {
        p->kind = "replay";
        p->mock_script.clear();
        p->replay_log = (dir / "a" / pipeline::files::kLlmLog).string();
    }
    pipeline::Pipeline(replay, quiet()).run_all();
    const auto a = run_outputs(dir / "a");
    const auto b = run_outputs(dir / "b");
    const auto c = run_outputs(dir / "c");
    return {a == b && b == c, std::to_string(a.size()) + " files; runs " + (a == b ? "identical" : "differ") +
                                  ", replay " + (b == c ? "identical" : "differs")};
}

Outcome split_conformance() {
    const auto ds = synthetic_dataset({888, 3499, 1145, 1750, 9});
    const auto split = dataset::chronological_split(ds);
    const auto key = [](const dataset::Session& s) { return std::make_pair(s.timestamp, s.session_id); };
    bool ordered = true;
    const std::vector<const std::vector<dataset::Session>*> parts{&split.train, &split.validation, &split.test};
    for (const auto* part : parts) {
        for (std::size_t i = 1; i < part->size(); ++i) ordered = ordered && key((*part)[i - 1]) <= key((*part)[i]);
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        ordered = ordered && key(parts[i]->back()) <= key(parts[i + 1]->front());
    }
    const bool sizes = split.train.size() == 801 && split.validation.size() == 114 && split.test.size() == 230;
    return {sizes && ordered, "sizes (" + std::to_string(split.train.size()) + ", " +
                                  std::to_string(split.validation.size()) + ", " + std::to_string(split.test.size()) +
                                  "), ordering " + (ordered ? "holds" : "violated")};
}

Outcome parser_fuzz() {
    std::mt19937_64 rng(10000);
    std::size_t crashes = 0;
    for (int i = 0; i < 10000; ++i) {
        std::string s(rng() % 200, '\0');
        for (auto& ch : s) ch = static_cast<char>(rng() % 256);
        if (i % 4 == 0 && !s.empty()) {
            s.front() = '{';
            s.back() = '}';
        }
        const auto guard = [&](auto&& f) {
            try {
                f();
            } catch (const ParseError&) {
            } catch (...) {
                ++crashes;
            }
        };
        guard([&] { parse::parse_bundle_answer(s, 1 + rng() % 20); });
        guard([&] { parse::parse_intent_answer(s); });
        guard([&] { parse::parse_rating_answer(s); });
    }

    std::size_t round_trips = 0, broken = 0;
    const std::vector<std::string> words{"gift", "for", "dad's", "party", "\"pro\"", "set", "{x}", "a:b", "it's"};
    for (int i = 0; i < 2000; ++i) {
        const std::size_t len = 1 + rng() % 15;
        parse::BundleMap b;
        parse::IntentMap in;
        parse::RatingMap r;
        std::set<parse::IndexSet> seen;
        for (std::size_t n = 1 + rng() % 5, j = 1; j <= n; ++j) {
            parse::IndexSet s;
            for (auto m = 1 + rng() % 5; m > 0; --m) s.insert(1 + rng() % len);
            if (!seen.insert(s).second) continue;
            const auto label = "bundle " + std::to_string(j);
            b.insert(label, s);
            std::string text;
            for (auto w = 1 + rng() % 5; w > 0; --w) text += (text.empty() ? "" : " ") + words[rng() % words.size()];
            in.insert(label, text);
            r.insert("intent " + std::to_string(j),
                     {double(1 + rng() % 3), double(1 + rng() % 3), double(1 + rng() % 2)});
        }
        broken += parse::parse_bundle_answer(parse::format_bundles(b), len).bundles == b ? 0 : 1;
        broken += parse::parse_intent_answer(parse::format_intents(in)) == in ? 0 : 1;
        broken += parse::parse_rating_answer(parse::format_ratings(r)) == r ? 0 : 1;
        round_trips += 3;
    }
    return {crashes == 0 && broken == 0, "30000 random inputs, " + std::to_string(crashes) + " crashes; " +
                                             std::to_string(round_trips) + " round-trips, " + std::to_string(broken) +
                                             " broken"};
}

}  // namespace

int main() {
    criterion("metric-oracle-equivalence", 5, metric_oracle);
    criterion("signal-typing-exhaustiveness", 10, signal_exhaustiveness);
    criterion("retrieval-correctness", 2, retrieval_correctness);
    criterion("perfect-oracle-end-to-end", 10, perfect_oracle);
    criterion("loop-budget-conformance", 0, loop_budgets);
    criterion("determinism-and-replay", 0, determinism_replay);
    criterion("split-conformance", 0, split_conformance);
    criterion("parser-fuzz", 0, parser_fuzz);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
