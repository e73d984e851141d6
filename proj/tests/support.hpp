// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dicl/dataset.hpp"
#include "dicl/llm.hpp"
#include "dicl/parse.hpp"

namespace dicl::testing {

namespace fs = std::filesystem;

inline const fs::path kDataDir = DICL_DEFAULT_DATA_DIR;
inline const fs::path kGoldenDir = DICL_GOLDEN_DIR;
inline const fs::path kFixture = kDataDir / "fixture_12.jsonl";

/// Fresh empty directory, removed when the object goes out of scope.
class TempDir {
public:
    explicit TempDir(const std::string& name) {
        path_ = fs::temp_directory_path() / ("dicl-" + name + "-" + std::to_string(::getpid()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

struct SyntheticSpec {
    std::size_t users = 888;
    std::size_t items = 3499;
    std::size_t sessions = 1145;
    std::size_t bundles = 1750;
    std::uint64_t seed = 1;
};

/// Dataset with exactly the requested counts. Every session holds one or two
/// ground-truth bundles of 2-4 items plus one unrelated item; a share of the
/// timestamps collide.
inline dataset::Dataset synthetic_dataset(const SyntheticSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    dataset::Dataset ds;
    for (std::size_t i = 0; i < spec.items; ++i) {
        const auto id = "i" + std::to_string(i);
        ds.catalog[id] = {id, "Product " + std::to_string(i) + " model " + std::to_string(rng() % 97), {}};
    }
    const std::size_t doubles = spec.bundles - spec.sessions;
    std::uniform_int_distribution<std::size_t> pick(0, spec.items - 1);
    std::uniform_int_distribution<int> bsize(2, 4);
    for (std::size_t s = 0; s < spec.sessions; ++s) {
        dataset::Session session;
        session.session_id = "s" + std::to_string(s);
        session.user_id = "u" + std::to_string(s % spec.users);
        session.timestamp = static_cast<std::int64_t>(1'600'000'000 + (rng() % 400) * 60);
        dataset::GroundTruth gt{session.session_id, {}};
        std::set<std::string> used;
        const auto fresh = [&] {
            for (;;) {
                auto id = "i" + std::to_string(pick(rng));
                if (used.insert(id).second) return id;
            }
        };
        const std::size_t n_bundles = s < doubles ? 2 : 1;
        for (std::size_t b = 0; b < n_bundles; ++b) {
            dataset::GroundTruthBundle bundle;
            for (int k = bsize(rng); k > 0; --k) {
                auto id = fresh();
                bundle.items.insert(id);
                session.item_ids.push_back(id);
            }
            bundle.intent = "intent " + std::to_string(rng() % 300);
            gt.bundles.push_back(std::move(bundle));
        }
        session.item_ids.push_back(fresh());
        std::shuffle(session.item_ids.begin(), session.item_ids.end(), rng);
        ds.ground_truth[session.session_id] = std::move(gt);
        ds.sessions.push_back(std::move(session));
    }
    return ds;
}

inline llm::MockRule rule(std::string tag, std::string response, std::optional<std::string> contains = std::nullopt,
                          std::optional<std::size_t> times = std::nullopt) {
    return {std::move(tag), std::move(contains), std::move(response), times};
}

inline const std::string kEqualRatings =
    "{'intent 1': ['Naturalness':3, 'Coverage':3, 'Motivation':2], "
    "'intent 2': ['Naturalness':3, 'Coverage':3, 'Motivation':2]}";
inline const std::string kLowerRatings =
    "{'intent 1': ['Naturalness':1, 'Coverage':1, 'Motivation':1], "
    "'intent 2': ['Naturalness':3, 'Coverage':3, 'Motivation':2]}";

/// Answers every bundle prompt with a single-product bundle and every intent
/// prompt with the same vague intent; raters always prefer the ground truth.
inline llm::MockScript never_repair_script() {
    llm::MockScript s;
    s.rules = {rule("*_bundles", "{'bundle 1': ['product 1']}"),
               rule("*bundle_feedback_round_*", "{'bundle 1': ['product 1']}"),
               rule("*_intents", "{'bundle 1': 'buy some things'}"),
               rule("*intent_feedback_round_*", "{'bundle 1': 'buy some things'}"),
               rule("*rules", "1. Products bought together form a bundle."),
               rule("*rate_intent", kLowerRatings)};
    return s;
}

inline std::vector<std::string> tags_of(const std::vector<nlohmann::json>& log, const std::string& role,
                                        const std::string& conversation) {
    std::vector<std::string> out;
    for (const auto& r : log) {
        if (r.at("role") == role && r.at("conversation") == conversation) out.push_back(r.at("tag").get<std::string>());
    }
    return out;
}

inline std::size_t count_prefix(const std::vector<std::string>& tags, const std::string& prefix) {
    std::size_t n = 0;
    for (const auto& t : tags) n += t.rfind(prefix, 0) == 0;
    return n;
}

}  // namespace dicl::testing
