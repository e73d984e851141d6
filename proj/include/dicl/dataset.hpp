// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace dicl::dataset {

using ItemId = std::string;
using SessionId = std::string;
using ItemSet = std::set<ItemId>;

struct Item {
    ItemId item_id;
    std::string raw_title;
    /// Processed title tokens; filled in by the retrieval stage.
    std::vector<std::string> description;

    bool operator==(const Item&) const = default;
};

struct Session {
    SessionId session_id;
    std::string user_id;
    std::int64_t timestamp = 0;
    std::vector<ItemId> item_ids;

    bool operator==(const Session&) const = default;
};

struct GroundTruthBundle {
    ItemSet items;
    std::string intent;

    bool operator==(const GroundTruthBundle&) const = default;
};

struct GroundTruth {
    SessionId session_id;
    std::vector<GroundTruthBundle> bundles;

    bool operator==(const GroundTruth&) const = default;
};

using Catalog = std::map<ItemId, Item>;
using GroundTruthMap = std::map<SessionId, GroundTruth>;

struct Dataset {
    std::vector<Session> sessions;
    Catalog catalog;
    GroundTruthMap ground_truth;

    const GroundTruth* find_ground_truth(const SessionId& id) const;
    bool operator==(const Dataset&) const = default;
};

struct SplitDataset {
    std::vector<Session> train;
    std::vector<Session> validation;
    std::vector<Session> test;
    Catalog catalog;
    GroundTruthMap ground_truth;
};

struct DatasetStats {
    std::size_t users = 0;
    std::size_t items = 0;
    std::size_t sessions = 0;
    std::size_t bundles = 0;
    std::size_t distinct_intents = 0;
    std::size_t interactions = 0;
    double average_bundle_size = 0.0;
};

using SplitRatios = std::array<double, 3>;
inline constexpr SplitRatios kDefaultSplitRatios{0.7, 0.1, 0.2};

/// Reads the line-delimited dataset format (see docs/formats.md). Throws
/// DataError with the offending line number on malformed records, dangling
/// item references, duplicate ids, or ground-truth bundles of size < 2.
Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::istream& in, const std::string& source_name = "<stream>");

/// Writes the canonical form: item records sorted by id, then sessions in
/// dataset order.
void write_dataset(const Dataset& ds, std::ostream& out);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

DatasetStats compute_stats(const Dataset& ds);

/// Sizes of (train, validation, test) for `n` sessions: floors for the first
/// two, remainder to test.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

/// Sorts by (timestamp, session_id) and cuts according to split_sizes.
SplitDataset chronological_split(const Dataset& ds, const SplitRatios& ratios = kDefaultSplitRatios);

}  // namespace dicl::dataset
