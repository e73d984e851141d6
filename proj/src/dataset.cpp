// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "dicl/error.hpp"

namespace dicl::dataset {

using nlohmann::json;

const GroundTruth* Dataset::find_ground_truth(const SessionId& id) const {
    auto it = ground_truth.find(id);
    return it == ground_truth.end() ? nullptr : &it->second;
}

namespace {

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line) + ": ";
}

std::string require_string(const json& rec, const char* key, const std::string& loc) {
    auto it = rec.find(key);
    if (it == rec.end() || !it->is_string()) {
        throw DataError(loc + "missing or non-string field '" + key + "'");
    }
    return it->get<std::string>();
}

// Session ids and item ids may be given as JSON numbers in converted data.
std::string require_id(const json& v, const std::string& what, const std::string& loc) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    throw DataError(loc + what + " must be a string or integer");
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& source_name) {
    Dataset ds;
    std::unordered_set<SessionId> seen_sessions;
    std::vector<std::size_t> session_lines;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto loc = where(source_name, lineno);

        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(loc + "malformed record: " + e.what());
        }
        if (!rec.is_object()) throw DataError(loc + "malformed record: expected an object");

        const auto kind = require_string(rec, "type", loc);
        if (kind == "item") {
            Item item;
            item.item_id = require_id(rec.value("item_id", json{}), "item_id", loc);
            item.raw_title = require_string(rec, "title", loc);
            if (item.raw_title.empty()) throw DataError(loc + "empty title for item '" + item.item_id + "'");
            if (ds.catalog.contains(item.item_id)) {
                throw DataError(loc + "duplicate item_id '" + item.item_id + "'");
            }
            ds.catalog.emplace(item.item_id, std::move(item));
        } else if (kind == "session") {
            Session s;
            s.session_id = require_id(rec.value("session_id", json{}), "session_id", loc);
            s.user_id = require_id(rec.value("user_id", json{}), "user_id", loc);
            const auto ts = rec.find("timestamp");
            if (ts == rec.end() || !ts->is_number_integer()) {
                throw DataError(loc + "session '" + s.session_id + "' lacks an integer timestamp");
            }
            s.timestamp = ts->get<std::int64_t>();
            const auto items = rec.find("items");
            if (items == rec.end() || !items->is_array() || items->empty()) {
                throw DataError(loc + "session '" + s.session_id + "' needs a non-empty 'items' array");
            }
            for (const auto& v : *items) s.item_ids.push_back(require_id(v, "item reference", loc));
            if (!seen_sessions.insert(s.session_id).second) {
                throw DataError(loc + "duplicate session_id '" + s.session_id + "'");
            }

            const auto bundles = rec.find("bundles");
            if (bundles != rec.end() && !bundles->is_null()) {
                if (!bundles->is_array()) throw DataError(loc + "'bundles' must be an array");
                GroundTruth gt{s.session_id, {}};
                const std::set<ItemId> members(s.item_ids.begin(), s.item_ids.end());
                for (const auto& b : *bundles) {
                    if (!b.is_object() || !b.contains("items") || !b["items"].is_array()) {
                        throw DataError(loc + "bundle entries need an 'items' array");
                    }
                    GroundTruthBundle gb;
                    for (const auto& v : b["items"]) gb.items.insert(require_id(v, "bundle item", loc));
                    if (gb.items.size() < 2) {
                        throw DataError(loc + "ground-truth bundle of size " + std::to_string(gb.items.size()) +
                                        " in session '" + s.session_id + "' (need >= 2)");
                    }
                    for (const auto& id : gb.items) {
                        if (!members.contains(id)) {
                            throw DataError(loc + "bundle item '" + id + "' is not part of session '" +
                                            s.session_id + "'");
                        }
                    }
                    gb.intent = require_string(b, "intent", loc);
                    if (gb.intent.find_first_not_of(" \t\r\n") == std::string::npos) {
                        throw DataError(loc + "empty intent in session '" + s.session_id + "'");
                    }
                    gt.bundles.push_back(std::move(gb));
                }
                if (!gt.bundles.empty()) ds.ground_truth.emplace(s.session_id, std::move(gt));
            }
            ds.sessions.push_back(std::move(s));
            session_lines.push_back(lineno);
        } else {
            throw DataError(loc + "unknown record type '" + kind + "'");
        }
    }

    for (std::size_t i = 0; i < ds.sessions.size(); ++i) {
        for (const auto& id : ds.sessions[i].item_ids) {
            if (!ds.catalog.contains(id)) {
                throw DataError(where(source_name, session_lines[i]) + "dangling item reference '" + id +
                                "' in session '" + ds.sessions[i].session_id + "'");
            }
        }
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file " + path.string());
    return parse_dataset(in, path.string());
}

void write_dataset(const Dataset& ds, std::ostream& out) {
    for (const auto& [id, item] : ds.catalog) {
        json rec{{"type", "item"}, {"item_id", id}, {"title", item.raw_title}};
        out << rec.dump() << '\n';
    }
    for (const auto& s : ds.sessions) {
        json rec{{"type", "session"},
                 {"session_id", s.session_id},
                 {"user_id", s.user_id},
                 {"timestamp", s.timestamp},
                 {"items", s.item_ids}};
        if (const auto* gt = ds.find_ground_truth(s.session_id)) {
            json bundles = json::array();
            for (const auto& b : gt->bundles) {
                bundles.push_back({{"items", std::vector<ItemId>(b.items.begin(), b.items.end())},
                                   {"intent", b.intent}});
            }
            rec["bundles"] = std::move(bundles);
        }
        out << rec.dump() << '\n';
    }
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write dataset file " + path.string());
    write_dataset(ds, out);
}

DatasetStats compute_stats(const Dataset& ds) {
    DatasetStats st;
    std::set<std::string> users;
    std::set<std::string> intents;
    std::size_t bundle_items = 0;
    for (const auto& s : ds.sessions) {
        users.insert(s.user_id);
        st.interactions += s.item_ids.size();
    }
    for (const auto& [_, gt] : ds.ground_truth) {
        for (const auto& b : gt.bundles) {
            ++st.bundles;
            bundle_items += b.items.size();
            intents.insert(b.intent);
        }
    }
    st.users = users.size();
    st.items = ds.catalog.size();
    st.sessions = ds.sessions.size();
    st.distinct_intents = intents.size();
    st.average_bundle_size = st.bundles == 0 ? 0.0 : static_cast<double>(bundle_items) / st.bundles;
    return st;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
    double sum = 0.0;
    for (double r : ratios) {
        if (!(r > 0.0)) throw UsageError("split ratios must be positive");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw UsageError("split ratios must sum to 1");
    if (n < 3) throw DataError("chronological split needs at least 3 sessions, got " + std::to_string(n));

    const auto cut = [n](double r) {
        return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
    };
    const std::size_t train = cut(ratios[0]);
    const std::size_t val = cut(ratios[1]);
    return {train, val, n - train - val};
}

SplitDataset chronological_split(const Dataset& ds, const SplitRatios& ratios) {
    const auto sizes = split_sizes(ds.sessions.size(), ratios);

    std::vector<Session> ordered = ds.sessions;
    std::sort(ordered.begin(), ordered.end(), [](const Session& a, const Session& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.session_id < b.session_id;
    });

    SplitDataset out;
    const auto first = ordered.begin();
    out.train.assign(first, first + static_cast<std::ptrdiff_t>(sizes[0]));
    out.validation.assign(first + static_cast<std::ptrdiff_t>(sizes[0]),
                          first + static_cast<std::ptrdiff_t>(sizes[0] + sizes[1]));
    out.test.assign(first + static_cast<std::ptrdiff_t>(sizes[0] + sizes[1]), ordered.end());
    out.catalog = ds.catalog;
    out.ground_truth = ds.ground_truth;
    return out;
}

}  // namespace dicl::dataset
