// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dicl/dataset.hpp"
#include "dicl/infer.hpp"

namespace dicl::eval {

/// One domain's inference results with the data needed to blind them.
struct HumanEvalDomain {
    std::string name;
    const dataset::Catalog* catalog = nullptr;
    const dataset::GroundTruthMap* ground_truth = nullptr;
    std::vector<infer::SessionResult> results;
};

struct HumanEvalSample {
    std::string record_id;
    std::string domain;
    dataset::SessionId session_id;
    std::string bundle_label;
    std::vector<std::string> titles;
    std::string generated_intent;
    std::string annotated_intent;
};

/// Hit bundles that carry a generated intent, in result order.
std::vector<HumanEvalSample> human_eval_candidates(const HumanEvalDomain& domain);

/// Uniform seeded sample of `n_per_domain` candidates per domain. Throws
/// DataError naming the deficit when a domain has fewer.
std::vector<HumanEvalSample> sample_human_eval(const std::vector<HumanEvalDomain>& domains, std::size_t n_per_domain,
                                               std::uint64_t seed);

/// Writes rater_<i>.tsv for each rater, each with its own record and
/// candidate order, plus answer_key.tsv. Returns the files written.
std::vector<std::filesystem::path> write_human_eval(const std::vector<HumanEvalSample>& samples, std::size_t raters,
                                                    std::uint64_t seed, const std::filesystem::path& out_dir);

/// Fisher-Yates with rejection-sampled indices, portable across standard
/// libraries.
template <typename T, typename Rng>
void seeded_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::uint64_t bound = i;
        const std::uint64_t limit = Rng::max() - (Rng::max() % bound);
        std::uint64_t x;
        do {
            x = rng();
        } while (x >= limit);
        std::swap(v[i - 1], v[x % bound]);
    }
}

}  // namespace dicl::eval
