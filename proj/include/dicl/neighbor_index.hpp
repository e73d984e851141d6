// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "dicl/embedding.hpp"

namespace dicl::retrieval {

struct Neighbor {
    dataset::SessionId session_id;
    double score = 0.0;

    bool operator==(const Neighbor&) const = default;
};

/// Cosine similarity accumulated in double; 0 when either side is a zero
/// vector. Throws DataError on dimension mismatch.
double cosine(std::span<const float> a, std::span<const float> b);

/// Ranking order used everywhere: higher score first, then session id.
bool ranks_before(const Neighbor& a, const Neighbor& b);

/// Exact cosine index over a fixed corpus. Build once, query from any
/// number of threads.
class NeighborIndex {
public:
    explicit NeighborIndex(const std::vector<SessionEmbedding>& corpus);

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }

    /// min(k, size()) best matches. Scoring runs as an OpenMP loop over the
    /// corpus.
    std::vector<Neighbor> top_k(std::span<const float> query, std::size_t k) const;

    /// One ranking per query; the OpenMP loop runs over queries instead.
    std::vector<std::vector<Neighbor>> top_k_batch(const std::vector<SessionEmbedding>& queries,
                                                   std::size_t k) const;

private:
    double score(std::span<const float> query, double query_norm, std::size_t row) const;
    std::vector<Neighbor> select(std::vector<Neighbor> scored, std::size_t k) const;

    std::size_t dim_ = 0;
    std::vector<dataset::SessionId> ids_;
    std::vector<float> data_;  // row-major, size() x dim()
    std::vector<double> norms_;
};

std::vector<Neighbor> top_k_neighbors(const SessionEmbedding& query, const std::vector<SessionEmbedding>& corpus,
                                      std::size_t k);

namespace reference {

/// Serial scoring plus a full sort. Kept for tests and benchmarks.
std::vector<Neighbor> top_k_neighbors(const SessionEmbedding& query, const std::vector<SessionEmbedding>& corpus,
                                      std::size_t k);

}  // namespace reference

}  // namespace dicl::retrieval
