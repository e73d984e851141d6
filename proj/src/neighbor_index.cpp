// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/neighbor_index.hpp"

#include <algorithm>
#include <cmath>

#include "dicl/error.hpp"

namespace dicl::retrieval {

namespace {

double norm_of(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

double dot(std::span<const float> a, const float* b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

// Shared by the index, the one-shot API and the serial reference.
double cosine_from(double dot_product, double na, double nb) {
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot_product / (na * nb);
}

void check_dim(std::size_t expected, std::size_t got) {
    if (expected != got) {
        throw DataError("embedding dimension mismatch: expected " + std::to_string(expected) + ", got " +
                        std::to_string(got));
    }
}

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) {
    check_dim(a.size(), b.size());
    return cosine_from(dot(a, b.data()), norm_of(a), norm_of(b));
}

bool ranks_before(const Neighbor& a, const Neighbor& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.session_id < b.session_id;
}

NeighborIndex::NeighborIndex(const std::vector<SessionEmbedding>& corpus) {
    if (corpus.empty()) throw DataError("neighbor index needs a non-empty corpus");
    dim_ = corpus.front().dim();
    ids_.reserve(corpus.size());
    data_.reserve(corpus.size() * dim_);
    norms_.reserve(corpus.size());
    for (const auto& e : corpus) {
        check_dim(dim_, e.dim());
        ids_.push_back(e.session_id);
        data_.insert(data_.end(), e.vector.begin(), e.vector.end());
        norms_.push_back(norm_of(e.vector));
    }
}

double NeighborIndex::score(std::span<const float> query, double query_norm, std::size_t row) const {
    return cosine_from(dot(query, data_.data() + row * dim_), query_norm, norms_[row]);
}

std::vector<Neighbor> NeighborIndex::select(std::vector<Neighbor> scored, std::size_t k) const {
    const auto take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                      ranks_before);
    scored.resize(take);
    return scored;
}

std::vector<Neighbor> NeighborIndex::top_k(std::span<const float> query, std::size_t k) const {
    check_dim(dim_, query.size());
    const double qn = norm_of(query);
    const auto n = static_cast<std::ptrdiff_t>(ids_.size());
    std::vector<Neighbor> scored(ids_.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        scored[row] = Neighbor{ids_[row], score(query, qn, row)};
    }
    return select(std::move(scored), k);
}

std::vector<std::vector<Neighbor>> NeighborIndex::top_k_batch(const std::vector<SessionEmbedding>& queries,
                                                              std::size_t k) const {
    for (const auto& q : queries) check_dim(dim_, q.dim());
    std::vector<std::vector<Neighbor>> out(queries.size());
    const auto nq = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t qi = 0; qi < nq; ++qi) {
        const auto& q = queries[static_cast<std::size_t>(qi)].vector;
        const double qn = norm_of(q);
        std::vector<Neighbor> scored(ids_.size());
        for (std::size_t row = 0; row < ids_.size(); ++row) scored[row] = Neighbor{ids_[row], score(q, qn, row)};
        out[static_cast<std::size_t>(qi)] = select(std::move(scored), k);
    }
    return out;
}

std::vector<Neighbor> top_k_neighbors(const SessionEmbedding& query, const std::vector<SessionEmbedding>& corpus,
                                      std::size_t k) {
    return NeighborIndex(corpus).top_k(query.vector, k);
}

namespace reference {

std::vector<Neighbor> top_k_neighbors(const SessionEmbedding& query, const std::vector<SessionEmbedding>& corpus,
                                      std::size_t k) {
    if (corpus.empty()) throw DataError("neighbor search needs a non-empty corpus");
    const double qn = norm_of(query.vector);
    std::vector<Neighbor> all;
    all.reserve(corpus.size());
    for (const auto& e : corpus) {
        check_dim(query.dim(), e.dim());
        all.push_back({e.session_id, cosine_from(dot(query.vector, e.vector.data()), qn, norm_of(e.vector))});
    }
    std::sort(all.begin(), all.end(), ranks_before);
    all.resize(std::min(k, all.size()));
    return all;
}

}  // namespace reference

}  // namespace dicl::retrieval
