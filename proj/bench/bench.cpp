// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference kernels against the OpenMP ones.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "dicl/eval.hpp"
#include "dicl/neighbor_index.hpp"

using namespace dicl;
using Clock = std::chrono::steady_clock;

namespace {

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
    const auto start = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count() / reps;
}

std::vector<retrieval::SessionEmbedding> random_vectors(std::size_t n, std::size_t dim, std::mt19937_64& rng,
                                                        const std::string& prefix) {
    std::normal_distribution<float> dist;
    std::vector<retrieval::SessionEmbedding> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].session_id = prefix + std::to_string(i);
        out[i].vector.resize(dim);
        for (auto& x : out[i].vector) x = dist(rng);
    }
    return out;
}

std::vector<eval::SessionInput> random_sessions(std::size_t n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> item(0, 29), count(0, 6), size(1, 6);
    const auto bundle = [&] {
        eval::ItemSet s;
        const int m = size(rng);
        while (static_cast<int>(s.size()) < m) s.insert(std::to_string(item(rng)));
        return s;
    };
    std::vector<eval::SessionInput> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].session_id = "s" + std::to_string(i);
        for (int g = count(rng); g > 0; --g) out[i].ground_truth.push_back(bundle());
        for (int p = count(rng); p > 0; --p) out[i].predictions.push_back(bundle());
    }
    return out;
}

}  // namespace

int main() {
    std::mt19937_64 rng(7);
    std::printf("threads: %d\n", omp_get_max_threads());

    const auto corpus = random_vectors(20000, 384, rng, "c");
    const auto queries = random_vectors(50, 384, rng, "q");
    const retrieval::NeighborIndex index(corpus);
    bool same = true;
    const double serial_topk = time_ms(
        [&] {
            for (const auto& q : queries) same &= !retrieval::reference::top_k_neighbors(q, corpus, 10).empty();
        },
        1);
    const double omp_topk = time_ms([&] { same &= index.top_k_batch(queries, 10).size() == queries.size(); }, 1);
    for (const auto& q : queries) {
        same &= retrieval::reference::top_k_neighbors(q, corpus, 10) == index.top_k(q.vector, 10);
    }
    std::printf("top-k  corpus=%zu dim=384 queries=%zu k=10  serial %.2f ms  openmp %.2f ms  agree=%s\n",
                corpus.size(), queries.size(), serial_topk, omp_topk, same ? "yes" : "no");

    const auto sessions = random_sessions(50000, rng);
    eval::EvalReport a, b;
    const double serial_eval = time_ms([&] { a = eval::reference::evaluate(sessions); }, 3);
    const double omp_eval = time_ms([&] { b = eval::evaluate(sessions); }, 3);
    const bool eval_same = a.precision == b.precision && a.recall == b.recall && a.coverage == b.coverage;
    std::printf("eval   sessions=%zu  serial %.2f ms  openmp %.2f ms  agree=%s\n", sessions.size(), serial_eval,
                omp_eval, eval_same ? "yes" : "no");
    return same && eval_same ? 0 : 1;
}
