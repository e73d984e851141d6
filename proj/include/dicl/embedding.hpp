// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dicl/hash.hpp"
#include "dicl/text.hpp"

namespace dicl::retrieval {

using Vector = std::vector<float>;

struct SessionEmbedding {
    dataset::SessionId session_id;
    Vector vector;

    std::size_t dim() const { return vector.size(); }
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    /// Stable identifier; part of the cache key.
    virtual std::string id() const = 0;
    /// One vector per text, in input order. Throws ProviderError.
    virtual std::vector<Vector> embed(const std::vector<std::string>& texts) = 0;
};

/// Feature-hashes whitespace tokens into a fixed number of buckets, then
/// L2-normalizes. Empty text maps to the zero vector.
class HashEmbedder final : public EmbeddingProvider {
public:
    static constexpr std::size_t kDefaultDim = 384;

    explicit HashEmbedder(std::size_t dim = kDefaultDim);
    std::string id() const override;
    std::vector<Vector> embed(const std::vector<std::string>& texts) override;
    Vector embed_one(const std::string& text) const;

private:
    std::size_t dim_;
};

struct RemoteEmbedderConfig {
    std::string base_url = "http://127.0.0.1:8080";
    std::chrono::milliseconds timeout{30000};
    std::size_t max_batch = 256;
};

/// Client for the embedding microservice: POST /embed {"texts": [...]},
/// response {"model", "dim", "embeddings"}.
class RemoteEmbedder final : public EmbeddingProvider {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig config);
    std::string id() const override;
    std::vector<Vector> embed(const std::vector<std::string>& texts) override;

private:
    std::vector<Vector> embed_batch(const std::vector<std::string>& texts);
    RemoteEmbedderConfig config_;
};

/// Append-only on-disk cache keyed by (provider id, SHA-256 of text).
/// Layout is documented in docs/formats.md. Safe for concurrent use.
class EmbeddingCache {
public:
    EmbeddingCache() = default;  // memory only
    explicit EmbeddingCache(std::filesystem::path file);

    std::optional<Vector> get(const std::string& provider_id, const std::string& text) const;
    void put(const std::string& provider_id, const std::string& text, const Vector& vec);
    std::size_t size() const;

private:
    using Key = std::pair<std::string, Sha256Digest>;
    void load();
    void append(const std::string& provider_id, const Sha256Digest& digest, const Vector& vec);

    std::optional<std::filesystem::path> file_;
    mutable std::mutex mu_;
    std::map<Key, Vector> entries_;
};

struct EmbedStats {
    std::size_t cache_hits = 0;
    std::size_t computed = 0;
    std::string provider_id;
    bool used_fallback = false;
};

/// Embeds session descriptions through the cache. On a provider failure the
/// whole batch is redone with `fallback` when one is given; otherwise the
/// ProviderError propagates. Throws DataError on dimension mismatch or
/// non-finite components.
std::vector<SessionEmbedding> embed_sessions(const std::vector<SessionDescription>& descriptions,
                                             EmbeddingProvider& provider, EmbeddingCache& cache,
                                             EmbeddingProvider* fallback = nullptr,
                                             EmbedStats* stats = nullptr);

}  // namespace dicl::retrieval
