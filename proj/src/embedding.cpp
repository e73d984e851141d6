// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "dicl/error.hpp"
#include "http_util.hpp"

namespace dicl::retrieval {

using nlohmann::json;

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw UsageError("hash embedder dimension must be positive");
}

std::string HashEmbedder::id() const { return "hash-" + std::to_string(dim_); }

Vector HashEmbedder::embed_one(const std::string& text) const {
    std::vector<double> acc(dim_, 0.0);
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) acc[fnv1a64(tok) % dim_] += 1.0;

    double norm = 0.0;
    for (double v : acc) norm += v * v;
    norm = std::sqrt(norm);
    Vector out(dim_, 0.0f);
    if (norm > 0.0) {
        for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(acc[i] / norm);
    }
    return out;
}

std::vector<Vector> HashEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
    if (config_.max_batch == 0) config_.max_batch = 1;
}

std::string RemoteEmbedder::id() const { return "remote:" + config_.base_url; }

std::vector<Vector> RemoteEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += config_.max_batch) {
        const auto end = std::min(texts.size(), start + config_.max_batch);
        auto part = embed_batch({texts.begin() + static_cast<std::ptrdiff_t>(start),
                                 texts.begin() + static_cast<std::ptrdiff_t>(end)});
        for (auto& v : part) out.push_back(std::move(v));
    }
    return out;
}

std::vector<Vector> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) {
    const auto url = detail::split_url(config_.base_url);
    httplib::Client client(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    const json body{{"texts", texts}};
    auto res = client.Post(url.path_prefix + "/embed", body.dump(), "application/json");
    if (!res) {
        throw ProviderError("embedding service unreachable at " + config_.base_url + ": " +
                                httplib::to_string(res.error()),
                            true);
    }
    if (res->status != 200) {
        throw ProviderError("embedding service returned HTTP " + std::to_string(res->status) + ": " + res->body,
                            detail::is_transient_status(res->status));
    }

    json reply;
    try {
        reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw ProviderError(std::string("embedding service sent invalid JSON: ") + e.what(), false);
    }
    if (!reply.contains("embeddings") || !reply["embeddings"].is_array()) {
        throw ProviderError("embedding response lacks an 'embeddings' array", false);
    }
    const auto& rows = reply["embeddings"];
    if (rows.size() != texts.size()) {
        throw ProviderError("embedding response has " + std::to_string(rows.size()) + " vectors for " +
                                std::to_string(texts.size()) + " texts",
                            false);
    }
    std::vector<Vector> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (!row.is_array()) throw ProviderError("embedding row is not an array", false);
        out.push_back(row.get<Vector>());
    }
    return out;
}

// ---- cache ------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'D', 'I', 'C', 'L', 'E', 'M', 'B', '1'};

static_assert(sizeof(float) == 4);

template <typename T>
T byteswap_if_big(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
    v = byteswap_if_big(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool read_le(std::istream& in, T& v) {
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) return false;
    v = byteswap_if_big(v);
    return true;
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path file) : file_(std::move(file)) { load(); }

void EmbeddingCache::load() {
    if (!file_ || !std::filesystem::exists(*file_)) return;
    std::ifstream in(*file_, std::ios::binary);
    if (!in) throw DataError("cannot read embedding cache " + file_->string());
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic)) return;  // empty file
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw DataError("not an embedding cache file: " + file_->string());
    }
    // A torn final record (interrupted append) ends the scan.
    for (;;) {
        std::uint32_t id_len = 0;
        if (!read_le(in, id_len) || id_len > (1u << 16)) break;
        std::string provider(id_len, '\0');
        if (!in.read(provider.data(), id_len)) break;
        Sha256Digest digest{};
        if (!in.read(reinterpret_cast<char*>(digest.data()), digest.size())) break;
        std::uint32_t dim = 0;
        if (!read_le(in, dim) || dim > (1u << 20)) break;
        Vector vec(dim);
        bool ok = true;
        for (auto& x : vec) {
            if (!read_le(in, x)) {
                ok = false;
                break;
            }
        }
        if (!ok) break;
        entries_.insert_or_assign(Key{std::move(provider), digest}, std::move(vec));
    }
}

std::optional<Vector> EmbeddingCache::get(const std::string& provider_id, const std::string& text) const {
    const Key key{provider_id, sha256(text)};
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::put(const std::string& provider_id, const std::string& text, const Vector& vec) {
    Key key{provider_id, sha256(text)};
    std::lock_guard lock(mu_);
    if (entries_.contains(key)) return;
    append(key.first, key.second, vec);
    entries_.emplace(std::move(key), vec);
}

void EmbeddingCache::append(const std::string& provider_id, const Sha256Digest& digest, const Vector& vec) {
    if (!file_) return;
    const bool fresh = !std::filesystem::exists(*file_) || std::filesystem::file_size(*file_) == 0;
    std::ofstream out(*file_, std::ios::binary | std::ios::app);
    if (!out) throw DataError("cannot append to embedding cache " + file_->string());
    if (fresh) out.write(kMagic, sizeof kMagic);
    write_le(out, static_cast<std::uint32_t>(provider_id.size()));
    out.write(provider_id.data(), static_cast<std::streamsize>(provider_id.size()));
    out.write(reinterpret_cast<const char*>(digest.data()), digest.size());
    write_le(out, static_cast<std::uint32_t>(vec.size()));
    for (float x : vec) write_le(out, x);
}

std::size_t EmbeddingCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

// ---- batch embedding ----------------------------------------------------------

namespace {

std::vector<SessionEmbedding> embed_with(const std::vector<SessionDescription>& descriptions,
                                         EmbeddingProvider& provider, EmbeddingCache& cache, EmbedStats& stats) {
    const auto pid = provider.id();
    std::vector<SessionEmbedding> out(descriptions.size());
    std::vector<std::size_t> missing;
    std::vector<std::string> missing_texts;
    for (std::size_t i = 0; i < descriptions.size(); ++i) {
        out[i].session_id = descriptions[i].session_id;
        if (auto hit = cache.get(pid, descriptions[i].text)) {
            out[i].vector = std::move(*hit);
            ++stats.cache_hits;
        } else {
            missing.push_back(i);
            missing_texts.push_back(descriptions[i].text);
        }
    }
    if (!missing.empty()) {
        auto vecs = provider.embed(missing_texts);
        if (vecs.size() != missing.size()) {
            throw ProviderError(pid + " returned " + std::to_string(vecs.size()) + " vectors for " +
                                    std::to_string(missing.size()) + " texts",
                                false);
        }
        for (std::size_t j = 0; j < missing.size(); ++j) {
            for (float x : vecs[j]) {
                if (!std::isfinite(x)) throw DataError(pid + " produced a non-finite embedding component");
            }
            cache.put(pid, missing_texts[j], vecs[j]);
            out[missing[j]].vector = std::move(vecs[j]);
        }
        stats.computed += missing.size();
    }
    if (!out.empty()) {
        const auto dim = out.front().dim();
        if (dim == 0) throw DataError(pid + " produced zero-dimensional embeddings");
        for (const auto& e : out) {
            if (e.dim() != dim) {
                throw DataError("embedding dimension mismatch: " + std::to_string(e.dim()) + " vs " +
                                std::to_string(dim) + " for session '" + e.session_id + "'");
            }
        }
    }
    stats.provider_id = pid;
    return out;
}

}  // namespace

std::vector<SessionEmbedding> embed_sessions(const std::vector<SessionDescription>& descriptions,
                                             EmbeddingProvider& provider, EmbeddingCache& cache,
                                             EmbeddingProvider* fallback, EmbedStats* stats) {
    EmbedStats local;
    try {
        auto out = embed_with(descriptions, provider, cache, local);
        if (stats) *stats = local;
        return out;
    } catch (const ProviderError&) {
        if (!fallback) throw;
    }
    EmbedStats fb;
    fb.used_fallback = true;
    auto out = embed_with(descriptions, *fallback, cache, fb);
    if (stats) *stats = fb;
    return out;
}

}  // namespace dicl::retrieval
