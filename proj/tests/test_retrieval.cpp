// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dicl/embedding.hpp"
#include "dicl/error.hpp"
#include "dicl/neighbor_index.hpp"
#include "dicl/text.hpp"
#include "support.hpp"

using namespace dicl;
using namespace dicl::retrieval;
using dicl::testing::TempDir;

TEST_CASE("preprocess_title") {
    const auto& sw = StopWords::english();
    // 179 listed words; "it's" and "its" coincide once the apostrophe is stripped.
    CHECK(sw.size() == 178);
    CHECK(preprocess_title("Galaxy Tab 3 & Case!", sw) == std::vector<std::string>{"galaxy", "tab", "3", "case"});
    CHECK(preprocess_title("", sw).empty());
    CHECK(preprocess_title("the of and", sw).empty());
    CHECK(preprocess_title("USB-C\tCable (6ft)", sw) == std::vector<std::string>{"usbc", "cable", "6ft"});
    CHECK(preprocess_title("Don't Stop", sw) == std::vector<std::string>{"stop"});
}

TEST_CASE("session_description concatenates item tokens in order") {
    dataset::Catalog cat;
    cat["i1"] = {"i1", "A B", {"a", "b"}};
    cat["i2"] = {"i2", "C", {"c"}};
    CHECK(session_description({"s", "u", 0, {"i1", "i2"}}, cat).text == "a b c");
    CHECK(session_description({"s", "u", 0, {"i2"}}, cat).text == "c");
    CHECK(session_description({"s", "u", 0, {"i2", "i1", "i2"}}, cat).text == "c a b c");
    CHECK_THROWS_AS(session_description({"s", "u", 0, {"zz"}}, cat), DataError);
}

TEST_CASE("hash embedder is deterministic and unit length") {
    HashEmbedder h;
    const auto a = h.embed_one("galaxy tab case");
    CHECK(a == h.embed_one("galaxy tab case"));
    CHECK(a.size() == 384);
    double n = 0;
    for (float x : a) n += double(x) * x;
    CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-6));
    const auto z = h.embed_one("");
    CHECK(z.size() == 384);
    CHECK(std::all_of(z.begin(), z.end(), [](float x) { return x == 0.0f; }));
}

TEST_CASE("embedding cache persists and survives a torn tail") {
    TempDir dir("embcache");
    const auto file = dir / "cache.bin";
    const Vector v{0.25f, -1.5f, 3.0f};
    {
        EmbeddingCache c(file);
        c.put("p", "text one", v);
        c.put("p", "text two", {1.0f, 2.0f, 3.0f});
        c.put("p", "text one", {9.0f, 9.0f, 9.0f});
        CHECK(c.size() == 2);
    }
    {
        std::ifstream in(file, std::ios::binary);
        char magic[8];
        in.read(magic, 8);
        CHECK(std::string(magic, 8) == "DICLEMB1");
    }
    const auto full = std::filesystem::file_size(file);
    {
        std::ofstream out(file, std::ios::binary | std::ios::app);
        out.write("\x01\x00\x00\x00p", 5);
    }
    EmbeddingCache reread(file);
    CHECK(reread.size() == 2);
    CHECK(reread.get("p", "text one") == v);
    CHECK_FALSE(reread.get("q", "text one").has_value());
    CHECK(full > 8);
}

namespace {

class FailingProvider final : public EmbeddingProvider {
public:
    std::string id() const override { return "failing"; }
    std::vector<Vector> embed(const std::vector<std::string>&) override {
        throw ProviderError("service down", true);
    }
};

class RaggedProvider final : public EmbeddingProvider {
public:
    std::string id() const override { return "ragged"; }
    std::vector<Vector> embed(const std::vector<std::string>& texts) override {
        std::vector<Vector> out;
        for (std::size_t i = 0; i < texts.size(); ++i) out.push_back(Vector(i + 1, 1.0f));
        return out;
    }
};

}  // namespace

TEST_CASE("embed_sessions uses the cache and the fallback") {
    std::vector<SessionDescription> descs{{"s1", "a b"}, {"s2", "c"}, {"s3", "a b"}};
    HashEmbedder hash(16);
    EmbeddingCache cache;
    EmbedStats stats;
    const auto first = embed_sessions(descs, hash, cache, nullptr, &stats);
    REQUIRE(first.size() == 3);
    CHECK(first[0].session_id == "s1");
    CHECK(first[0].vector == first[2].vector);
    CHECK(stats.provider_id == "hash-16");

    EmbedStats again;
    const auto second = embed_sessions(descs, hash, cache, nullptr, &again);
    CHECK(again.computed == 0);
    CHECK(second[1].vector == first[1].vector);

    FailingProvider failing;
    EmbeddingCache fresh;
    CHECK_THROWS_AS(embed_sessions(descs, failing, fresh), ProviderError);
    EmbedStats fb;
    const auto fallen = embed_sessions(descs, failing, fresh, &hash, &fb);
    CHECK(fb.used_fallback);
    CHECK(fallen[1].vector == first[1].vector);

    RaggedProvider ragged;
    EmbeddingCache c3;
    CHECK_THROWS_AS(embed_sessions(descs, ragged, c3), Error);
}

namespace {

/// Local stand-in for the embedding service.
class FakeEmbedService {
public:
    explicit FakeEmbedService(int fail_status = 0) : fail_status_(fail_status) {
        server_.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests;
            if (fail_status_ != 0) {
                res.status = fail_status_;
                res.set_content("{\"error\":\"not ready\"}", "application/json");
                return;
            }
            const auto body = nlohmann::json::parse(req.body);
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& t : body.at("texts")) {
                const auto s = t.get<std::string>();
                rows.push_back({static_cast<double>(s.size()), 1.0});
            }
            res.set_content(nlohmann::json{{"model", "fake"}, {"dim", 2}, {"embeddings", rows}}.dump(),
                            "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeEmbedService() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
    std::atomic<int> requests{0};

private:
    int fail_status_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST_CASE("remote embedder speaks the service protocol") {
    FakeEmbedService svc;
    RemoteEmbedder remote({svc.url(), std::chrono::milliseconds(5000), 2});
    const auto out = remote.embed({"a", "bbb", "cc"});
    REQUIRE(out.size() == 3);
    CHECK(out[0] == Vector{1.0f, 1.0f});
    CHECK(out[1] == Vector{3.0f, 1.0f});
    CHECK(out[2] == Vector{2.0f, 1.0f});
    CHECK(svc.requests == 2);
    CHECK(remote.id() == "remote:" + svc.url());
}

TEST_CASE("remote embedder failures are classified and fall back") {
    FakeEmbedService busy(503);
    RemoteEmbedder remote({busy.url(), std::chrono::milliseconds(5000), 256});
    try {
        remote.embed({"x"});
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.transient());
    }
    FakeEmbedService bad(400);
    try {
        RemoteEmbedder({bad.url(), std::chrono::milliseconds(5000), 256}).embed({"x"});
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK_FALSE(e.transient());
    }
    HashEmbedder hash;
    EmbeddingCache cache;
    EmbedStats stats;
    const auto v = embed_sessions({{"s", "a b"}}, remote, cache, &hash, &stats);
    CHECK(stats.used_fallback);
    CHECK(v[0].vector == hash.embed_one("a b"));

    RemoteEmbedder nowhere({"http://127.0.0.1:1", std::chrono::milliseconds(500), 256});
    try {
        nowhere.embed({"x"});
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.transient());
    }
}

TEST_CASE("cosine properties") {
    const std::vector<float> a{1, 2, 3}, b{-2, 0.5f, 4}, zero{0, 0, 0};
    CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(cosine(a, b) - cosine(b, a)) < 1e-12);
    CHECK(cosine(a, zero) == 0.0);
    CHECK(cosine(std::vector<float>{1, 0}, std::vector<float>{0, 1}) == 0.0);
    CHECK_THROWS(cosine(a, std::vector<float>{1, 2}));
}

namespace {

std::vector<SessionEmbedding> random_corpus(std::size_t n, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> d;
    std::vector<SessionEmbedding> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].session_id = "s" + std::to_string(1000 + i);
        out[i].vector.resize(dim);
        for (auto& x : out[i].vector) x = d(rng);
    }
    return out;
}

}  // namespace

TEST_CASE("top_k matches the serial reference and is permutation stable") {
    auto corpus = random_corpus(300, 16, 3);
    const auto queries = random_corpus(10, 16, 4);
    NeighborIndex index(corpus);
    for (const auto& q : queries) {
        for (std::size_t k : {1, 7, 300, 500}) {
            const auto got = index.top_k(q.vector, k);
            CHECK(got.size() == std::min<std::size_t>(k, 300));
            CHECK(got == reference::top_k_neighbors(q, corpus, k));
        }
    }
    const auto before = index.top_k(queries[0].vector, 20);
    std::mt19937_64 rng(9);
    std::shuffle(corpus.begin(), corpus.end(), rng);
    CHECK(NeighborIndex(corpus).top_k(queries[0].vector, 20) == before);

    const auto batch = index.top_k_batch(queries, 5);
    for (std::size_t i = 0; i < queries.size(); ++i) CHECK(batch[i] == index.top_k(queries[i].vector, 5));
}

TEST_CASE("ties break by session id and identical vectors score one") {
    std::vector<SessionEmbedding> corpus{{"b", {1, 0}}, {"a", {2, 0}}, {"c", {0, 1}}, {"z", {0, 0}}};
    const auto got = top_k_neighbors({"q", {1, 0}}, corpus, 4);
    REQUIRE(got.size() == 4);
    CHECK(got[0].session_id == "a");
    CHECK(got[1].session_id == "b");
    CHECK(got[0].score == doctest::Approx(1.0));
    CHECK(got[2].session_id == "c");
    CHECK(got[3].session_id == "z");
    CHECK(got[3].score == 0.0);
    CHECK_THROWS(top_k_neighbors({"q", {1, 0, 0}}, corpus, 1));
}
