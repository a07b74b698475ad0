#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edckit/embedding.hpp"
#include "edckit/error.hpp"
#include "edckit/kernels.hpp"
#include "edckit/util.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <sstream>
#include <thread>

using namespace edckit;

namespace {

ProviderConfig mock_config(const std::string& extra_args = "",
                           std::chrono::milliseconds timeout = std::chrono::milliseconds(20000),
                           std::optional<std::size_t> expected_dim = std::nullopt) {
    ProviderConfig config;
    config.provider_id = "mock" + extra_args;
    config.transport = Transport::child_process;
    config.endpoint = std::string(MOCK_PROVIDER_PATH) + " --dim 16 " + extra_args;
    config.timeout = timeout;
    config.expected_dim = expected_dim;
    return config;
}

std::string fresh_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p.string();
}

} // namespace

TEST_CASE("hash embedder is deterministic with fixed dim") {
    HashEmbedder embedder(32);
    auto a = embedder.embed({"one two", "three"}, InputKind::text);
    auto b = embedder.embed({"one two", "three"}, InputKind::text);
    REQUIRE(a.size() == 2);
    CHECK(a[0].size() == 32);
    CHECK(a == b);
    CHECK(a[0] == kernels::hash_embed("one two", 32));
    CHECK_THROWS_AS(embedder.embed({}, InputKind::text), Error);
}

TEST_CASE("digest separates providers, kinds, and texts") {
    std::string base = embedding_digest("p1", InputKind::text, "abc");
    CHECK(base != embedding_digest("p2", InputKind::text, "abc"));
    CHECK(base != embedding_digest("p1", InputKind::binary_hex, "abc"));
    CHECK(base != embedding_digest("p1", InputKind::text, "abd"));
    CHECK(base == embedding_digest("p1", InputKind::text, "abc"));
    CHECK(base.size() == 64);
}

TEST_CASE("vector cache round trips through the dim-header format") {
    VectorCache cache(fresh_dir("edckit_cache_rt"));
    EmbeddingVector v{1.5, -2.25, 3.0};
    cache.put("aaaa", v);
    auto back = cache.get("aaaa");
    REQUIRE(back.has_value());
    CHECK(*back == v);
    CHECK_FALSE(cache.get("bbbb").has_value());
}

TEST_CASE("child-process provider answers out of order and in order arrive the same") {
    RemoteEmbedder embedder(mock_config());
    std::vector<std::string> texts = {"alpha beta", "gamma", "alpha beta", "delta"};
    auto vecs = embedder.embed(texts, InputKind::text);
    REQUIRE(vecs.size() == 4);
    for (const auto& v : vecs) CHECK(v.size() == 16);
    CHECK(vecs[0] == vecs[2]); // repeated text, one shared answer
}

TEST_CASE("repeated texts in one batch reach the provider once") {
    // --salt-order makes each wire response distinct, so a duplicated
    // request would produce unequal vectors
    RemoteEmbedder embedder(mock_config("--salt-order"));
    auto vecs = embedder.embed({"same text", "same text", "same text"}, InputKind::text);
    CHECK(vecs[0] == vecs[1]);
    CHECK(vecs[1] == vecs[2]);
}

TEST_CASE("memory cache stops repeat spawns, disk cache survives new instances") {
    std::string dir = fresh_dir("edckit_cache_disk");
    std::string counter = dir + "/count.txt";
    ProviderConfig config = mock_config("--count-file " + counter);

    {
        RemoteEmbedder embedder(config, dir);
        embedder.embed({"payload"}, InputKind::text);
        embedder.embed({"payload"}, InputKind::text); // memory hit
        CHECK(trim(read_file(counter)) == "1");
    }
    {
        RemoteEmbedder embedder(config, dir); // fresh instance, disk hit
        embedder.embed({"payload"}, InputKind::text);
        CHECK(trim(read_file(counter)) == "1");
    }
    {
        RemoteEmbedder embedder(config); // no disk cache: spawns again
        embedder.embed({"payload"}, InputKind::text);
        CHECK(trim(read_file(counter)) == "2");
    }
}

TEST_CASE("provider error paths") {
    SUBCASE("dimension mismatch across responses") {
        RemoteEmbedder embedder(mock_config("--wrong-dim"));
        CHECK_THROWS_WITH_AS(embedder.embed({"a", "b"}, InputKind::text),
                             doctest::Contains("dimension mismatch"), Error);
    }
    SUBCASE("expected_dim enforced") {
        RemoteEmbedder embedder(mock_config("", std::chrono::milliseconds(20000), 17));
        CHECK_THROWS_WITH_AS(embedder.embed({"a"}, InputKind::text),
                             doctest::Contains("dimension mismatch"), Error);
    }
    SUBCASE("unanswered request") {
        RemoteEmbedder embedder(mock_config("--drop-last"));
        CHECK_THROWS_WITH_AS(embedder.embed({"a", "b", "c"}, InputKind::text),
                             doctest::Contains("unanswered"), Error);
    }
    SUBCASE("duplicate answer") {
        RemoteEmbedder embedder(mock_config("--duplicate-first"));
        CHECK_THROWS_WITH_AS(embedder.embed({"a", "b"}, InputKind::text),
                             doctest::Contains("answered twice"), Error);
    }
    SUBCASE("non-finite component cannot arrive through the wire") {
        // strict JSON already rejects the overflowing literal at parse time
        RemoteEmbedder embedder(mock_config("--nonfinite"));
        CHECK_THROWS_WITH_AS(embedder.embed({"a"}, InputKind::text),
                             doctest::Contains("protocol violation"), Error);
        // the invariant itself is enforced one layer down
        CHECK_THROWS_WITH_AS(validate_embedding(EmbeddingVector{1.0, 1.0 / 0.0}),
                             doctest::Contains("non-finite"), Error);
    }
    SUBCASE("timeout kills the child") {
        RemoteEmbedder embedder(mock_config("--sleep 10", std::chrono::milliseconds(300)));
        CHECK_THROWS_WITH_AS(embedder.embed({"a"}, InputKind::text),
                             doctest::Contains("timed out"), Error);
    }
    SUBCASE("nonzero exit reported") {
        RemoteEmbedder embedder(mock_config("--fail"));
        CHECK_THROWS_WITH_AS(embedder.embed({"a"}, InputKind::text),
                             doctest::Contains("status 3"), Error);
    }
}

TEST_CASE("embed_batch free function honors the spec signature") {
    auto vecs = embed_batch(mock_config(), {"hello world"});
    REQUIRE(vecs.size() == 1);
    CHECK(vecs[0].size() == 16);
}

TEST_CASE("http transport speaks the same protocol") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        std::ostringstream body;
        for (const std::string& line : split_lines(req.body)) {
            if (trim(line).empty()) continue;
            auto j = nlohmann::json::parse(line);
            EmbeddingVector v = kernels::hash_embed(j.at("text").get<std::string>(), 24);
            nlohmann::ordered_json out;
            out["id"] = j.at("id");
            out["vector"] = v;
            body << out.dump() << "\n";
        }
        res.set_content(body.str(), "application/x-ndjson");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ProviderConfig config;
    config.provider_id = "http-test";
    config.transport = Transport::http;
    config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/embed";
    config.timeout = std::chrono::milliseconds(10000);

    RemoteEmbedder embedder(config);
    auto vecs = embedder.embed({"alpha", "beta", "alpha"}, InputKind::text);
    REQUIRE(vecs.size() == 3);
    CHECK(vecs[0] == kernels::hash_embed("alpha", 24));
    CHECK(vecs[1] == kernels::hash_embed("beta", 24));
    CHECK(vecs[0] == vecs[2]);
    CHECK(hits.load() == 1);

    server.stop();
    thread.join();
}

TEST_CASE("provider config validation") {
    ProviderConfig config;
    config.provider_id = "";
    config.endpoint = "x";
    CHECK_THROWS_AS(validate_provider_config(config), Error);
    config.provider_id = "p";
    config.timeout = std::chrono::milliseconds(0);
    CHECK_THROWS_AS(validate_provider_config(config), Error);
}

TEST_CASE("provider specs") {
    auto hash = make_embedder_from_spec("hash:48", std::chrono::milliseconds(1000), {}, "");
    CHECK(hash->id() == "hash:48");
    CHECK_THROWS_AS(make_embedder_from_spec("hash:x", std::chrono::milliseconds(1000), {}, ""),
                    Error);
    CHECK_THROWS_AS(make_embedder_from_spec("bogus", std::chrono::milliseconds(1000), {}, ""),
                    Error);
}
