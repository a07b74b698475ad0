#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edckit/dataset.hpp"
#include "edckit/error.hpp"
#include "edckit/rng.hpp"
#include "edckit/util.hpp"

#include <filesystem>

using namespace edckit;

namespace {

std::string tmp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

Dataset random_dataset(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng = make_rng(seed);
    bool binary = uniform_below(rng, 2) == 0;
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < n; ++i) {
        Sample s;
        s.id = "id" + std::to_string(i);
        s.input_kind = binary ? InputKind::binary_hex : InputKind::text;
        if (binary) {
            std::vector<std::uint8_t> bytes(1 + uniform_below(rng, 16));
            for (auto& b : bytes) b = static_cast<std::uint8_t>(uniform_below(rng, 256));
            s.input = to_hex(bytes);
        } else {
            s.input = "input text " + std::to_string(rng());
        }
        s.output = "explanation é中 " + std::to_string(rng());
        switch (uniform_below(rng, 4)) {
        case 0: s.meta["upvotes"] = static_cast<std::int64_t>(uniform_below(rng, 100)); break;
        case 1: s.meta["tags"] = std::string("c,c++"); break;
        case 2:
            s.meta["score"] = 0.5 + static_cast<double>(uniform_below(rng, 100));
            s.meta["accepted"] = (uniform_below(rng, 2) == 0);
            break;
        default: break; // no meta
        }
        samples.push_back(std::move(s));
    }
    return Dataset("random", std::move(samples));
}

} // namespace

TEST_CASE("three-line file loads in order") {
    std::string path = tmp_file("edckit_ds_order.jsonl");
    write_file(path,
               "{\"id\":\"a\",\"input_kind\":\"text\",\"input\":\"x\",\"output\":\"y\"}\n"
               "{\"id\":\"b\",\"input_kind\":\"text\",\"input\":\"x\",\"output\":\"y\"}\n"
               "{\"id\":\"c\",\"input_kind\":\"text\",\"input\":\"x\",\"output\":\"y\"}\n");
    Dataset d = load_dataset(path);
    REQUIRE(d.size() == 3);
    CHECK(d.at(0).id == "a");
    CHECK(d.at(1).id == "b");
    CHECK(d.at(2).id == "c");
}

TEST_CASE("duplicate id reports the id and line") {
    std::string path = tmp_file("edckit_ds_dup.jsonl");
    write_file(path,
               "{\"id\":\"a\",\"input_kind\":\"text\",\"input\":\"i\",\"output\":\"o\"}\n"
               "{\"id\":\"x\",\"input_kind\":\"text\",\"input\":\"i\",\"output\":\"o\"}\n"
               "{\"id\":\"b\",\"input_kind\":\"text\",\"input\":\"i\",\"output\":\"o\"}\n"
               "{\"id\":\"c\",\"input_kind\":\"text\",\"input\":\"i\",\"output\":\"o\"}\n"
               "{\"id\":\"x\",\"input_kind\":\"text\",\"input\":\"i\",\"output\":\"o\"}\n");
    try {
        load_dataset(path);
        FAIL("expected duplicate-id error");
    } catch (const Error& e) {
        std::string msg = e.what();
        CHECK(msg.find("\"x\"") != std::string::npos);
        CHECK(msg.find("line 5") != std::string::npos);
    }
}

TEST_CASE("malformed line reports line number") {
    std::string path = tmp_file("edckit_ds_bad.jsonl");
    write_file(path,
               "{\"id\":\"a\",\"input_kind\":\"text\",\"input\":\"i\",\"output\":\"o\"}\n"
               "{not json\n");
    try {
        load_dataset(path);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("mixed input_kind rejected") {
    std::string path = tmp_file("edckit_ds_mixed.jsonl");
    write_file(path,
               "{\"id\":\"a\",\"input_kind\":\"text\",\"input\":\"i\",\"output\":\"o\"}\n"
               "{\"id\":\"b\",\"input_kind\":\"binary_hex\",\"input\":\"0a\",\"output\":\"o\"}\n");
    CHECK_THROWS_AS(load_dataset(path), Error);
}

TEST_CASE("empty file rejected") {
    std::string path = tmp_file("edckit_ds_empty.jsonl");
    write_file(path, "");
    CHECK_THROWS_AS(load_dataset(path), Error);
}

TEST_CASE("missing file rejected") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/nothing.jsonl"), Error);
}

TEST_CASE("binary_hex input validated") {
    Sample s{"a", InputKind::binary_hex, "0A", "out", {}};
    CHECK_THROWS_AS(validate_sample(s), Error); // uppercase
    s.input = "abc"; // odd length
    CHECK_THROWS_AS(validate_sample(s), Error);
    s.input = "ab0f";
    CHECK_NOTHROW(validate_sample(s));
}

TEST_CASE("empty fields rejected by constructor") {
    CHECK_THROWS_AS(Dataset("d", {Sample{"", InputKind::text, "i", "o", {}}}), Error);
    CHECK_THROWS_AS(Dataset("d", {Sample{"a", InputKind::text, "", "o", {}}}), Error);
    CHECK_THROWS_AS(Dataset("d", {Sample{"a", InputKind::text, "i", "", {}}}), Error);
}

TEST_CASE("canonical form omits empty meta") {
    Dataset d("d", {Sample{"a", InputKind::text, "i", "o", {}}});
    CHECK(dataset_to_jsonl(d) ==
          "{\"id\":\"a\",\"input_kind\":\"text\",\"input\":\"i\",\"output\":\"o\"}\n");
}

TEST_CASE("write then load is identity, load then write is byte identity") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        Dataset d = random_dataset(seed, 1 + seed % 7);
        std::string path = tmp_file("edckit_ds_rt.jsonl");
        write_dataset(d, path);
        Dataset back = load_dataset(path);
        CHECK(back.samples() == d.samples());

        // canonically formatted file -> write(load(f)) byte-compares equal
        std::string canonical = read_file(path);
        std::string path2 = tmp_file("edckit_ds_rt2.jsonl");
        write_dataset(back, path2);
        CHECK(read_file(path2) == canonical);
    }
}

TEST_CASE("non-ASCII explanations survive the round trip") {
    Dataset d("d", {Sample{"a", InputKind::text, "entrée", "café 中文", {}}});
    std::string path = tmp_file("edckit_ds_utf8.jsonl");
    write_dataset(d, path);
    Dataset back = load_dataset(path);
    CHECK(back.at(0).output == "café 中文");
}

TEST_CASE("meta values must be scalars") {
    std::string path = tmp_file("edckit_ds_meta.jsonl");
    write_file(path,
               "{\"id\":\"a\",\"input_kind\":\"text\",\"input\":\"i\",\"output\":\"o\","
               "\"meta\":{\"tags\":[\"c\"]}}\n");
    CHECK_THROWS_AS(load_dataset(path), Error);
}
