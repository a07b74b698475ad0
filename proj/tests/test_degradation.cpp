#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edckit/degradation.hpp"
#include "edckit/error.hpp"
#include "edckit/util.hpp"

#include "helpers/test_fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <map>

using namespace edckit;

namespace {

Dataset labeled_dataset(std::size_t n) {
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < n; ++i)
        samples.push_back(Sample{"s" + std::to_string(i), InputKind::text,
                                 "input " + std::to_string(i), "label " + std::to_string(i), {}});
    return Dataset("labeled", std::move(samples));
}

std::size_t changed_outputs(const Dataset& a, const Dataset& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.at(i).output != b.at(i).output) ++n;
    return n;
}

std::multiset<std::string> output_multiset(const Dataset& d) {
    std::multiset<std::string> m;
    for (const Sample& s : d.samples()) m.insert(s.output);
    return m;
}

} // namespace

TEST_CASE("fraction zero is the identity") {
    Dataset d = labeled_dataset(10);
    Dataset out = degrade(d, 0.0, 5);
    CHECK(out == d);
}

TEST_CASE("fraction one deranges every label") {
    Dataset d = labeled_dataset(10);
    Dataset out = degrade(d, 1.0, 5);
    CHECK(changed_outputs(d, out) == 10);
    CHECK(output_multiset(out) == output_multiset(d));
}

TEST_CASE("half fraction changes exactly half") {
    Dataset d = labeled_dataset(10);
    Dataset out = degrade(d, 0.5, 123);
    CHECK(changed_outputs(d, out) == 5);
    CHECK(output_multiset(out) == output_multiset(d));
}

TEST_CASE("everything but outputs is untouched") {
    Dataset d = labeled_dataset(50);
    Dataset out = degrade(d, 0.6, 9);
    REQUIRE(out.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(out.at(i).id == d.at(i).id);
        CHECK(out.at(i).input == d.at(i).input);
        CHECK(out.at(i).meta == d.at(i).meta);
    }
    CHECK(output_multiset(out) == output_multiset(d));
}

TEST_CASE("changed count equals the round-half-even target across fractions") {
    Dataset d = labeled_dataset(37);
    for (double f : {0.1, 0.2, 0.35, 0.5, 0.77, 1.0}) {
        std::size_t expected = round_half_even(f * 37.0, 37);
        if (expected < 2) continue;
        Dataset out = degrade(d, f, 21);
        CHECK(changed_outputs(d, out) == expected);
    }
}

TEST_CASE("degrade is deterministic per seed") {
    Dataset d = labeled_dataset(30);
    CHECK(degrade(d, 0.5, 7) == degrade(d, 0.5, 7));
    CHECK(degrade(d, 0.5, 7) != degrade(d, 0.5, 8));
}

TEST_CASE("error cases") {
    Dataset d = labeled_dataset(10);
    CHECK_THROWS_AS(degrade(d, -0.1, 1), Error);
    CHECK_THROWS_AS(degrade(d, 1.5, 1), Error);
    // one selected sample cannot be deranged
    CHECK_THROWS_WITH_AS(degrade(d, 0.1, 1), doctest::Contains("at least 2"), Error);
    CHECK_THROWS_AS(degrade(Dataset("one", {Sample{"a", InputKind::text, "i", "o", {}}}), 0.5, 1),
                    Error);
}

TEST_CASE("spec fractions validated") {
    DegradationSpec spec;
    spec.fractions = {0.4, 0.2};
    CHECK_THROWS_AS(validate_degradation_spec(spec), Error);
    spec.fractions = {0.0, 1.1};
    CHECK_THROWS_AS(validate_degradation_spec(spec), Error);
    spec.fractions = {};
    CHECK_THROWS_AS(validate_degradation_spec(spec), Error);
    spec.fractions = {0.0, 0.2, 1.0};
    CHECK_NOTHROW(validate_degradation_spec(spec));
}

TEST_CASE("sweep: full corruption kills the correlation, zero does not") {
    Dataset d = testfix::correlated_dataset(800, 33);
    HashEmbedder input_provider(256), output_provider(256);
    DegradationSpec spec;
    spec.fractions = {0.0, 1.0};
    spec.seed = 19;
    auto rows = degradation_sweep(d, spec, input_provider, output_provider,
                                  PairBudget{1500, 1500});
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].result.correlation.has_value());
    REQUIRE(rows[1].result.correlation.has_value());
    CHECK(*rows[0].result.correlation > *rows[1].result.correlation);
    CHECK(*rows[0].result.correlation > 0.5);
    CHECK(std::abs(*rows[1].result.correlation) < 0.1);
    // pair seed held constant: both rows sampled the same pair count
    CHECK(rows[0].result.seed == rows[1].result.seed);
}

TEST_CASE("sweep is reproducible") {
    Dataset d = testfix::correlated_dataset(300, 44);
    HashEmbedder p1(128), p2(128);
    DegradationSpec spec;
    spec.fractions = {0.0, 0.4, 0.8};
    spec.seed = 6;
    auto a = degradation_sweep(d, spec, p1, p1, PairBudget{400, 400});
    auto b = degradation_sweep(d, spec, p2, p2, PairBudget{400, 400});
    CHECK(sweep_to_csv(a) == sweep_to_csv(b));
}
