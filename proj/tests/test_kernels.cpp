#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edckit/error.hpp"
#include "edckit/kernels.hpp"
#include "edckit/rng.hpp"

#include <omp.h>

#include <cmath>
#include <string>
#include <vector>

using namespace edckit;

namespace {

// independent FNV-1a copy so the bucket layout assertions do not reuse the
// implementation under test
std::uint64_t fnv_oracle(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::string> random_texts(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng = make_rng(seed);
    std::vector<std::string> texts(n);
    for (auto& t : texts) {
        std::size_t words = 1 + uniform_below(rng, 20);
        for (std::size_t w = 0; w < words; ++w)
            t += "tok" + std::to_string(uniform_below(rng, 300)) + " ";
    }
    return texts;
}

} // namespace

TEST_CASE("hash_embed empty text is the bucket-0 unit vector") {
    EmbeddingVector v = kernels::hash_embed("", 8);
    CHECK(v == EmbeddingVector{1, 0, 0, 0, 0, 0, 0, 0});
    CHECK(kernels::hash_embed("  \t\n--", 8) == v); // no token characters
}

TEST_CASE("hash_embed scale invariance and case folding") {
    EmbeddingVector once = kernels::hash_embed("x", 32);
    EmbeddingVector thrice = kernels::hash_embed("x x x", 32);
    CHECK(kernels::cosine_distance(once, thrice) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(kernels::hash_embed("ABC abc", 32) == kernels::hash_embed("abc abc", 32));
}

TEST_CASE("hash_embed bucket layout matches the documented hash") {
    const std::size_t dim = 16;
    std::size_t bucket_foo = 1 + static_cast<std::size_t>(fnv_oracle("foo") % (dim - 1));
    std::size_t bucket_bar = 1 + static_cast<std::size_t>(fnv_oracle("bar") % (dim - 1));
    EmbeddingVector v = kernels::hash_embed("foo bar", dim);
    if (bucket_foo != bucket_bar) {
        CHECK(v[bucket_foo] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
        CHECK(v[bucket_bar] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
        std::size_t nonzero = 0;
        for (double x : v)
            if (x != 0) ++nonzero;
        CHECK(nonzero == 2);
    } else {
        CHECK(v[bucket_foo] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("hash_embed always returns a unit vector") {
    std::mt19937_64 rng = make_rng(99);
    for (int i = 0; i < 200; ++i) {
        std::string text;
        std::size_t len = uniform_below(rng, 50);
        for (std::size_t k = 0; k < len; ++k)
            text.push_back(static_cast<char>(32 + uniform_below(rng, 95)));
        EmbeddingVector v = kernels::hash_embed(text, 2 + uniform_below(rng, 64));
        double norm = 0;
        for (double x : v) norm += x * x;
        CHECK(std::abs(norm - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(kernels::hash_embed("a", 1), Error);
}

TEST_CASE("cosine distance basics") {
    CHECK(kernels::cosine_distance(EmbeddingVector{1, 0}, EmbeddingVector{0, 1}) == 1.0);
    CHECK(kernels::cosine_distance(EmbeddingVector{3, 4}, EmbeddingVector{3, 4}) == 0.0);
    CHECK(kernels::cosine_distance(EmbeddingVector{1, 2, 2}, EmbeddingVector{2, 1, 2}) ==
          doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    CHECK_THROWS_AS(kernels::cosine_distance(EmbeddingVector{1}, EmbeddingVector{1, 2}), Error);
    CHECK_THROWS_AS(kernels::cosine_distance(EmbeddingVector{0, 0}, EmbeddingVector{0, 0}), Error);
}

TEST_CASE("pearson exact cases and errors") {
    CHECK(kernels::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 1.0);
    CHECK(kernels::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == -1.0);
    CHECK_THROWS_AS(kernels::pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
    CHECK_THROWS_AS(kernels::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}),
                    Error);
    CHECK_THROWS_AS(kernels::pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                    Error);
}

TEST_CASE("pearson matches the serial reference on random data") {
    std::mt19937_64 rng = make_rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t n = 3 + uniform_below(rng, 9000);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = uniform_double(rng);
            ys[i] = 0.6 * xs[i] + 0.4 * uniform_double(rng);
        }
        double a = kernels::pearson(xs, ys);
        double b = kernels::serial::pearson(xs, ys);
        CHECK(std::abs(a - b) < 1e-12);
    }
}

TEST_CASE("parallel kernels match serial kernels and are thread-count stable") {
    std::vector<std::string> texts = random_texts(500, 11);
    const std::size_t dim = 64;

    EmbeddingMatrix m1 = kernels::hash_embed_many(texts, dim);
    EmbeddingMatrix m2 = kernels::serial::hash_embed_many(texts, dim);
    REQUIRE(m1.data.size() == m2.data.size());
    CHECK(m1.data == m2.data);

    std::mt19937_64 rng = make_rng(12);
    std::vector<IndexPair> pairs(4000);
    for (auto& p : pairs) {
        std::size_t a = uniform_below(rng, texts.size());
        std::size_t b = uniform_below(rng, texts.size() - 1);
        if (b >= a) ++b;
        p = {std::min(a, b), std::max(a, b)};
    }
    std::vector<double> d1 = kernels::pair_distances(m1, pairs, Metric::cosine);
    std::vector<double> d2 = kernels::serial::pair_distances(m1, pairs, Metric::cosine);
    CHECK(d1 == d2);

    auto h1 = kernels::histogram_counts(d1, 50, 0.0, 2.0);
    auto h2 = kernels::serial::histogram_counts(d1, 50, 0.0, 2.0);
    CHECK(h1 == h2);

    // the parallel reductions must give bit-identical answers at any width
    int saved = omp_get_max_threads();
    std::vector<double> ys(d1.size());
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = d1[i] * 0.9 + 0.01;
    double r_multi = kernels::pearson(d1, ys);
    omp_set_num_threads(1);
    double r_single = kernels::pearson(d1, ys);
    std::vector<double> d_single = kernels::pair_distances(m1, pairs, Metric::cosine);
    EmbeddingMatrix m_single = kernels::hash_embed_many(texts, dim);
    omp_set_num_threads(saved);
    CHECK(r_multi == r_single);
    CHECK(d_single == d1);
    CHECK(m_single.data == m1.data);
}

TEST_CASE("euclidean metric") {
    CHECK(kernels::euclidean_distance(EmbeddingVector{0, 0}, EmbeddingVector{3, 4}) ==
          doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("spearman is invariant under monotone transforms") {
    std::mt19937_64 rng = make_rng(7);
    std::vector<double> xs(100), ys(100);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = uniform_double(rng);
        ys[i] = std::exp(3.0 * xs[i]); // monotone in xs
    }
    CHECK(kernels::spearman(xs, ys) == doctest::Approx(1.0).epsilon(1e-12));
}
