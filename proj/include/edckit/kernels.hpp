#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edckit {

// Fixed-dimension real vector produced by an embedder for one text.
using EmbeddingVector = std::vector<double>;

// Throws unless every component is finite and dim >= 1.
void validate_embedding(const EmbeddingVector& v);

// Row-major batch of embeddings sharing one dimension. The flat layout keeps
// the distance kernels cache-friendly.
struct EmbeddingMatrix {
    std::size_t dim = 0;
    std::vector<double> data;

    std::size_t rows() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data.data() + i * dim, dim);
    }
    void append(std::span<const double> v);
};

enum class Metric { cosine, euclidean };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

// An unordered sample pair, stored as row indices with a < b.
struct IndexPair {
    std::size_t a = 0;
    std::size_t b = 0;
    bool operator==(const IndexPair&) const = default;
};

namespace kernels {

// 1 - u.v/(|u||v|), clamped into [0,2]. Throws on dimension mismatch or a
// zero-norm operand.
double cosine_distance(std::span<const double> u, std::span<const double> v);
double euclidean_distance(std::span<const double> u, std::span<const double> v);
double metric_distance(Metric m, std::span<const double> u, std::span<const double> v);

// Deterministic bag-of-tokens embedder: lowercase the text, split on
// non-alphanumeric runs (bytes >= 0x80 count as token characters), hash each
// token with FNV-1a 64 into bucket 1 + h % (dim-1), L2-normalize the counts.
// An empty token set yields the unit vector in bucket 0. Requires dim >= 2.
EmbeddingVector hash_embed(std::string_view text, std::size_t dim);

// OpenMP-parallel kernels. Each is bit-deterministic for fixed inputs no
// matter how many threads run it: per-element outputs are independent, and
// the pearson reduction sums fixed-size blocks in block order.
EmbeddingMatrix hash_embed_many(std::span<const std::string> texts, std::size_t dim);
std::vector<double> pair_distances(const EmbeddingMatrix& m,
                                   std::span<const IndexPair> pairs, Metric metric);
double pearson(std::span<const double> xs, std::span<const double> ys);
std::vector<std::uint64_t> histogram_counts(std::span<const double> values,
                                            std::size_t bins, double lo, double hi);

// Rank correlation (average ranks on ties), reported alongside pearson.
double spearman(std::span<const double> xs, std::span<const double> ys);

// Serial reference implementations, kept for tests and the kernel benchmark.
namespace serial {
EmbeddingMatrix hash_embed_many(std::span<const std::string> texts, std::size_t dim);
std::vector<double> pair_distances(const EmbeddingMatrix& m,
                                   std::span<const IndexPair> pairs, Metric metric);
double pearson(std::span<const double> xs, std::span<const double> ys);
std::vector<std::uint64_t> histogram_counts(std::span<const double> values,
                                            std::size_t bins, double lo, double hi);
} // namespace serial

} // namespace kernels
} // namespace edckit
