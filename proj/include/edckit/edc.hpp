#pragma once

#include "edckit/dataset.hpp"
#include "edckit/embedding.hpp"
#include "edckit/kernels.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edckit {

// One sampled pair's two distances: between the input embeddings and
// between the output embeddings.
struct PairDistanceRecord {
    std::string id_a;
    std::string id_b;
    double input_distance = 0;
    double output_distance = 0;
};

struct BinningReport {
    std::size_t bin_count = 0;
    double concentration = 0; // sum of squared bin mass fractions
    bool flagged = false;
};

struct EdcResult {
    std::size_t n_pairs = 0;
    std::optional<double> correlation;  // empty when distances had zero variance
    std::optional<double> p_value;
    std::optional<double> spearman;
    std::uint64_t seed = 0;
    std::optional<BinningReport> binning; // needs >= 10 pairs
    Metric metric = Metric::cosine;
    std::string correlation_method = "pearson";
    bool zero_variance = false;
};

struct EdcOutcome {
    EdcResult result;
    std::vector<PairDistanceRecord> records;
};

// Initial pair count and growth cap for the significance loop.
struct PairBudget {
    std::size_t initial = 200;
    std::size_t cap = 100000;
};

constexpr std::size_t kDefaultBinCount = 50;
constexpr double kDefaultBinningThreshold = 0.1;
constexpr double kSignificanceLevel = 0.05;

// n distinct unordered pairs of dataset indices, no self-pairs, uniform
// without replacement, deterministic for a given seed. Growing n with the
// same seed keeps earlier pairs as a prefix.
std::vector<IndexPair> sample_pairs(const Dataset& dataset, std::size_t n, std::uint64_t seed);

double cosine_distance(const EmbeddingVector& u, const EmbeddingVector& v);

// Pearson product-moment correlation; throws on length mismatch, n < 3, or
// zero variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Two-sided p-value for observing |r| under the null of no correlation:
// t = r*sqrt((n-2)/(1-r^2)) against Student-t with n-2 degrees of freedom.
double correlation_p_value(double r, std::size_t n);

// Histogram concentration diagnostic over a distance list. Uniform bins over
// [min, max]; a degenerate range counts as full concentration.
BinningReport detect_binning(const std::vector<double>& distances,
                             std::size_t bin_count = kDefaultBinCount,
                             double threshold = kDefaultBinningThreshold);

// The full scoring loop: sample pairs, embed both sides, correlate the two
// distance lists, and double the pair count until p < 0.05, the cap, or pair
// exhaustion. Binning is evaluated on the input-side distances.
EdcOutcome edc_score(const Dataset& dataset, Embedder& input_provider, Embedder& output_provider,
                     PairBudget budget, std::uint64_t seed, Metric metric = Metric::cosine);

// Correlates generated-vs-generated summary distances against
// reference-vs-reference distances over the shared id set, one text provider
// on both sides. Pair sampling follows the generated dataset's order.
EdcOutcome summary_agreement(const Dataset& generated, const Dataset& reference,
                             Embedder& provider, PairBudget budget, std::uint64_t seed,
                             Metric metric = Metric::cosine);

std::string edc_result_to_json(const EdcResult& result);
std::string pair_records_to_csv(const std::vector<PairDistanceRecord>& records);
std::vector<PairDistanceRecord> pair_records_from_csv(const std::string& text);

} // namespace edckit
