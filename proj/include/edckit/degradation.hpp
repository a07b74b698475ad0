#pragma once

#include "edckit/dataset.hpp"
#include "edckit/edc.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace edckit {

struct DegradationSpec {
    std::vector<double> fractions = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::uint64_t seed = 0;
};

void validate_degradation_spec(const DegradationSpec& spec);

// Corrupts round_half_even(fraction * n) samples chosen uniformly by cycling
// their output labels within the selected subset (a seeded derangement: no
// selected sample keeps its own label). Everything else, including the
// dataset-wide multiset of outputs, is untouched.
Dataset degrade(const Dataset& dataset, double fraction, std::uint64_t seed);

struct SweepRow {
    double fraction = 0;
    EdcResult result;
};

// One EDC evaluation per fraction. The pair seed is held constant across
// fractions so every row scores the same pair selection; the per-fraction
// corruption seed is derived from spec.seed and the fraction index.
std::vector<SweepRow> degradation_sweep(const Dataset& dataset, const DegradationSpec& spec,
                                        Embedder& input_provider, Embedder& output_provider,
                                        PairBudget budget, Metric metric = Metric::cosine);

// fraction,n_pairs,correlation,p_value — empty correlation/p_value cells
// mean the distances had zero variance.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

} // namespace edckit
