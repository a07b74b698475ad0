#include "edckit/degradation.hpp"

#include "edckit/csv.hpp"
#include "edckit/error.hpp"
#include "edckit/rng.hpp"
#include "edckit/util.hpp"

#include <algorithm>

namespace edckit {

void validate_degradation_spec(const DegradationSpec& spec) {
    if (spec.fractions.empty()) throw Error("degradation spec needs at least one fraction");
    for (std::size_t i = 0; i < spec.fractions.size(); ++i) {
        double f = spec.fractions[i];
        if (f < 0.0 || f > 1.0)
            throw Error("degradation fraction " + format_double(f) + " outside [0,1]");
        if (i > 0 && f < spec.fractions[i - 1])
            throw Error("degradation fractions must be sorted ascending");
    }
}

Dataset degrade(const Dataset& dataset, double fraction, std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0)
        throw Error("degradation fraction " + format_double(fraction) + " outside [0,1]");
    if (dataset.size() < 2) throw Error("degradation needs at least 2 samples");
    if (fraction == 0.0) return dataset;

    const std::size_t n = dataset.size();
    const std::size_t k = round_half_even(fraction * static_cast<double>(n), n);
    if (k == 0) return dataset;
    if (k < 2)
        throw Error("degradation fraction " + format_double(fraction) + " selects " +
                    std::to_string(k) + " sample(s); a label derangement needs at least 2");

    std::mt19937_64 rng = make_rng(seed);
    std::vector<std::size_t> selected = sample_indices(n, k, rng);
    std::sort(selected.begin(), selected.end());

    std::vector<std::string> labels;
    labels.reserve(k);
    for (std::size_t i : selected) labels.push_back(dataset.at(i).output);
    cyclic_shuffle(labels, rng);

    std::vector<Sample> samples = dataset.samples();
    for (std::size_t i = 0; i < k; ++i) samples[selected[i]].output = labels[i];
    return Dataset(dataset.name(), std::move(samples));
}

std::vector<SweepRow> degradation_sweep(const Dataset& dataset, const DegradationSpec& spec,
                                        Embedder& input_provider, Embedder& output_provider,
                                        PairBudget budget, Metric metric) {
    validate_degradation_spec(spec);
    std::vector<SweepRow> rows;
    rows.reserve(spec.fractions.size());
    for (std::size_t i = 0; i < spec.fractions.size(); ++i) {
        double fraction = spec.fractions[i];
        Dataset degraded = degrade(dataset, fraction, derive_seed(spec.seed, i));
        EdcOutcome outcome =
            edc_score(degraded, input_provider, output_provider, budget, spec.seed, metric);
        rows.push_back(SweepRow{fraction, std::move(outcome.result)});
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "fraction,n_pairs,correlation,p_value\n";
    for (const SweepRow& row : rows) {
        out += csv_row({format_double(row.fraction), std::to_string(row.result.n_pairs),
                        row.result.correlation ? format_double(*row.result.correlation) : "",
                        row.result.p_value ? format_double(*row.result.p_value) : ""});
    }
    return out;
}

} // namespace edckit
