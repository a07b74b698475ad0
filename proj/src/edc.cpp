#include "edckit/edc.hpp"

#include "edckit/csv.hpp"
#include "edckit/error.hpp"
#include "edckit/rng.hpp"
#include "edckit/util.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace edckit {

namespace {

std::uint64_t pair_count(std::size_t m) {
    return static_cast<std::uint64_t>(m) * (m - 1) / 2;
}

// Unordered pairs (i < j) are coded as j*(j-1)/2 + i.
IndexPair decode_pair(std::uint64_t code) {
    auto j = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(code))) / 2.0);
    while (j > 1 && j * (j - 1) / 2 > code) --j;
    while ((j + 1) * j / 2 <= code) ++j;
    std::uint64_t i = code - j * (j - 1) / 2;
    return IndexPair{static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
}

// Incremental uniform pair sampler: drawing more pairs with the same state
// keeps every earlier draw, so a doubled budget reuses prior pairs.
class PairSampler {
public:
    PairSampler(std::size_t n_samples, std::uint64_t seed)
        : total_(pair_count(n_samples)), rng_(make_rng(seed)) {}

    std::uint64_t total() const { return total_; }

    void extend(std::size_t target, std::vector<IndexPair>& pairs) {
        if (target > total_)
            throw Error("pair budget " + std::to_string(target) + " exceeds the " +
                        std::to_string(total_) + " distinct pairs available");
        while (pairs.size() < target) {
            std::uint64_t code = uniform_below(rng_, total_);
            if (seen_.insert(code).second) pairs.push_back(decode_pair(code));
        }
    }

private:
    std::uint64_t total_;
    std::mt19937_64 rng_;
    std::unordered_set<std::uint64_t> seen_;
};

// Embeds dataset rows on demand into a preallocated matrix so a growing pair
// set never re-embeds or re-pays for earlier rounds.
class LazyEmbeddingTable {
public:
    LazyEmbeddingTable(const Dataset& dataset, Embedder& provider, bool output_side)
        : dataset_(dataset), provider_(provider), output_side_(output_side),
          embedded_(dataset.size(), false) {}

    void ensure(const std::vector<std::size_t>& indices) {
        std::vector<std::size_t> todo;
        for (std::size_t i : indices)
            if (!embedded_[i]) todo.push_back(i);
        if (todo.empty()) return;
        std::sort(todo.begin(), todo.end());
        todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
        std::vector<std::string> texts;
        texts.reserve(todo.size());
        for (std::size_t i : todo)
            texts.push_back(output_side_ ? dataset_.at(i).output : dataset_.at(i).input);
        InputKind kind = output_side_ ? InputKind::text : dataset_.kind();
        std::vector<EmbeddingVector> vecs = provider_.embed(texts, kind);
        for (std::size_t k = 0; k < todo.size(); ++k) {
            const EmbeddingVector& v = vecs[k];
            validate_embedding(v);
            if (matrix_.dim == 0) {
                matrix_.dim = v.size();
                matrix_.data.assign(dataset_.size() * matrix_.dim, 0.0);
            }
            if (v.size() != matrix_.dim)
                throw Error("provider \"" + provider_.id() + "\" dimension mismatch: got " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(matrix_.dim));
            std::copy(v.begin(), v.end(), matrix_.data.begin() + todo[k] * matrix_.dim);
            embedded_[todo[k]] = true;
        }
    }

    const EmbeddingMatrix& matrix() const { return matrix_; }

private:
    const Dataset& dataset_;
    Embedder& provider_;
    bool output_side_;
    std::vector<bool> embedded_;
    EmbeddingMatrix matrix_;
};

bool has_variance(const std::vector<double>& xs) {
    for (double x : xs)
        if (x != xs.front()) return true;
    return false;
}

} // namespace

std::vector<IndexPair> sample_pairs(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
    if (dataset.size() < 2) throw Error("pair sampling needs at least 2 samples");
    if (n == 0) throw Error("pair count must be positive");
    PairSampler sampler(dataset.size(), seed);
    std::vector<IndexPair> pairs;
    pairs.reserve(n);
    sampler.extend(n, pairs);
    return pairs;
}

double cosine_distance(const EmbeddingVector& u, const EmbeddingVector& v) {
    return kernels::cosine_distance(u, v);
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    return kernels::pearson(xs, ys);
}

double correlation_p_value(double r, std::size_t n) {
    if (n < 3) throw Error("p-value needs n >= 3, got " + std::to_string(n));
    if (!std::isfinite(r)) throw Error("p-value: correlation is not finite");
    r = std::clamp(r, -1.0, 1.0);
    if (r == 1.0 || r == -1.0) return 0.0;
    double df = static_cast<double>(n) - 2.0;
    double t = r * std::sqrt(df / (1.0 - r * r));
    boost::math::students_t dist(df);
    double tail = boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return std::min(1.0, 2.0 * tail);
}

BinningReport detect_binning(const std::vector<double>& distances, std::size_t bin_count,
                             double threshold) {
    if (distances.size() < 10)
        throw Error("binning diagnostic needs at least 10 distances, got " +
                    std::to_string(distances.size()));
    if (bin_count < 2) throw Error("binning diagnostic needs at least 2 bins");
    auto [lo_it, hi_it] = std::minmax_element(distances.begin(), distances.end());
    BinningReport report;
    report.bin_count = bin_count;
    if (*lo_it == *hi_it) {
        report.concentration = 1.0;
    } else {
        std::vector<std::uint64_t> counts =
            kernels::histogram_counts(distances, bin_count, *lo_it, *hi_it);
        double n = static_cast<double>(distances.size());
        double acc = 0;
        for (std::uint64_t c : counts) {
            double frac = static_cast<double>(c) / n;
            acc += frac * frac;
        }
        report.concentration = acc;
    }
    report.flagged = report.concentration > threshold;
    return report;
}

EdcOutcome edc_score(const Dataset& dataset, Embedder& input_provider, Embedder& output_provider,
                     PairBudget budget, std::uint64_t seed, Metric metric) {
    if (dataset.size() < 2) throw Error("EDC needs at least 2 samples");
    if (budget.initial == 0) throw Error("pair budget must start above zero");

    PairSampler sampler(dataset.size(), seed);
    const std::uint64_t total = sampler.total();
    std::size_t cap = budget.cap == 0 ? static_cast<std::size_t>(total)
                                      : static_cast<std::size_t>(std::min<std::uint64_t>(budget.cap, total));
    std::size_t n = std::min(budget.initial, cap);

    LazyEmbeddingTable inputs(dataset, input_provider, false);
    LazyEmbeddingTable outputs(dataset, output_provider, true);

    std::vector<IndexPair> pairs;
    std::vector<double> xs, ys;

    std::optional<double> r;
    std::optional<double> p;
    bool degenerate = false;

    for (;;) {
        std::size_t prev = pairs.size();
        sampler.extend(n, pairs);

        std::vector<std::size_t> touched;
        touched.reserve(2 * (n - prev));
        for (std::size_t i = prev; i < n; ++i) {
            touched.push_back(pairs[i].a);
            touched.push_back(pairs[i].b);
        }
        inputs.ensure(touched);
        outputs.ensure(touched);

        std::span<const IndexPair> fresh(pairs.data() + prev, n - prev);
        std::vector<double> dx = kernels::pair_distances(inputs.matrix(), fresh, metric);
        std::vector<double> dy = kernels::pair_distances(outputs.matrix(), fresh, metric);
        xs.insert(xs.end(), dx.begin(), dx.end());
        ys.insert(ys.end(), dy.begin(), dy.end());

        degenerate = xs.size() < 3 || !has_variance(xs) || !has_variance(ys);
        if (!degenerate) {
            r = kernels::pearson(xs, ys);
            p = correlation_p_value(*r, xs.size());
            if (*p < kSignificanceLevel) break;
        } else {
            r.reset();
            p.reset();
        }
        std::size_t next = std::min<std::size_t>(cap, n * 2);
        if (next <= n) break;
        n = next;
    }

    EdcOutcome outcome;
    outcome.result.n_pairs = pairs.size();
    outcome.result.correlation = r;
    outcome.result.p_value = p;
    outcome.result.seed = seed;
    outcome.result.metric = metric;
    outcome.result.zero_variance = degenerate;
    if (!degenerate) {
        try {
            outcome.result.spearman = kernels::spearman(xs, ys);
        } catch (const Error&) {
            // rank ties can still collapse variance; leave spearman unset
        }
    }
    if (xs.size() >= 10) outcome.result.binning = detect_binning(xs);

    outcome.records.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        outcome.records.push_back(PairDistanceRecord{dataset.at(pairs[i].a).id,
                                                     dataset.at(pairs[i].b).id, xs[i], ys[i]});
    }
    return outcome;
}

EdcOutcome summary_agreement(const Dataset& generated, const Dataset& reference,
                             Embedder& provider, PairBudget budget, std::uint64_t seed,
                             Metric metric) {
    if (generated.kind() != InputKind::text || reference.kind() != InputKind::text)
        throw Error("summary agreement expects text datasets on both sides");

    std::unordered_map<std::string, std::size_t> ref_index;
    for (std::size_t i = 0; i < reference.size(); ++i)
        ref_index.emplace(reference.at(i).id, i);
    if (ref_index.size() != generated.size())
        throw Error("id-set mismatch: generated has " + std::to_string(generated.size()) +
                    " ids, reference has " + std::to_string(reference.size()));

    std::vector<Sample> merged;
    merged.reserve(generated.size());
    for (const Sample& g : generated.samples()) {
        auto it = ref_index.find(g.id);
        if (it == ref_index.end())
            throw Error("id-set mismatch: id \"" + g.id + "\" missing from reference");
        Sample s;
        s.id = g.id;
        s.input_kind = InputKind::text;
        s.input = g.input;
        s.output = reference.at(it->second).input;
        merged.push_back(std::move(s));
    }
    Dataset paired(generated.name() + "-vs-" + reference.name(), std::move(merged));
    return edc_score(paired, provider, provider, budget, seed, metric);
}

std::string edc_result_to_json(const EdcResult& result) {
    nlohmann::ordered_json j;
    j["n_pairs"] = result.n_pairs;
    if (result.correlation) j["correlation"] = *result.correlation;
    else j["correlation"] = nullptr;
    if (result.p_value) j["p_value"] = *result.p_value;
    else j["p_value"] = nullptr;
    if (result.spearman) j["spearman"] = *result.spearman;
    else j["spearman"] = nullptr;
    j["seed"] = result.seed;
    if (result.binning) {
        j["binning"] = {{"bin_count", result.binning->bin_count},
                        {"concentration", result.binning->concentration},
                        {"flagged", result.binning->flagged}};
    } else {
        j["binning"] = nullptr;
    }
    j["metric"] = to_string(result.metric);
    j["correlation_method"] = result.correlation_method;
    j["zero_variance"] = result.zero_variance;
    return j.dump(2) + "\n";
}

std::string pair_records_to_csv(const std::vector<PairDistanceRecord>& records) {
    std::string out = "id_a,id_b,input_distance,output_distance\n";
    for (const PairDistanceRecord& r : records)
        out += csv_row({r.id_a, r.id_b, format_double(r.input_distance),
                        format_double(r.output_distance)});
    return out;
}

std::vector<PairDistanceRecord> pair_records_from_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows = csv_parse(text);
    if (rows.empty()) throw Error("pair CSV is empty");
    const std::vector<std::string> header = {"id_a", "id_b", "input_distance", "output_distance"};
    if (rows.front() != header)
        throw Error("pair CSV header mismatch (want id_a,id_b,input_distance,output_distance)");
    std::vector<PairDistanceRecord> records;
    records.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 4)
            throw Error("pair CSV row " + std::to_string(i + 1) + ": expected 4 fields");
        PairDistanceRecord r;
        r.id_a = row[0];
        r.id_b = row[1];
        try {
            r.input_distance = std::stod(row[2]);
            r.output_distance = std::stod(row[3]);
        } catch (...) {
            throw Error("pair CSV row " + std::to_string(i + 1) + ": bad distance value");
        }
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace edckit
