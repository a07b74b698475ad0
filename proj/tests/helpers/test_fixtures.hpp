#pragma once

// Shared synthetic datasets for the statistics tests: outputs share
// deterministic token structure with their inputs, so hash embeddings of the
// two sides correlate strongly until labels are shuffled.

#include "edckit/dataset.hpp"
#include "edckit/rng.hpp"

#include <string>
#include <vector>

namespace edckit::testfix {

inline Dataset correlated_dataset(std::size_t n_samples, std::uint64_t seed,
                                  std::size_t vocab = 500, std::size_t tokens_per_sample = 12) {
    std::mt19937_64 rng = make_rng(seed);
    std::vector<Sample> samples;
    samples.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        std::vector<std::string> words(tokens_per_sample);
        for (std::string& w : words) w = "w" + std::to_string(uniform_below(rng, vocab));

        std::string input;
        for (const std::string& w : words) {
            if (!input.empty()) input += ' ';
            input += w;
        }

        // output: same tokens reshuffled, two dropped, two noise tokens added
        std::vector<std::string> out_words = words;
        shuffle_vec(out_words, rng);
        out_words.resize(tokens_per_sample - 2);
        out_words.push_back("w" + std::to_string(uniform_below(rng, vocab)));
        out_words.push_back("w" + std::to_string(uniform_below(rng, vocab)));
        std::string output;
        for (const std::string& w : out_words) {
            if (!output.empty()) output += ' ';
            output += w;
        }

        Sample s;
        s.id = "s" + std::to_string(i);
        s.input_kind = InputKind::text;
        s.input = input;
        s.output = output;
        samples.push_back(std::move(s));
    }
    return Dataset("synthetic-correlated", std::move(samples));
}

// Same inputs, outputs reassigned by a full shuffle: the no-signal control.
inline Dataset shuffled_copy(const Dataset& dataset, std::uint64_t seed) {
    std::mt19937_64 rng = make_rng(seed);
    std::vector<std::string> outputs;
    outputs.reserve(dataset.size());
    for (const Sample& s : dataset.samples()) outputs.push_back(s.output);
    shuffle_vec(outputs, rng);
    std::vector<Sample> samples = dataset.samples();
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i].output = outputs[i];
    return Dataset(dataset.name() + "-shuffled", std::move(samples));
}

} // namespace edckit::testfix
