#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace edckit {

enum class InputKind { text, binary_hex };

std::string to_string(InputKind kind);
InputKind input_kind_from_string(const std::string& s);

// Scalar metadata value. Tags and similar lists are flattened to one string
// before they land here.
using MetaValue = std::variant<std::string, std::int64_t, double, bool>;
using MetaMap = std::map<std::string, MetaValue>;

// One paired example: an input (prose/source text, or the lowercase hex of
// raw bytes) and its English explanation.
struct Sample {
    std::string id;
    InputKind input_kind = InputKind::text;
    std::string input;
    std::string output;
    MetaMap meta;

    bool operator==(const Sample&) const = default;
};

class Dataset {
public:
    Dataset() = default;
    // Validates every sample and the cross-sample invariants (unique ids,
    // one input_kind). Throws Error on violation.
    Dataset(std::string name, std::vector<Sample> samples);

    const std::string& name() const { return name_; }
    const std::vector<Sample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    const Sample& at(std::size_t i) const { return samples_.at(i); }
    InputKind kind() const;

    bool operator==(const Dataset&) const = default;

private:
    std::string name_;
    std::vector<Sample> samples_;
};

void validate_sample(const Sample& s);

// Reads one JSON object per line with fields id/input_kind/input/output[/meta].
// Errors carry the offending line number.
Dataset load_dataset(const std::string& path);

// Canonical JSONL: keys in order id, input_kind, input, output, meta
// (meta omitted when empty), LF endings, UTF-8. load(write(d)) == d.
void write_dataset(const Dataset& dataset, const std::string& path);
std::string dataset_to_jsonl(const Dataset& dataset);
Dataset dataset_from_jsonl(const std::string& text, const std::string& name);

} // namespace edckit
