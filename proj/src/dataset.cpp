#include "edckit/dataset.hpp"

#include "edckit/error.hpp"
#include "edckit/util.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <unordered_set>

namespace edckit {

namespace {

using ordered_json = nlohmann::ordered_json;

MetaValue meta_value_from_json(const nlohmann::json& v, std::size_t line_no) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_unsigned()) return static_cast<std::int64_t>(v.get<std::uint64_t>());
    if (v.is_number_float()) return v.get<double>();
    throw Error("line " + std::to_string(line_no) + ": meta values must be scalars");
}

ordered_json meta_value_to_json(const MetaValue& v) {
    return std::visit([](const auto& x) { return ordered_json(x); }, v);
}

Sample sample_from_line(const std::string& line, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (!j.is_object())
        throw Error("line " + std::to_string(line_no) + ": expected a JSON object");
    Sample s;
    try {
        s.id = j.at("id").get<std::string>();
        s.input_kind = input_kind_from_string(j.at("input_kind").get<std::string>());
        s.input = j.at("input").get<std::string>();
        s.output = j.at("output").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (j.contains("meta")) {
        const auto& m = j.at("meta");
        if (!m.is_object())
            throw Error("line " + std::to_string(line_no) + ": meta must be an object");
        for (auto it = m.begin(); it != m.end(); ++it)
            s.meta.emplace(it.key(), meta_value_from_json(it.value(), line_no));
    }
    try {
        validate_sample(s);
    } catch (const Error& e) {
        throw Error("line " + std::to_string(line_no) + ": " + e.what());
    }
    return s;
}

std::string sample_to_line(const Sample& s) {
    ordered_json j;
    j["id"] = s.id;
    j["input_kind"] = to_string(s.input_kind);
    j["input"] = s.input;
    j["output"] = s.output;
    if (!s.meta.empty()) {
        ordered_json m = ordered_json::object();
        for (const auto& [k, v] : s.meta) m[k] = meta_value_to_json(v);
        j["meta"] = m;
    }
    return j.dump();
}

} // namespace

std::string to_string(InputKind kind) {
    return kind == InputKind::text ? "text" : "binary_hex";
}

InputKind input_kind_from_string(const std::string& s) {
    if (s == "text") return InputKind::text;
    if (s == "binary_hex") return InputKind::binary_hex;
    throw Error("unknown input_kind: \"" + s + "\"");
}

void validate_sample(const Sample& s) {
    if (s.id.empty()) throw Error("sample id is empty");
    if (s.input.empty()) throw Error("sample \"" + s.id + "\": input is empty");
    if (s.output.empty()) throw Error("sample \"" + s.id + "\": output is empty");
    if (s.input_kind == InputKind::binary_hex && !is_lower_hex(s.input))
        throw Error("sample \"" + s.id + "\": input is not lowercase hex of whole bytes");
}

Dataset::Dataset(std::string name, std::vector<Sample> samples)
    : name_(std::move(name)), samples_(std::move(samples)) {
    std::unordered_set<std::string> ids;
    ids.reserve(samples_.size());
    for (const Sample& s : samples_) {
        validate_sample(s);
        if (!ids.insert(s.id).second)
            throw Error("duplicate sample id \"" + s.id + "\"");
        if (s.input_kind != samples_.front().input_kind)
            throw Error("mixed input_kind: sample \"" + s.id + "\" differs from first sample");
    }
}

InputKind Dataset::kind() const {
    if (samples_.empty()) throw Error("dataset \"" + name_ + "\" is empty");
    return samples_.front().input_kind;
}

Dataset dataset_from_jsonl(const std::string& text, const std::string& name) {
    std::vector<Sample> samples;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() : nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        Sample s = sample_from_line(line, line_no);
        if (!ids.insert(s.id).second)
            throw Error("duplicate id \"" + s.id + "\" at line " + std::to_string(line_no));
        if (!samples.empty() && s.input_kind != samples.front().input_kind)
            throw Error("mixed input_kind at line " + std::to_string(line_no) +
                        " (sample \"" + s.id + "\")");
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw Error("dataset \"" + name + "\" has no samples");
    return Dataset(name, std::move(samples));
}

Dataset load_dataset(const std::string& path) {
    if (!std::filesystem::exists(path)) throw Error("dataset file not found: " + path);
    std::string name = std::filesystem::path(path).stem().string();
    try {
        return dataset_from_jsonl(read_file(path), name);
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

std::string dataset_to_jsonl(const Dataset& dataset) {
    std::string out;
    for (const Sample& s : dataset.samples()) {
        out += sample_to_line(s);
        out += '\n';
    }
    return out;
}

void write_dataset(const Dataset& dataset, const std::string& path) {
    write_file(path, dataset_to_jsonl(dataset));
}

} // namespace edckit
