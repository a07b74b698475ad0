#include "edckit/builder.hpp"
#include "edckit/dataset.hpp"
#include "edckit/degradation.hpp"
#include "edckit/edc.hpp"
#include "edckit/embedding.hpp"
#include "edckit/error.hpp"
#include "edckit/survey.hpp"
#include "edckit/util.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <vector>

namespace {

using namespace edckit;
using ordered_json = nlohmann::ordered_json;

struct CommonOpts {
    std::uint64_t seed = 0;
    int jobs = 0;
    std::string out_dir = ".";
    std::string config_file;
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size() && !s.empty()) {
        std::size_t comma = s.find(',', pos);
        std::string piece =
            trim(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (!piece.empty()) out.push_back(piece);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "Seed for all randomness in this run");
    cmd->add_option("--jobs", opts.jobs, "Max parallel compiles/kernel threads (0 = hardware)");
    cmd->add_option("--out-dir", opts.out_dir, "Directory for output artifacts");
    cmd->add_option("--config", opts.config_file,
                    "Flat key=value config file; flags override file values");
}

// Flat config support: key=value lines mirror flag names. File values are
// appended as synthetic flags unless the flag already appears on the command
// line, so explicit flags always win.
void merge_config_file(std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return;
    for (const std::string& raw : split_lines(read_file(path))) {
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config file " + path + ": expected key=value, got \"" + line + "\"");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw Error("config file " + path + ": empty key");
        std::string flag = "--" + key;
        bool already = false;
        for (const std::string& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) already = true;
        if (already) continue;
        args.push_back(flag);
        args.push_back(value);
    }
}

void apply_jobs(const CommonOpts& opts) {
    if (opts.jobs > 0) omp_set_num_threads(opts.jobs);
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
    std::filesystem::create_directories(opts.out_dir);
    return (std::filesystem::path(opts.out_dir) / name).string();
}

// Every subcommand records its fully resolved configuration next to its
// outputs so a run can be reproduced from the report alone.
void write_run_config(const CommonOpts& opts, const std::string& subcommand,
                      ordered_json extra) {
    ordered_json j;
    j["subcommand"] = subcommand;
    j["seed"] = opts.seed;
    j["jobs"] = opts.jobs;
    j["out_dir"] = opts.out_dir;
    j["config_file"] = opts.config_file;
    for (auto& [k, v] : extra.items()) j[k] = v;
    write_file(out_path(opts, "run_config.json"), j.dump(2) + "\n");
}

struct ProviderOpts {
    std::string input_spec;
    std::string output_spec;
    double timeout_seconds = 60.0;
    std::size_t expected_dim = 0;
    std::string cache_dir;
};

std::unique_ptr<Embedder> open_provider(const ProviderOpts& opts, const std::string& spec) {
    std::optional<std::size_t> expected;
    if (opts.expected_dim > 0) expected = opts.expected_dim;
    auto timeout = std::chrono::milliseconds(static_cast<long>(opts.timeout_seconds * 1000));
    return make_embedder_from_spec(spec, timeout, expected, opts.cache_dir);
}

void print_edc_summary(const EdcResult& result) {
    char line[160];
    std::string r = result.correlation ? [&] {
        char b[32];
        std::snprintf(b, sizeof b, "%.3f", *result.correlation);
        return std::string(b);
    }() : "undefined";
    std::string p = result.p_value ? [&] {
        char b[32];
        std::snprintf(b, sizeof b, "%.3g", *result.p_value);
        return std::string(b);
    }() : "undefined";
    std::snprintf(line, sizeof line, "EDC r=%s p=%s n=%zu binning=%s", r.c_str(), p.c_str(),
                  result.n_pairs,
                  result.binning && result.binning->flagged ? "true" : "false");
    std::cout << line << "\n";
}

int cmd_build_corpus(const CommonOpts& common, const std::string& dump, BuildConfig config,
                     const std::string& toolchain_file) {
    apply_jobs(common);
    if (!toolchain_file.empty()) config.toolchains = load_toolchains(toolchain_file);
    ordered_json extra;
    extra["dump"] = dump;
    extra["tags"] = config.tag_filter;
    extra["max_span"] = config.max_span;
    extra["dataset_name"] = config.dataset_name;
    extra["toolchains"] = nlohmann::json::parse(toolchains_to_json(config.toolchains));
    write_run_config(common, "build-corpus", extra);

    BuildOutput output = build_dataset(dump, config);
    write_file(out_path(common, "build_report.json"), build_report_to_json(output.report));
    if (output.report.samples_emitted == 0) {
        std::cerr << "error: no samples emitted (see "
                  << out_path(common, "build_report.json") << ")\n";
        return 1;
    }
    write_dataset(output.dataset, out_path(common, "dataset.jsonl"));
    std::cout << "built " << output.report.samples_emitted << " samples from "
              << output.report.pages_processed << " pages\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& common, const std::string& dataset_path,
                 const ProviderOpts& providers, PairBudget budget, const std::string& metric) {
    apply_jobs(common);
    ordered_json extra;
    extra["dataset"] = dataset_path;
    extra["input_provider"] = providers.input_spec;
    extra["output_provider"] = providers.output_spec;
    extra["pairs_initial"] = budget.initial;
    extra["pairs_cap"] = budget.cap;
    extra["metric"] = metric;
    write_run_config(common, "evaluate", extra);

    Dataset dataset = load_dataset(dataset_path);
    auto input_provider = open_provider(providers, providers.input_spec);
    auto output_provider = open_provider(providers, providers.output_spec);
    EdcOutcome outcome = edc_score(dataset, *input_provider, *output_provider, budget,
                                   common.seed, metric_from_string(metric));
    write_file(out_path(common, "pairs.csv"), pair_records_to_csv(outcome.records));
    write_file(out_path(common, "result.json"), edc_result_to_json(outcome.result));
    print_edc_summary(outcome.result);
    return 0;
}

int cmd_degrade_sweep(const CommonOpts& common, const std::string& dataset_path,
                      const ProviderOpts& providers, PairBudget budget,
                      const std::string& metric, const std::vector<double>& fractions) {
    apply_jobs(common);
    DegradationSpec spec;
    if (!fractions.empty()) spec.fractions = fractions;
    spec.seed = common.seed;

    ordered_json extra;
    extra["dataset"] = dataset_path;
    extra["input_provider"] = providers.input_spec;
    extra["output_provider"] = providers.output_spec;
    extra["pairs_initial"] = budget.initial;
    extra["pairs_cap"] = budget.cap;
    extra["metric"] = metric;
    extra["fractions"] = spec.fractions;
    write_run_config(common, "degrade-sweep", extra);

    Dataset dataset = load_dataset(dataset_path);
    auto input_provider = open_provider(providers, providers.input_spec);
    auto output_provider = open_provider(providers, providers.output_spec);
    std::vector<SweepRow> rows = degradation_sweep(dataset, spec, *input_provider,
                                                   *output_provider, budget,
                                                   metric_from_string(metric));
    write_file(out_path(common, "sweep.csv"), sweep_to_csv(rows));
    for (const SweepRow& row : rows) {
        std::cout << "fraction " << format_double(row.fraction) << ": r="
                  << (row.result.correlation ? format_double(*row.result.correlation)
                                             : "undefined")
                  << " n=" << row.result.n_pairs << "\n";
    }
    return 0;
}

int cmd_survey_sample(const CommonOpts& common, const std::string& dataset_path,
                      const std::string& pairs_path, double input_threshold,
                      double output_threshold, std::size_t per_side,
                      const std::vector<std::string>& adjudicators) {
    ordered_json extra;
    extra["dataset"] = dataset_path;
    extra["pairs"] = pairs_path;
    extra["input_threshold"] = input_threshold;
    extra["output_threshold"] = output_threshold;
    extra["per_side"] = per_side;
    extra["adjudicators"] = adjudicators;
    write_run_config(common, "survey sample", extra);

    Dataset dataset = load_dataset(dataset_path);
    std::vector<PairDistanceRecord> records = pair_records_from_csv(read_file(pairs_path));
    SurveySelection selection = select_survey_pairs(records, dataset, input_threshold,
                                                    output_threshold, per_side, common.seed);
    if (!adjudicators.empty()) assign_adjudicators(selection.items, adjudicators);
    write_file(out_path(common, "survey_sheet.csv"), survey_sheet_to_csv(selection.items));

    ordered_json summary;
    summary["items"] = selection.items.size();
    summary["overlap_pairs"] = selection.overlap_count;
    summary["warnings"] = selection.warnings;
    write_file(out_path(common, "survey_selection.json"), summary.dump(2) + "\n");

    for (const std::string& w : selection.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "selected " << selection.items.size() << " pairs for adjudication\n";
    return 0;
}

int cmd_survey_tally(const CommonOpts& common, const std::string& sheet_path) {
    ordered_json extra;
    extra["sheet"] = sheet_path;
    write_run_config(common, "survey tally", extra);

    std::vector<AdjudicationItem> items = survey_sheet_from_csv(read_file(sheet_path));
    SurveyTally tally = tally_survey(items);
    write_file(out_path(common, "tally.json"), tally_to_json(tally));
    std::cout << "input_space: " << tally.input_space.agree << " agree / "
              << tally.input_space.unsure << " unsure / " << tally.input_space.disagree
              << " disagree\n";
    std::cout << "output_space: " << tally.output_space.agree << " agree / "
              << tally.output_space.unsure << " unsure / " << tally.output_space.disagree
              << " disagree\n";
    return 0;
}

int cmd_summary_agreement(const CommonOpts& common, const std::string& generated_path,
                          const std::string& reference_path, const ProviderOpts& providers,
                          PairBudget budget, const std::string& metric) {
    apply_jobs(common);
    ordered_json extra;
    extra["generated"] = generated_path;
    extra["reference"] = reference_path;
    extra["provider"] = providers.input_spec;
    extra["pairs_initial"] = budget.initial;
    extra["pairs_cap"] = budget.cap;
    extra["metric"] = metric;
    write_run_config(common, "summary-agreement", extra);

    Dataset generated = load_dataset(generated_path);
    Dataset reference = load_dataset(reference_path);
    auto provider = open_provider(providers, providers.input_spec);
    EdcOutcome outcome = summary_agreement(generated, reference, *provider, budget, common.seed,
                                           metric_from_string(metric));
    write_file(out_path(common, "pairs.csv"), pair_records_to_csv(outcome.records));
    write_file(out_path(common, "result.json"), edc_result_to_json(outcome.result));
    print_edc_summary(outcome.result);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"edckit — paired-dataset construction and learnability evaluation"};
    app.require_subcommand(1);

    // build-corpus
    CommonOpts build_common;
    std::string build_dump, build_toolchains;
    BuildConfig build_config;
    std::string build_tags = "c,c++";
    auto* build = app.add_subcommand("build-corpus",
                                     "Compile-validate a Q&A page dump into a paired dataset");
    add_common(build, build_common);
    build->add_option("--dump", build_dump, "Directory tree of HTML pages")->required();
    build->add_option("--tags", build_tags, "Comma-separated page tag filter (empty = all)");
    build->add_option("--toolchains", build_toolchains, "Toolchain config JSON file");
    build->add_option("--max-span", build_config.max_span,
                      "Longest contiguous snippet span enumerated per post (0 = unlimited)");
    build->add_option("--name", build_config.dataset_name, "Dataset name");

    // evaluate
    CommonOpts eval_common;
    std::string eval_dataset, eval_metric = "cosine";
    ProviderOpts eval_providers;
    PairBudget eval_budget;
    auto* evaluate = app.add_subcommand("evaluate", "Score a dataset's learnability");
    add_common(evaluate, eval_common);
    evaluate->add_option("--dataset", eval_dataset, "Dataset JSONL path")->required();
    evaluate->add_option("--input-provider", eval_providers.input_spec,
                         "hash:<dim>, cmd:<command>, or http(s) URL")->required();
    evaluate->add_option("--output-provider", eval_providers.output_spec,
                         "hash:<dim>, cmd:<command>, or http(s) URL")->required();
    evaluate->add_option("--pairs-initial", eval_budget.initial, "Initial pair count");
    evaluate->add_option("--pairs-cap", eval_budget.cap, "Pair growth cap");
    evaluate->add_option("--metric", eval_metric, "cosine or euclidean");
    evaluate->add_option("--provider-timeout", eval_providers.timeout_seconds,
                         "Provider timeout in seconds");
    evaluate->add_option("--expected-dim", eval_providers.expected_dim,
                         "Expected embedding dimension (0 = infer)");
    evaluate->add_option("--cache-dir", eval_providers.cache_dir,
                         "On-disk embedding cache directory");

    // degrade-sweep
    CommonOpts sweep_common;
    std::string sweep_dataset, sweep_metric = "cosine";
    ProviderOpts sweep_providers;
    PairBudget sweep_budget;
    std::vector<double> sweep_fractions;
    auto* sweep = app.add_subcommand("degrade-sweep",
                                     "Corrupt labels at fixed fractions and re-score");
    add_common(sweep, sweep_common);
    sweep->add_option("--dataset", sweep_dataset, "Dataset JSONL path")->required();
    sweep->add_option("--input-provider", sweep_providers.input_spec, "Provider spec")->required();
    sweep->add_option("--output-provider", sweep_providers.output_spec, "Provider spec")
        ->required();
    sweep->add_option("--pairs-initial", sweep_budget.initial, "Initial pair count");
    sweep->add_option("--pairs-cap", sweep_budget.cap, "Pair growth cap");
    sweep->add_option("--metric", sweep_metric, "cosine or euclidean");
    sweep->add_option("--fractions", sweep_fractions,
                      "Degradation fractions in [0,1], ascending")->delimiter(',');
    sweep->add_option("--provider-timeout", sweep_providers.timeout_seconds,
                      "Provider timeout in seconds");
    sweep->add_option("--cache-dir", sweep_providers.cache_dir, "Embedding cache directory");

    // survey sample|tally
    auto* survey = app.add_subcommand("survey", "Human adjudication tooling");
    survey->require_subcommand(1);
    CommonOpts ssample_common;
    std::string ssample_dataset, ssample_pairs, ssample_adjudicators;
    double ssample_in_thr = kDefaultInputThreshold, ssample_out_thr = kDefaultOutputThreshold;
    std::size_t ssample_per_side = kDefaultPerSide;
    auto* ssample = survey->add_subcommand("sample", "Select near pairs and export sheets");
    add_common(ssample, ssample_common);
    ssample->add_option("--dataset", ssample_dataset, "Dataset JSONL path")->required();
    ssample->add_option("--pairs", ssample_pairs, "Pair-record CSV from evaluate")->required();
    ssample->add_option("--input-threshold", ssample_in_thr, "Input-space distance threshold");
    ssample->add_option("--output-threshold", ssample_out_thr, "Output-space distance threshold");
    ssample->add_option("--per-side", ssample_per_side, "Pairs to sample per side");
    ssample->add_option("--adjudicators", ssample_adjudicators,
                        "Comma-separated adjudicator names for round-robin assignment");

    CommonOpts stally_common;
    std::string stally_sheet;
    auto* stally = survey->add_subcommand("tally", "Tally labeled adjudication sheets");
    add_common(stally, stally_common);
    stally->add_option("--sheet", stally_sheet, "Labeled survey sheet CSV")->required();

    // summary-agreement
    CommonOpts agree_common;
    std::string agree_generated, agree_reference, agree_metric = "cosine";
    ProviderOpts agree_providers;
    PairBudget agree_budget;
    auto* agree = app.add_subcommand(
        "summary-agreement", "Correlate generated summaries against reference summaries");
    add_common(agree, agree_common);
    agree->add_option("--generated", agree_generated, "Generated-summary dataset")->required();
    agree->add_option("--reference", agree_reference, "Reference-summary dataset")->required();
    agree->add_option("--provider", agree_providers.input_spec, "Text provider spec")->required();
    agree->add_option("--pairs-initial", agree_budget.initial, "Initial pair count");
    agree->add_option("--pairs-cap", agree_budget.cap, "Pair growth cap");
    agree->add_option("--metric", agree_metric, "cosine or euclidean");
    agree->add_option("--provider-timeout", agree_providers.timeout_seconds,
                      "Provider timeout in seconds");
    agree->add_option("--cache-dir", agree_providers.cache_dir, "Embedding cache directory");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        merge_config_file(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    try {
        std::reverse(args.begin(), args.end()); // CLI11 consumes reversed args
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (build->parsed()) {
            build_config.tag_filter = split_commas(build_tags);
            return cmd_build_corpus(build_common, build_dump, build_config, build_toolchains);
        }
        if (evaluate->parsed())
            return cmd_evaluate(eval_common, eval_dataset, eval_providers, eval_budget,
                                eval_metric);
        if (sweep->parsed())
            return cmd_degrade_sweep(sweep_common, sweep_dataset, sweep_providers, sweep_budget,
                                     sweep_metric, sweep_fractions);
        if (ssample->parsed())
            return cmd_survey_sample(ssample_common, ssample_dataset, ssample_pairs,
                                     ssample_in_thr, ssample_out_thr, ssample_per_side,
                                     split_commas(ssample_adjudicators));
        if (stally->parsed()) return cmd_survey_tally(stally_common, stally_sheet);
        if (agree->parsed())
            return cmd_summary_agreement(agree_common, agree_generated, agree_reference,
                                         agree_providers, agree_budget, agree_metric);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
