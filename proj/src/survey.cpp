#include "edckit/survey.hpp"

#include "edckit/csv.hpp"
#include "edckit/error.hpp"
#include "edckit/rng.hpp"
#include "edckit/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_map>

namespace edckit {

std::string to_string(SurveySide side) {
    return side == SurveySide::input_space ? "input_space" : "output_space";
}

SurveySide survey_side_from_string(const std::string& s) {
    if (s == "input_space") return SurveySide::input_space;
    if (s == "output_space") return SurveySide::output_space;
    throw Error("unknown survey side: \"" + s + "\"");
}

std::string to_string(SurveyLabel label) {
    switch (label) {
    case SurveyLabel::agree: return "agree";
    case SurveyLabel::unsure: return "unsure";
    default: return "disagree";
    }
}

SurveyLabel survey_label_from_string(const std::string& s) {
    std::string t = to_lower(trim(s));
    if (t == "agree") return SurveyLabel::agree;
    if (t == "unsure") return SurveyLabel::unsure;
    if (t == "disagree") return SurveyLabel::disagree;
    throw Error("unknown survey label: \"" + s + "\" (want agree/unsure/disagree)");
}

namespace {

std::string item_id_for(SurveySide side, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%04zu", side == SurveySide::input_space ? "in" : "out",
                  index + 1);
    return buf;
}

} // namespace

SurveySelection select_survey_pairs(const std::vector<PairDistanceRecord>& records,
                                    const Dataset& dataset, double input_threshold,
                                    double output_threshold, std::size_t n_per_side,
                                    std::uint64_t seed) {
    if (records.empty()) throw Error("survey selection needs at least one pair record");
    if (n_per_side == 0) throw Error("n_per_side must be positive");

    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < dataset.size(); ++i) by_id.emplace(dataset.at(i).id, i);
    auto text_of = [&](const std::string& id, SurveySide side) -> const std::string& {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw Error("pair record references unknown sample id \"" + id + "\"");
        const Sample& s = dataset.at(it->second);
        return side == SurveySide::input_space ? s.input : s.output;
    };

    SurveySelection selection;
    std::mt19937_64 rng = make_rng(seed);
    std::set<std::pair<std::string, std::string>> chosen_input_pairs;

    for (SurveySide side : {SurveySide::input_space, SurveySide::output_space}) {
        double threshold = side == SurveySide::input_space ? input_threshold : output_threshold;
        std::vector<std::size_t> qualifying;
        for (std::size_t i = 0; i < records.size(); ++i) {
            double d = side == SurveySide::input_space ? records[i].input_distance
                                                       : records[i].output_distance;
            if (d < threshold) qualifying.push_back(i);
        }
        if (qualifying.empty()) {
            selection.warnings.push_back("no pairs qualify on the " + to_string(side) +
                                         " side (threshold " + format_double(threshold) + ")");
            continue;
        }
        if (qualifying.size() < n_per_side)
            selection.warnings.push_back("only " + std::to_string(qualifying.size()) + " of " +
                                         std::to_string(n_per_side) + " requested pairs qualify on the " +
                                         to_string(side) + " side");
        std::size_t take = std::min(n_per_side, qualifying.size());
        std::vector<std::size_t> picked = sample_indices(qualifying.size(), take, rng);
        std::sort(picked.begin(), picked.end());
        for (std::size_t k = 0; k < picked.size(); ++k) {
            const PairDistanceRecord& rec = records[qualifying[picked[k]]];
            AdjudicationItem item;
            item.item_id = item_id_for(side, k);
            item.pair = rec;
            item.side = side;
            item.text_a = text_of(rec.id_a, side);
            item.text_b = text_of(rec.id_b, side);
            selection.items.push_back(std::move(item));
            if (side == SurveySide::input_space) {
                chosen_input_pairs.emplace(rec.id_a, rec.id_b);
            } else if (chosen_input_pairs.count({rec.id_a, rec.id_b})) {
                ++selection.overlap_count;
            }
        }
    }
    return selection;
}

void assign_adjudicators(std::vector<AdjudicationItem>& items,
                         const std::vector<std::string>& adjudicators) {
    if (adjudicators.empty()) throw Error("adjudicator list must be nonempty");
    for (std::size_t i = 0; i < items.size(); ++i)
        items[i].adjudicator = adjudicators[i % adjudicators.size()];
}

SurveyTally tally_survey(const std::vector<AdjudicationItem>& items) {
    SurveyTally tally;
    for (const AdjudicationItem& item : items) {
        if (!item.label)
            throw Error("unlabeled survey item " + item.item_id + " (pair " + item.pair.id_a +
                        ", " + item.pair.id_b + ")");
        SideTally& side =
            item.side == SurveySide::input_space ? tally.input_space : tally.output_space;
        switch (*item.label) {
        case SurveyLabel::agree: ++side.agree; break;
        case SurveyLabel::unsure: ++side.unsure; break;
        case SurveyLabel::disagree: ++side.disagree; break;
        }
    }
    return tally;
}

namespace {

nlohmann::ordered_json side_to_json(const SideTally& side) {
    nlohmann::ordered_json j;
    j["agree"] = side.agree;
    j["unsure"] = side.unsure;
    j["disagree"] = side.disagree;
    double total = static_cast<double>(side.total());
    j["pct_agree"] = total > 0 ? 100.0 * static_cast<double>(side.agree) / total : 0.0;
    j["pct_unsure"] = total > 0 ? 100.0 * static_cast<double>(side.unsure) / total : 0.0;
    j["pct_disagree"] = total > 0 ? 100.0 * static_cast<double>(side.disagree) / total : 0.0;
    return j;
}

} // namespace

std::string tally_to_json(const SurveyTally& tally) {
    nlohmann::ordered_json j;
    j["input_space"] = side_to_json(tally.input_space);
    j["output_space"] = side_to_json(tally.output_space);
    return j.dump(2) + "\n";
}

std::string survey_sheet_to_csv(const std::vector<AdjudicationItem>& items) {
    std::string out = "item_id,side,id_a,id_b,distance,text_a,text_b,adjudicator,label\n";
    for (const AdjudicationItem& item : items) {
        double d = item.side == SurveySide::input_space ? item.pair.input_distance
                                                        : item.pair.output_distance;
        out += csv_row({item.item_id, to_string(item.side), item.pair.id_a, item.pair.id_b,
                        format_double(d), item.text_a, item.text_b,
                        item.adjudicator.value_or(""),
                        item.label ? to_string(*item.label) : ""});
    }
    return out;
}

std::vector<AdjudicationItem> survey_sheet_from_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows = csv_parse(text);
    if (rows.empty()) throw Error("survey sheet is empty");
    const std::vector<std::string> header = {"item_id", "side",   "id_a",        "id_b",
                                             "distance", "text_a", "text_b",
                                             "adjudicator", "label"};
    if (rows.front() != header)
        throw Error("survey sheet header mismatch");
    std::vector<AdjudicationItem> items;
    items.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != header.size())
            throw Error("survey sheet row " + std::to_string(i + 1) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(row.size()));
        AdjudicationItem item;
        item.item_id = row[0];
        item.side = survey_side_from_string(row[1]);
        item.pair.id_a = row[2];
        item.pair.id_b = row[3];
        double d = 0;
        try {
            d = std::stod(row[4]);
        } catch (...) {
            throw Error("survey sheet row " + std::to_string(i + 1) + ": bad distance");
        }
        if (item.side == SurveySide::input_space) item.pair.input_distance = d;
        else item.pair.output_distance = d;
        item.text_a = row[5];
        item.text_b = row[6];
        if (!trim(row[7]).empty()) item.adjudicator = row[7];
        if (!trim(row[8]).empty()) item.label = survey_label_from_string(row[8]);
        items.push_back(std::move(item));
    }
    return items;
}

} // namespace edckit
