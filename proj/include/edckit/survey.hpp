#pragma once

#include "edckit/dataset.hpp"
#include "edckit/edc.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edckit {

enum class SurveySide { input_space, output_space };
enum class SurveyLabel { agree, unsure, disagree };

std::string to_string(SurveySide side);
SurveySide survey_side_from_string(const std::string& s);
std::string to_string(SurveyLabel label);
SurveyLabel survey_label_from_string(const std::string& s);

// One pair queued for human adjudication. side records which distance put it
// below threshold; text_a/text_b are that side's member texts.
struct AdjudicationItem {
    std::string item_id;
    PairDistanceRecord pair;
    SurveySide side = SurveySide::input_space;
    std::string text_a;
    std::string text_b;
    std::optional<std::string> adjudicator;
    std::optional<SurveyLabel> label;
};

struct SurveySelection {
    std::vector<AdjudicationItem> items;
    std::vector<std::string> warnings;
    std::size_t overlap_count = 0; // pairs selected on both sides
};

constexpr double kDefaultInputThreshold = 0.2;
constexpr double kDefaultOutputThreshold = 0.5;
constexpr std::size_t kDefaultPerSide = 100;

// Samples up to n_per_side pairs with input_distance < input_threshold
// (tagged input_space) and up to n_per_side with output_distance <
// output_threshold (tagged output_space), uniformly without replacement per
// side. A short side produces a warning, never an error.
SurveySelection select_survey_pairs(const std::vector<PairDistanceRecord>& records,
                                    const Dataset& dataset,
                                    double input_threshold = kDefaultInputThreshold,
                                    double output_threshold = kDefaultOutputThreshold,
                                    std::size_t n_per_side = kDefaultPerSide,
                                    std::uint64_t seed = 0);

// Round-robin in item order; set sizes differ by at most one.
void assign_adjudicators(std::vector<AdjudicationItem>& items,
                         const std::vector<std::string>& adjudicators);

struct SideTally {
    std::size_t agree = 0;
    std::size_t unsure = 0;
    std::size_t disagree = 0;
    std::size_t total() const { return agree + unsure + disagree; }
};

struct SurveyTally {
    SideTally input_space;
    SideTally output_space;
};

// Counts labels per side; throws naming the pair ids of any unlabeled item.
SurveyTally tally_survey(const std::vector<AdjudicationItem>& items);

std::string tally_to_json(const SurveyTally& tally);

// Adjudication sheet: item_id, side, id_a, id_b, distance, text_a, text_b,
// adjudicator, label — RFC-4180, editable in any spreadsheet tool.
std::string survey_sheet_to_csv(const std::vector<AdjudicationItem>& items);
std::vector<AdjudicationItem> survey_sheet_from_csv(const std::string& text);

} // namespace edckit
