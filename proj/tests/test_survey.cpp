#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edckit/error.hpp"
#include "edckit/rng.hpp"
#include "edckit/survey.hpp"

#include <algorithm>
#include <map>

using namespace edckit;

namespace {

Dataset pool_dataset(std::size_t n) {
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < n; ++i)
        samples.push_back(Sample{"s" + std::to_string(i), InputKind::text,
                                 "input text " + std::to_string(i),
                                 "output text " + std::to_string(i), {}});
    return Dataset("pool", std::move(samples));
}

std::vector<PairDistanceRecord> records_with(std::size_t n, double input_d, double output_d) {
    std::vector<PairDistanceRecord> records;
    for (std::size_t i = 0; i + 1 < 2 * n; i += 2)
        records.push_back({"s" + std::to_string(i), "s" + std::to_string(i + 1), input_d,
                           output_d});
    return records;
}

std::vector<AdjudicationItem> labeled_fixture(std::size_t agree, std::size_t unsure,
                                              std::size_t disagree, SurveySide side,
                                              const Dataset& pool) {
    std::vector<PairDistanceRecord> records = records_with(agree + unsure + disagree, 0.1, 0.1);
    SurveySelection sel = select_survey_pairs(records, pool, 0.2, 0.5,
                                              agree + unsure + disagree, 1);
    std::vector<AdjudicationItem> items;
    for (const AdjudicationItem& item : sel.items)
        if (item.side == side) items.push_back(item);
    REQUIRE(items.size() == agree + unsure + disagree);
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i < agree) items[i].label = SurveyLabel::agree;
        else if (i < agree + unsure) items[i].label = SurveyLabel::unsure;
        else items[i].label = SurveyLabel::disagree;
    }
    return items;
}

} // namespace

TEST_CASE("thresholds filter each side") {
    Dataset pool = pool_dataset(400);

    SUBCASE("nothing qualifies on the input side") {
        auto records = records_with(50, 0.9, 0.9);
        SurveySelection sel = select_survey_pairs(records, pool);
        CHECK(sel.items.empty());
        CHECK(sel.warnings.size() == 2);
    }
    SUBCASE("150 qualifying input pairs, select exactly 100 under threshold") {
        auto records = records_with(150, 0.15, 0.9);
        SurveySelection sel = select_survey_pairs(records, pool, 0.2, 0.5, 100, 3);
        std::size_t input_items = 0;
        for (const AdjudicationItem& item : sel.items) {
            REQUIRE(item.side == SurveySide::input_space);
            CHECK(item.pair.input_distance < 0.2);
            ++input_items;
        }
        CHECK(input_items == 100);
    }
    SUBCASE("defaults reproduce the 100+100 design") {
        auto records = records_with(180, 0.1, 0.3);
        SurveySelection sel = select_survey_pairs(records, pool);
        std::size_t in_count = 0, out_count = 0;
        for (const AdjudicationItem& item : sel.items) {
            if (item.side == SurveySide::input_space) ++in_count;
            else ++out_count;
        }
        CHECK(in_count == 100);
        CHECK(out_count == 100);
    }
    SUBCASE("selected texts come from the right side") {
        auto records = records_with(20, 0.1, 0.9);
        SurveySelection sel = select_survey_pairs(records, pool, 0.2, 0.5, 5, 3);
        for (const AdjudicationItem& item : sel.items) {
            CHECK(item.text_a.rfind("input text", 0) == 0);
            CHECK(item.text_b.rfind("input text", 0) == 0);
        }
    }
}

TEST_CASE("round-robin assignment") {
    Dataset pool = pool_dataset(300);
    auto records = records_with(100, 0.1, 0.9);
    SurveySelection sel = select_survey_pairs(records, pool, 0.2, 0.5, 100, 7);
    REQUIRE(sel.items.size() == 100);

    SUBCASE("100 items over 4 adjudicators gives four sets of 25") {
        assign_adjudicators(sel.items, {"a1", "a2", "a3", "a4"});
        std::map<std::string, int> counts;
        for (const AdjudicationItem& item : sel.items) ++counts[*item.adjudicator];
        REQUIRE(counts.size() == 4);
        for (const auto& [name, c] : counts) CHECK(c == 25);
    }
    SUBCASE("5 items over 2 adjudicators gives 3 and 2") {
        std::vector<AdjudicationItem> five(sel.items.begin(), sel.items.begin() + 5);
        assign_adjudicators(five, {"x", "y"});
        int x = 0, y = 0;
        for (const AdjudicationItem& item : five) (*item.adjudicator == "x" ? x : y)++;
        CHECK(x == 3);
        CHECK(y == 2);
    }
    SUBCASE("assignment is deterministic in item order") {
        auto copy = sel.items;
        assign_adjudicators(sel.items, {"a", "b", "c"});
        assign_adjudicators(copy, {"a", "b", "c"});
        for (std::size_t i = 0; i < copy.size(); ++i)
            CHECK(*copy[i].adjudicator == *sel.items[i].adjudicator);
    }
    SUBCASE("empty adjudicator list rejected") {
        CHECK_THROWS_AS(assign_adjudicators(sel.items, {}), Error);
    }
}

TEST_CASE("tallies reproduce the reference survey counts") {
    Dataset pool = pool_dataset(400);
    auto input_items = labeled_fixture(42, 12, 46, SurveySide::input_space, pool);
    SurveyTally t1 = tally_survey(input_items);
    CHECK(t1.input_space.agree == 42);
    CHECK(t1.input_space.unsure == 12);
    CHECK(t1.input_space.disagree == 46);

    // output side: qualify only the output threshold
    std::vector<PairDistanceRecord> records = records_with(100, 0.9, 0.2);
    SurveySelection sel = select_survey_pairs(records, pool, 0.2, 0.5, 100, 2);
    REQUIRE(sel.items.size() == 100);
    for (std::size_t i = 0; i < sel.items.size(); ++i) {
        if (i < 20) sel.items[i].label = SurveyLabel::agree;
        else if (i < 30) sel.items[i].label = SurveyLabel::unsure;
        else sel.items[i].label = SurveyLabel::disagree;
    }
    SurveyTally t2 = tally_survey(sel.items);
    CHECK(t2.output_space.agree == 20);
    CHECK(t2.output_space.unsure == 10);
    CHECK(t2.output_space.disagree == 70);

    std::string json = tally_to_json(t2);
    CHECK(json.find("\"disagree\": 70") != std::string::npos);
    CHECK(json.find("\"pct_disagree\": 70.0") != std::string::npos);
}

TEST_CASE("tally is permutation invariant and rejects unlabeled items") {
    Dataset pool = pool_dataset(100);
    auto items = labeled_fixture(5, 3, 2, SurveySide::input_space, pool);
    SurveyTally before = tally_survey(items);
    std::mt19937_64 rng = make_rng(2);
    shuffle_vec(items, rng);
    SurveyTally after = tally_survey(items);
    CHECK(before.input_space.agree == after.input_space.agree);
    CHECK(before.input_space.unsure == after.input_space.unsure);
    CHECK(before.input_space.disagree == after.input_space.disagree);

    items[3].label.reset();
    try {
        tally_survey(items);
        FAIL("expected unlabeled error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(items[3].pair.id_a) != std::string::npos);
    }
}

TEST_CASE("sheet CSV export/import round trip with hostile text") {
    Dataset pool("pool", {Sample{"a", InputKind::text, "first, \"quoted\"\nline", "out a", {}},
                          Sample{"b", InputKind::text, "second", "out b", {}}});
    std::vector<PairDistanceRecord> records = {{"a", "b", 0.05, 0.9}};
    SurveySelection sel = select_survey_pairs(records, pool, 0.2, 0.5, 10, 1);
    REQUIRE(sel.items.size() == 1);
    assign_adjudicators(sel.items, {"reviewer one"});
    sel.items[0].label = SurveyLabel::unsure;

    std::string csv = survey_sheet_to_csv(sel.items);
    auto back = survey_sheet_from_csv(csv);
    REQUIRE(back.size() == 1);
    CHECK(back[0].item_id == sel.items[0].item_id);
    CHECK(back[0].side == SurveySide::input_space);
    CHECK(back[0].text_a == "first, \"quoted\"\nline");
    CHECK(*back[0].adjudicator == "reviewer one");
    CHECK(*back[0].label == SurveyLabel::unsure);
    CHECK(back[0].pair.input_distance == 0.05);

    SurveyTally tally = tally_survey(back);
    CHECK(tally.input_space.unsure == 1);
}

TEST_CASE("labels parse leniently but strictly by value") {
    CHECK(survey_label_from_string(" Agree ") == SurveyLabel::agree);
    CHECK(survey_label_from_string("UNSURE") == SurveyLabel::unsure);
    CHECK_THROWS_AS(survey_label_from_string("maybe"), Error);
}

TEST_CASE("overlapping pairs counted when both sides pick them") {
    Dataset pool = pool_dataset(40);
    auto records = records_with(10, 0.1, 0.1); // qualify on both sides
    SurveySelection sel = select_survey_pairs(records, pool, 0.2, 0.5, 10, 5);
    CHECK(sel.items.size() == 20);
    CHECK(sel.overlap_count == 10);
}
