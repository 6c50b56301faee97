#include "voice/harness/suite.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include <unistd.h>

using namespace voice;
using namespace voice::harness;
namespace fs = std::filesystem;

namespace {

const fs::path kSourceDir = VOICE_SOURCE_DIR;

ordered_json read_json(const fs::path& p) {
    std::ifstream in(p);
    return ordered_json::parse(in);
}

ordered_json s08() { return read_json(kSourceDir / "scenarios/s08-mimic-infection.json"); }

CaseResult result(bool stroke_truth, bool stroke_pred, bool lvo_truth = false, bool lvo_pred = false) {
    CaseResult r;
    r.stroke_truth = stroke_truth;
    r.stroke_pred = stroke_pred;
    r.lvo_truth = lvo_truth;
    r.lvo_pred = lvo_pred;
    return r;
}

}  // namespace

TEST(Rounding, PercentHalfAwayFromZero) {
    EXPECT_EQ(percent_half_away(1, 8), 13);  // 12.5
    EXPECT_EQ(percent_half_away(1, 3), 33);
    EXPECT_EQ(percent_half_away(6, 7), 86);
    EXPECT_EQ(percent_half_away(5, 6), 83);
    EXPECT_EQ(percent_half_away(0, 4), 0);
    EXPECT_EQ(percent_half_away(4, 4), 100);
}

TEST(RoundingProperty, PercentMatchesFloorOfShiftedValue) {
    for (std::int64_t den = 1; den <= 60; ++den) {
        for (std::int64_t num = 0; num <= den; ++num) {
            // Oracle: floor(100 * num / den + 1/2) computed in long double,
            // with exact halves checked separately.
            const std::int64_t scaled = 100 * num;
            const bool exact_half = (2 * scaled) % den == 0 && (2 * scaled / den) % 2 == 1;
            const std::int64_t want = exact_half ? (scaled * 2 / den + 1) / 2
                                                 : static_cast<std::int64_t>(std::floor(static_cast<long double>(scaled) / den + 0.5L));
            ASSERT_EQ(percent_half_away(num, den), want) << num << "/" << den;
        }
    }
}

TEST(Rounding, DecimalText) {
    EXPECT_EQ(decimal_half_away(14, 3, 2), "4.67");
    EXPECT_EQ(decimal_half_away(9, 2, 1), "4.5");
    EXPECT_EQ(decimal_half_away(1, 8, 2), "0.13");
    EXPECT_EQ(decimal_half_away(0, 5, 1), "0.0");
    EXPECT_EQ(decimal_half_away(433, 2, 1), "216.5");
}

TEST(Rational, UndefinedWhenDenominatorIsZero) {
    EXPECT_FALSE(Rational{}.percent().has_value());
    EXPECT_TRUE(Rational{}.to_json()["percent"].is_null());
    EXPECT_EQ(Rational({3, 4}).to_json()["percent"], 75);
}

TEST(ConfusionProperty, CountsEveryLabelPatternExactly) {
    for (int n = 0; n <= 6; ++n) {
        for (int mask = 0; mask < (1 << (2 * n)); ++mask) {
            std::vector<std::pair<bool, bool>> pairs;
            int tp = 0, fn = 0, fp = 0, tn = 0;
            for (int i = 0; i < n; ++i) {
                const bool truth = (mask >> (2 * i)) & 1;
                const bool pred = (mask >> (2 * i + 1)) & 1;
                pairs.emplace_back(truth, pred);
                if (truth && pred) ++tp;
                if (truth && !pred) ++fn;
                if (!truth && pred) ++fp;
                if (!truth && !pred) ++tn;
            }
            const Confusion c = confusion_from_pairs(pairs);
            ASSERT_EQ(c, (Confusion{tp, fn, fp, tn}));
            ASSERT_EQ(c.sensitivity(), (Rational{tp, tp + fn}));
            ASSERT_EQ(c.specificity(), (Rational{tn, tn + fp}));
            ASSERT_EQ(c.accuracy().den, n);
        }
    }
}

TEST(Confusion, LvoIsCountedOverTrueStrokes) {
    const std::vector<CaseResult> rs{result(true, true, true, true), result(true, true, false, true),
                                     result(false, false, false, true), result(false, false, false, false)};
    const Confusion lvo = confusion_metrics(rs, Label::lvo);
    EXPECT_EQ(lvo, (Confusion{1, 0, 1, 0}));
    EXPECT_EQ(lvo_all_cases(rs), (Confusion{1, 0, 2, 1}));
    EXPECT_EQ(confusion_metrics(rs, Label::stroke), (Confusion{2, 0, 0, 2}));
}

TEST(Concordance, RejectsEmptyInput) {
    EXPECT_THROW(component_concordance({}), std::invalid_argument);
}

TEST(Deltas, BucketsAbsoluteDifferences) {
    std::vector<CaseResult> rs(4);
    rs[0].ai_total = 3, rs[0].total_delta = 0;
    rs[1].ai_total = 5, rs[1].total_delta = -2;
    rs[2].ai_total = 7, rs[2].total_delta = 2;
    rs[3].total_delta = -1;  // incomplete
    const auto d = total_score_deltas(rs);
    EXPECT_EQ(d.at("0"), 1);
    EXPECT_EQ(d.at("2"), 2);
    EXPECT_EQ(d.at("1"), 1);
    EXPECT_EQ(d.at("incomplete"), 1);
}

TEST(Statistics, TimingMeanAndSampleSd) {
    const auto t = timing_stats({333, 375, 417});
    EXPECT_DOUBLE_EQ(t.mean_s, 375.0);
    ASSERT_TRUE(t.sd_s);
    EXPECT_DOUBLE_EQ(*t.sd_s, 42.0);
    EXPECT_FALSE(timing_stats({100}).sd_s.has_value());
    EXPECT_THROW(timing_stats({}), std::invalid_argument);
}

TEST(Statistics, NearestRankPercentile) {
    const std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    EXPECT_EQ(nearest_rank_percentile(v, 1, 4), 3);
    EXPECT_EQ(nearest_rank_percentile(v, 3, 4), 8);
    EXPECT_EQ(nearest_rank_percentile(v, 0, 1), 1);
    EXPECT_EQ(nearest_rank_percentile(v, 1, 1), 10);
    EXPECT_EQ(nearest_rank_percentile({4}, 1, 2), 4);
}

TEST(Statistics, LikertSummary) {
    const auto odd = likert_summary({5, 5, 4});
    EXPECT_DOUBLE_EQ(odd.median, 5.0);
    EXPECT_EQ(odd.mean, (Rational{14, 3}));
    EXPECT_EQ(odd.n, 3u);
    const auto even = likert_summary({5, 4, 5, 4, 5, 4, 5, 4, 4, 5});
    EXPECT_DOUBLE_EQ(even.median, 4.5);
    EXPECT_EQ(even.iqr_low, 4);
    EXPECT_EQ(even.iqr_high, 5);
    EXPECT_THROW(likert_summary({}), std::invalid_argument);
    EXPECT_THROW(likert_summary({0, 3}), std::invalid_argument);
    EXPECT_THROW(likert_summary({6}), std::invalid_argument);
}

TEST(Scenario, ShippedSetMatchesStudyMix) {
    const auto all = load_scenarios(kSourceDir / "scenarios", true);
    ASSERT_EQ(all.size(), 10u);
    const StudyMix m = study_mix(all);
    EXPECT_EQ(m.cases, 10);
    EXPECT_EQ(m.strokes, 7);
    EXPECT_EQ(m.lvo, 4);
    EXPECT_EQ(m.mimics, 3);
    EXPECT_EQ(m.posterior, 1);
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end(),
                               [](const Scenario& a, const Scenario& b) { return a.scenario_id < b.scenario_id; }));
    for (const auto& s : all) EXPECT_TRUE(fs::exists(s.script_path)) << s.scenario_id;
}

TEST(Scenario, ParsesFixture) {
    const Scenario s = parse_scenario(s08(), kSourceDir / "scenarios");
    EXPECT_EQ(s.truth.mimic, MimicKind::infection);
    EXPECT_EQ(s.truth.total, 1);
    EXPECT_FALSE(s.truth.stroke);
    ASSERT_EQ(s.faults.size(), 1u);
    EXPECT_EQ(s.faults[0].kind, scripted::FaultKind::hallucinate_field);
    EXPECT_EQ(s.user_confidence, 4);
    EXPECT_TRUE(s.script_path.is_absolute());
}

TEST(Scenario, RejectsInconsistentGroundTruth) {
    const fs::path base = kSourceDir / "scenarios";
    auto wrong_score = s08();
    wrong_score["ground_truth"]["scores"]["speech"] = 2;
    EXPECT_THROW(parse_scenario(wrong_score, base), ScenarioError);

    auto wrong_total = s08();
    wrong_total["ground_truth"]["total"] = 3;
    EXPECT_THROW(parse_scenario(wrong_total, base), ScenarioError);

    auto stroke_mimic = s08();
    stroke_mimic["ground_truth"]["stroke"] = true;
    EXPECT_THROW(parse_scenario(stroke_mimic, base), ScenarioError);

    auto lvo_without_stroke = s08();
    lvo_without_stroke["ground_truth"]["mimic"] = "none";
    lvo_without_stroke["ground_truth"]["lvo"] = true;
    EXPECT_THROW(parse_scenario(lvo_without_stroke, base), ScenarioError);

    auto bad_schema = s08();
    bad_schema["schema"] = "voice-scenario/2";
    EXPECT_THROW(parse_scenario(bad_schema, base), ScenarioError);

    auto bad_confidence = s08();
    bad_confidence["user_confidence"] = 9;
    EXPECT_THROW(parse_scenario(bad_confidence, base), ScenarioError);
}

TEST(Scenario, StudyMixIsEnforced) {
    const fs::path dir = fs::temp_directory_path() / ("voice-mix-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto doc = s08();
    doc["script"] = (kSourceDir / "scripts/s08-mimic-infection.json").string();
    std::ofstream(dir / "only.json") << doc.dump();
    EXPECT_THROW(load_scenarios(dir, true), ScenarioError);
    EXPECT_EQ(load_scenarios(dir, false).size(), 1u);
    fs::remove_all(dir);
}

TEST(Survey, LoadsShippedRatings) {
    EXPECT_EQ(load_survey(kSourceDir / "scenarios/feedback/survey.json").user_ease, (std::vector<int>{5, 5, 4}));
}

TEST(Driver, CleanTable1MatchesGroundTruth) {
    const auto agents = std::make_shared<const agents::AgentTable>(agents::AgentTable::defaults());
    const Scenario s = load_scenario(kSourceDir / "scenarios/s01-table1.json");
    for (auto mode : {InputMode::text, InputMode::voice}) {
        DriveOptions o;
        o.mode = mode;
        CaseRun run;
        const CaseResult r = run_case(s, agents, o, &run);
        ASSERT_FALSE(r.errored) << r.error;
        for (bool m : r.component_match) EXPECT_TRUE(m);
        EXPECT_EQ(r.total_delta, 0);
        EXPECT_TRUE(r.stroke_pred && r.lvo_pred);
        for (const auto& [field, ok] : r.ancillary_match) EXPECT_TRUE(ok) << field;
        EXPECT_EQ(run.reprompts, 0);
    }
}

TEST(Driver, TextAndVoiceModesProduceTheSameAssessment) {
    const auto agents = std::make_shared<const agents::AgentTable>(agents::AgentTable::defaults());
    const Scenario s = load_scenario(kSourceDir / "scenarios/s03-right-hemisphere-lvo.json");
    DriveOptions text, voice_mode;
    voice_mode.mode = InputMode::voice;
    const CaseRun a = drive_case(s, agents, text);
    const CaseRun b = drive_case(s, agents, voice_mode);
    ASSERT_TRUE(a.report && b.report);
    EXPECT_EQ(a.report->assessment, b.report->assessment);
}

TEST(Metrics, JsonHasStableShape) {
    const auto agents = std::make_shared<const agents::AgentTable>(agents::AgentTable::defaults());
    SuiteOptions o;
    o.survey = load_survey(kSourceDir / "scenarios/feedback/survey.json");
    const SuiteRun suite = run_suite(load_scenarios(kSourceDir / "scenarios"), agents, o);
    const auto j = ordered_json::parse(suite.metrics_json);
    EXPECT_EQ(j["schema"], kMetricsSchema);
    for (const char* key : {"cases", "errored", "component_concordance", "total_score_deltas", "stroke", "lvo",
                            "ancillary_accuracy", "timing", "user_confidence", "user_ease", "per_case"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["per_case"].size(), 10u);
    EXPECT_FALSE(format_metrics_table(suite.metrics).empty());
}
