#pragma once

#include "voice/assessment/report.hpp"
#include "voice/harness/scenario.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace voice::harness {

inline constexpr std::string_view kMetricsSchema = "voice-metrics/1";

/// An exact fraction. A zero denominator means the metric is undefined.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 0;

    bool defined() const { return den != 0; }
    /// Integer percent, rounded half away from zero; nullopt when undefined.
    std::optional<std::int64_t> percent() const;
    ordered_json to_json() const;

    friend bool operator==(const Rational&, const Rational&) = default;
};

/// round(100 * num / den) with halves rounded away from zero. den > 0.
std::int64_t percent_half_away(std::int64_t num, std::int64_t den);

/// `num / den` rounded half away from zero to `decimals` places, as text.
std::string decimal_half_away(std::int64_t num, std::int64_t den, int decimals);

inline constexpr std::array<std::string_view, 7> kAncillaryFields{
    "sex", "age", "last_known_well", "symptom_onset", "anticoagulants", "prior_stroke", "glucose"};

struct CaseResult {
    std::string scenario_id;
    bool errored = false;
    std::string error;
    std::optional<assessment::Report> report;

    std::array<bool, 5> component_match{};  // indexed by Component
    std::optional<int> ai_total;            // nullopt when the AI total is incomplete
    int ai_partial_sum = 0;
    int truth_total = 0;
    int total_delta = 0;  // ai partial sum minus truth total
    bool stroke_truth = false;
    bool stroke_pred = false;
    bool lvo_truth = false;
    bool lvo_pred = false;
    std::map<std::string, bool, std::less<>> ancillary_match;
    std::int64_t duration_s = 0;
    std::optional<int> user_confidence;
    std::vector<std::string> discrepancy_kinds;
};

/// Field-by-field comparison of a report against the scenario's ground truth.
CaseResult evaluate_case(const Scenario& scenario, const assessment::Report& report);
CaseResult errored_case(const Scenario& scenario, std::string error);

struct Confusion {
    int tp = 0, fn = 0, fp = 0, tn = 0;

    Rational sensitivity() const { return {tp, tp + fn}; }
    Rational specificity() const { return {tn, tn + fp}; }
    Rational accuracy() const { return {tp + tn, tp + tn + fp + fn}; }
    ordered_json to_json() const;

    friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Counts (truth, prediction) pairs.
Confusion confusion_from_pairs(const std::vector<std::pair<bool, bool>>& pairs);

enum class Label { stroke, lvo };

/// Stroke is counted over every case. LVO is counted over the true strokes,
/// so a mimic never enters the LVO specificity.
Confusion confusion_metrics(const std::vector<CaseResult>& results, Label label);
/// LVO labels counted over every case, stroke or not.
Confusion lvo_all_cases(const std::vector<CaseResult>& results);

struct Concordance {
    std::array<Rational, 5> per_component{};
    Rational pooled;
};

/// Component match rates. Throws std::invalid_argument on an empty list.
Concordance component_concordance(const std::vector<CaseResult>& results);

/// Counts by |AI total - truth total| keyed "0", "1", ... An incomplete AI
/// total is measured on its partial sum and also counted under "incomplete".
std::map<std::string, int> total_score_deltas(const std::vector<CaseResult>& results);

struct TimingStats {
    double mean_s = 0.0;
    std::optional<double> sd_s;  // needs at least two samples
};

/// Arithmetic mean and sample (n - 1) standard deviation.
/// Throws std::invalid_argument on an empty list.
TimingStats timing_stats(const std::vector<double>& durations_s);

struct LikertSummary {
    double median = 0.0;
    int iqr_low = 0;
    int iqr_high = 0;
    Rational mean;  // exact; render with decimal_half_away
    std::size_t n = 0;
};

/// Value at nearest rank ceil(p * n) of an ascending list (rank at least 1).
int nearest_rank_percentile(const std::vector<int>& sorted, std::int64_t p_num, std::int64_t p_den);

/// Median (midpoint for even n), nearest-rank quartiles and exact mean.
/// Throws std::invalid_argument when empty or a value lies outside 1..5.
LikertSummary likert_summary(std::vector<int> values);

struct MetricsReport {
    std::vector<CaseResult> cases;  // sorted by scenario id
    Concordance concordance;
    std::map<std::string, int> total_deltas;
    Confusion stroke;
    Confusion lvo;
    Confusion lvo_all;
    std::map<std::string, Rational, std::less<>> ancillary;
    std::optional<TimingStats> timing;
    std::optional<LikertSummary> confidence;
    std::optional<LikertSummary> ease;
    int errored = 0;
};

MetricsReport compute_metrics(std::vector<CaseResult> results, const std::optional<Survey>& survey = std::nullopt);

/// Canonical metrics.json text (stable key order, two-space indent).
std::string metrics_to_json(const MetricsReport& report);

/// Human-readable summary table.
std::string format_metrics_table(const MetricsReport& report);

}  // namespace voice::harness
