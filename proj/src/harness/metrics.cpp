#include "voice/harness/metrics.hpp"

#include "voice/assessment/rubric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace voice::harness {

using namespace assessment;

std::int64_t percent_half_away(std::int64_t num, std::int64_t den) {
    if (den <= 0) throw std::invalid_argument("percent of a non-positive denominator");
    const bool negative = num < 0;
    const std::int64_t a = negative ? -num : num;
    const std::int64_t p = (200 * a + den) / (2 * den);
    return negative ? -p : p;
}

std::string decimal_half_away(std::int64_t num, std::int64_t den, int decimals) {
    if (den <= 0) throw std::invalid_argument("decimal of a non-positive denominator");
    if (decimals < 0 || decimals > 9) throw std::invalid_argument("decimals must be 0..9");
    const bool negative = num < 0;
    std::int64_t scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    const std::int64_t a = negative ? -num : num;
    const std::int64_t scaled = (2 * a * scale + den) / (2 * den);
    std::string out = std::to_string(scaled / scale);
    if (decimals > 0) {
        std::string frac = std::to_string(scaled % scale);
        frac.insert(0, static_cast<std::size_t>(decimals) - frac.size(), '0');
        out += "." + frac;
    }
    return (negative && scaled != 0 ? "-" : "") + out;
}

std::optional<std::int64_t> Rational::percent() const {
    if (!defined()) return std::nullopt;
    return percent_half_away(num, den);
}

ordered_json Rational::to_json() const {
    ordered_json j;
    j["num"] = num;
    j["den"] = den;
    if (auto p = percent()) {
        j["percent"] = *p;
    } else {
        j["percent"] = nullptr;
    }
    return j;
}

namespace {

std::vector<Anticoagulant> drugs(const AncillaryData& a) {
    std::vector<Anticoagulant> out;
    if (a.anticoagulants) {
        for (const auto& e : *a.anticoagulants) out.push_back(e.drug);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool anticoagulants_match(const AncillaryData& ai, const AncillaryData& truth) {
    if (ai.anticoagulants.has_value() != truth.anticoagulants.has_value()) return false;
    return drugs(ai) == drugs(truth) && ai.last_dose_time == truth.last_dose_time;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string percent_text(const Rational& r) {
    if (auto p = r.percent()) return std::to_string(*p) + "% (" + std::to_string(r.num) + "/" + std::to_string(r.den) + ")";
    return "undefined (" + std::to_string(r.num) + "/0)";
}

}  // namespace

CaseResult evaluate_case(const Scenario& scenario, const Report& report) {
    const GroundTruth& truth = scenario.truth;
    const AssessmentState& ai = report.assessment;
    CaseResult r;
    r.scenario_id = scenario.scenario_id;
    r.report = report;

    const ComponentScores ai_scores = score_fast_ed(ai.findings);
    for (Component c : kComponents) {
        r.component_match[static_cast<std::size_t>(c)] = ai_scores[c].has_value() && ai_scores[c] == truth.scores[c];
    }
    const TotalScore total = total_score(ai_scores);
    r.ai_total = total.value();
    r.ai_partial_sum = total.partial_sum;
    r.truth_total = truth.total;
    r.total_delta = total.partial_sum - truth.total;

    r.stroke_truth = truth.stroke;
    r.lvo_truth = truth.lvo;
    r.stroke_pred = ai.stroke_likely.value_or(classify_stroke(ai));
    r.lvo_pred = ai.lvo_likely.value_or(classify_lvo(ai_scores));

    r.ancillary_match["sex"] = ai.demographics.sex == truth.demographics.sex;
    r.ancillary_match["age"] = ai.demographics.age == truth.demographics.age;
    r.ancillary_match["last_known_well"] = ai.time_anchors.last_known_well == truth.times.last_known_well;
    r.ancillary_match["symptom_onset"] = ai.time_anchors.symptom_onset == truth.times.symptom_onset;
    r.ancillary_match["anticoagulants"] = anticoagulants_match(ai.ancillary, truth.ancillary);
    r.ancillary_match["prior_stroke"] = ai.ancillary.prior_stroke == truth.ancillary.prior_stroke;
    r.ancillary_match["glucose"] = ai.ancillary.glucose == truth.ancillary.glucose;

    r.duration_s = report.timing.duration_s();
    r.user_confidence = scenario.user_confidence;
    for (const auto& d : report.discrepancies) r.discrepancy_kinds.push_back(enum_string(d.kind));
    r.errored = report.aborted;
    if (report.aborted) r.error = "session aborted";
    return r;
}

CaseResult errored_case(const Scenario& scenario, std::string error) {
    CaseResult r;
    r.scenario_id = scenario.scenario_id;
    r.errored = true;
    r.error = std::move(error);
    r.stroke_truth = scenario.truth.stroke;
    r.lvo_truth = scenario.truth.lvo;
    r.truth_total = scenario.truth.total;
    r.user_confidence = scenario.user_confidence;
    return r;
}

ordered_json Confusion::to_json() const {
    ordered_json j;
    j["tp"] = tp;
    j["fn"] = fn;
    j["fp"] = fp;
    j["tn"] = tn;
    j["sensitivity"] = sensitivity().to_json();
    j["specificity"] = specificity().to_json();
    j["accuracy"] = accuracy().to_json();
    return j;
}

Confusion confusion_from_pairs(const std::vector<std::pair<bool, bool>>& pairs) {
    Confusion c;
    for (const auto& [truth, pred] : pairs) {
        if (truth) {
            ++(pred ? c.tp : c.fn);
        } else {
            ++(pred ? c.fp : c.tn);
        }
    }
    return c;
}

Confusion confusion_metrics(const std::vector<CaseResult>& results, Label label) {
    std::vector<std::pair<bool, bool>> pairs;
    for (const auto& r : results) {
        if (label == Label::stroke) {
            pairs.emplace_back(r.stroke_truth, r.stroke_pred);
        } else if (r.stroke_truth) {
            pairs.emplace_back(r.lvo_truth, r.lvo_pred);
        }
    }
    return confusion_from_pairs(pairs);
}

Confusion lvo_all_cases(const std::vector<CaseResult>& results) {
    std::vector<std::pair<bool, bool>> pairs;
    for (const auto& r : results) pairs.emplace_back(r.lvo_truth, r.lvo_pred);
    return confusion_from_pairs(pairs);
}

Concordance component_concordance(const std::vector<CaseResult>& results) {
    if (results.empty()) throw std::invalid_argument("component concordance needs at least one result");
    Concordance c;
    for (std::size_t i = 0; i < 5; ++i) {
        c.per_component[i].den = static_cast<std::int64_t>(results.size());
        for (const auto& r : results) c.per_component[i].num += r.component_match[i] ? 1 : 0;
        c.pooled.num += c.per_component[i].num;
        c.pooled.den += c.per_component[i].den;
    }
    return c;
}

std::map<std::string, int> total_score_deltas(const std::vector<CaseResult>& results) {
    std::map<std::string, int> out;
    for (const auto& r : results) {
        ++out[std::to_string(std::abs(r.total_delta))];
        if (!r.ai_total) ++out["incomplete"];
    }
    return out;
}

TimingStats timing_stats(const std::vector<double>& d) {
    if (d.empty()) throw std::invalid_argument("timing statistics need at least one duration");
    TimingStats t;
    const double n = static_cast<double>(d.size());
    t.mean_s = std::accumulate(d.begin(), d.end(), 0.0) / n;
    if (d.size() >= 2) {
        double ss = 0.0;
        for (double x : d) ss += (x - t.mean_s) * (x - t.mean_s);
        t.sd_s = std::sqrt(ss / (n - 1.0));
    }
    return t;
}

int nearest_rank_percentile(const std::vector<int>& sorted, std::int64_t p_num, std::int64_t p_den) {
    if (sorted.empty()) throw std::invalid_argument("percentile of an empty list");
    if (p_den <= 0 || p_num < 0 || p_num > p_den) throw std::invalid_argument("percentile must lie in [0, 1]");
    const auto n = static_cast<std::int64_t>(sorted.size());
    std::int64_t rank = (p_num * n + p_den - 1) / p_den;
    rank = std::clamp<std::int64_t>(rank, 1, n);
    return sorted[static_cast<std::size_t>(rank - 1)];
}

LikertSummary likert_summary(std::vector<int> values) {
    if (values.empty()) throw std::invalid_argument("likert summary needs at least one value");
    for (int v : values) {
        if (v < 1 || v > 5) throw std::invalid_argument("likert values must lie in 1..5");
    }
    std::sort(values.begin(), values.end());
    LikertSummary s;
    s.n = values.size();
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
    s.iqr_low = nearest_rank_percentile(values, 1, 4);
    s.iqr_high = nearest_rank_percentile(values, 3, 4);
    s.mean = {std::accumulate(values.begin(), values.end(), std::int64_t{0}), static_cast<std::int64_t>(values.size())};
    return s;
}

MetricsReport compute_metrics(std::vector<CaseResult> results, const std::optional<Survey>& survey) {
    std::sort(results.begin(), results.end(),
              [](const CaseResult& a, const CaseResult& b) { return a.scenario_id < b.scenario_id; });
    MetricsReport m;
    std::vector<CaseResult> ok;
    for (const auto& r : results) {
        if (r.errored) {
            ++m.errored;
        } else {
            ok.push_back(r);
        }
    }
    m.cases = std::move(results);
    if (!ok.empty()) m.concordance = component_concordance(ok);
    m.total_deltas = total_score_deltas(ok);
    m.stroke = confusion_metrics(ok, Label::stroke);
    m.lvo = confusion_metrics(ok, Label::lvo);
    m.lvo_all = lvo_all_cases(ok);
    for (std::string_view field : kAncillaryFields) {
        Rational r{0, static_cast<std::int64_t>(ok.size())};
        for (const auto& c : ok) {
            auto it = c.ancillary_match.find(field);
            if (it != c.ancillary_match.end() && it->second) ++r.num;
        }
        m.ancillary.emplace(std::string(field), r);
    }
    std::vector<double> durations;
    std::vector<int> confidence;
    for (const auto& c : ok) {
        durations.push_back(static_cast<double>(c.duration_s));
        if (c.user_confidence) confidence.push_back(*c.user_confidence);
    }
    if (!durations.empty()) m.timing = timing_stats(durations);
    if (!confidence.empty()) m.confidence = likert_summary(confidence);
    if (survey && !survey->user_ease.empty()) m.ease = likert_summary(survey->user_ease);
    return m;
}

namespace {

ordered_json likert_json(const LikertSummary& s) {
    ordered_json j;
    j["n"] = s.n;
    j["median"] = s.median;
    j["iqr_low"] = s.iqr_low;
    j["iqr_high"] = s.iqr_high;
    j["mean"] = {{"num", s.mean.num}, {"den", s.mean.den}, {"value", decimal_half_away(s.mean.num, s.mean.den, 2)}};
    return j;
}

}  // namespace

std::string metrics_to_json(const MetricsReport& m) {
    ordered_json j;
    j["schema"] = kMetricsSchema;
    j["cases"] = m.cases.size();
    j["errored"] = m.errored;

    ordered_json conc;
    conc["pooled"] = m.concordance.pooled.to_json();
    for (Component c : kComponents) {
        conc[enum_string(c)] = m.concordance.per_component[static_cast<std::size_t>(c)].to_json();
    }
    j["component_concordance"] = conc;

    ordered_json deltas = ordered_json::object();
    for (const auto& [k, v] : m.total_deltas) deltas[k] = v;
    j["total_score_deltas"] = deltas;

    j["stroke"] = m.stroke.to_json();
    ordered_json lvo = m.lvo.to_json();
    lvo["population"] = "true strokes";
    lvo["accuracy_all_cases"] = m.lvo_all.accuracy().to_json();
    j["lvo"] = lvo;

    ordered_json anc;
    for (std::string_view f : kAncillaryFields) anc[std::string(f)] = m.ancillary.find(f)->second.to_json();
    j["ancillary_accuracy"] = anc;

    if (m.timing) {
        ordered_json t;
        t["mean_s"] = fixed(m.timing->mean_s, 1);
        if (m.timing->sd_s) {
            t["sd_s"] = fixed(*m.timing->sd_s, 1);
        } else {
            t["sd_s"] = nullptr;
        }
        j["timing"] = t;
    } else {
        j["timing"] = nullptr;
    }
    j["user_confidence"] = m.confidence ? likert_json(*m.confidence) : ordered_json(nullptr);
    j["user_ease"] = m.ease ? likert_json(*m.ease) : ordered_json(nullptr);

    ordered_json cases = ordered_json::array();
    for (const auto& c : m.cases) {
        ordered_json e;
        e["scenario_id"] = c.scenario_id;
        e["errored"] = c.errored;
        if (c.errored) e["error"] = c.error;
        ordered_json match;
        for (Component comp : kComponents) match[enum_string(comp)] = c.component_match[static_cast<std::size_t>(comp)];
        e["component_match"] = match;
        e["ai_total"] = c.ai_total ? ordered_json(*c.ai_total) : ordered_json(nullptr);
        e["ai_partial_sum"] = c.ai_partial_sum;
        e["truth_total"] = c.truth_total;
        e["total_delta"] = c.total_delta;
        e["stroke"] = {{"truth", c.stroke_truth}, {"pred", c.stroke_pred}};
        e["lvo"] = {{"truth", c.lvo_truth}, {"pred", c.lvo_pred}};
        ordered_json anc_case;
        for (std::string_view f : kAncillaryFields) {
            auto it = c.ancillary_match.find(f);
            anc_case[std::string(f)] = it != c.ancillary_match.end() && it->second;
        }
        e["ancillary_match"] = anc_case;
        e["duration_s"] = c.duration_s;
        e["user_confidence"] = c.user_confidence ? ordered_json(*c.user_confidence) : ordered_json(nullptr);
        e["discrepancies"] = c.discrepancy_kinds;
        cases.push_back(std::move(e));
    }
    j["per_case"] = cases;
    return j.dump(2) + "\n";
}

std::string format_metrics_table(const MetricsReport& m) {
    std::ostringstream out;
    out << "cases " << m.cases.size() << ", errored " << m.errored << "\n\n";
    out << "component concordance   " << percent_text(m.concordance.pooled) << "\n";
    for (Component c : kComponents) {
        std::string name = "  " + enum_string(c);
        name.resize(24, ' ');
        out << name << percent_text(m.concordance.per_component[static_cast<std::size_t>(c)]) << "\n";
    }
    out << "total score deltas      ";
    bool first = true;
    for (const auto& [k, v] : m.total_deltas) {
        out << (first ? "" : ", ") << k << ": " << v;
        first = false;
    }
    out << "\n\n";
    auto confusion = [&](const char* name, const Confusion& c) {
        out << name << "  TP " << c.tp << "  FN " << c.fn << "  FP " << c.fp << "  TN " << c.tn << "\n"
            << "  sensitivity           " << percent_text(c.sensitivity()) << "\n"
            << "  specificity           " << percent_text(c.specificity()) << "\n"
            << "  accuracy              " << percent_text(c.accuracy()) << "\n";
    };
    confusion("stroke (all cases)", m.stroke);
    confusion("LVO (true strokes)", m.lvo);
    out << "  accuracy, all cases   " << percent_text(m.lvo_all.accuracy()) << "\n\n";
    out << "ancillary accuracy\n";
    for (std::string_view f : kAncillaryFields) {
        std::string name = "  " + std::string(f);
        name.resize(24, ' ');
        out << name << percent_text(m.ancillary.find(f)->second) << "\n";
    }
    if (m.timing) {
        out << "\nassessment time         mean " << fixed(m.timing->mean_s, 1) << " s";
        if (m.timing->sd_s) out << ", SD " << fixed(*m.timing->sd_s, 1) << " s";
        out << "\n";
    }
    auto likert = [&](const char* name, const std::optional<LikertSummary>& s) {
        if (!s) return;
        out << name << "median " << s->median << ", IQR " << s->iqr_low << "-" << s->iqr_high << ", mean "
            << decimal_half_away(s->mean.num, s->mean.den, 2) << " (n=" << s->n << ")\n";
    };
    likert("user confidence         ", m.confidence);
    likert("user ease               ", m.ease);
    return out.str();
}

}  // namespace voice::harness
