#include "voice/assessment/consistency.hpp"

#include "voice/assessment/rubric.hpp"

#include <algorithm>
#include <set>

namespace voice::assessment {

Resolution resolution_for(DiscrepancyKind kind) {
    switch (kind) {
        case DiscrepancyKind::sex_mismatch:
        case DiscrepancyKind::time_order_violation:
            return Resolution::clarify_with_user;
        case DiscrepancyKind::score_sum_mismatch:
            return Resolution::auto_correct;
        case DiscrepancyKind::missing_component:
        case DiscrepancyKind::neglect_without_weakness:
        case DiscrepancyKind::unknown_anticoagulant:
        case DiscrepancyKind::missing_required_field:
            return Resolution::flag_only;
    }
    return Resolution::flag_only;
}

namespace {

std::vector<std::string> missing_required_fields(const AssessmentState& s) {
    std::vector<std::string> out;
    if (!s.demographics.age) out.emplace_back("demographics.age");
    if (s.demographics.sex == Sex::unknown) out.emplace_back("demographics.sex");
    if (!s.time_anchors.last_known_well) out.emplace_back("time_anchors.last_known_well");
    if (!s.ancillary.anticoagulants) {
        out.emplace_back("ancillary.anticoagulants");
    } else if (!s.ancillary.anticoagulants->empty() && !s.ancillary.last_dose_time) {
        out.emplace_back("ancillary.last_dose_time");
    }
    if (!s.ancillary.prior_stroke) out.emplace_back("ancillary.prior_stroke");
    if (!s.ancillary.glucose) out.emplace_back("ancillary.glucose_mg_dl");
    return out;
}

Discrepancy make(DiscrepancyKind kind, std::string field, std::string detail) {
    return Discrepancy{kind, std::move(field), std::move(detail), resolution_for(kind)};
}

std::string describe(const std::optional<int>& v) {
    return v ? std::to_string(*v) : std::string("unassessed");
}

}  // namespace

std::vector<std::string> completeness(const AssessmentState& state) {
    std::vector<std::string> out;
    const ComponentScores scores = score_fast_ed(state.findings);
    for (Component c : kComponents) {
        if (!scores[c]) out.emplace_back(enum_name(c));
    }
    for (auto& f : missing_required_fields(state)) out.push_back(std::move(f));
    return out;
}

std::vector<Discrepancy> check_consistency(const AssessmentState& state, const TranscriptDigest& digest) {
    std::vector<Discrepancy> out;

    std::set<std::string> sexes;
    for (const FieldWrite& w : digest.writes) {
        if (w.field == "demographics.sex" && w.value != "\"unknown\"") sexes.insert(w.value);
    }
    if (state.demographics.sex != Sex::unknown) sexes.insert("\"" + enum_string(state.demographics.sex) + "\"");
    if (sexes.size() > 1) {
        std::string detail = "sex recorded as";
        for (const auto& s : sexes) detail += " " + s;
        out.push_back(make(DiscrepancyKind::sex_mismatch, "demographics.sex", detail));
    }

    const ComponentScores recomputed = score_fast_ed(state.findings);
    for (Component c : kComponents) {
        if (!recomputed[c]) {
            out.push_back(make(DiscrepancyKind::missing_component, std::string(enum_name(c)),
                               "component " + enum_string(c) + " was never assessed"));
        }
    }

    std::string sum_detail;
    for (Component c : kComponents) {
        if (state.scores[c] && state.scores[c] != recomputed[c]) {
            sum_detail += enum_string(c) + " stored " + describe(state.scores[c]) + " rubric " +
                          describe(recomputed[c]) + "; ";
        }
    }
    const int rubric_total = recomputed.total().partial_sum;
    if (state.reported_total && *state.reported_total != rubric_total) {
        sum_detail += "total stored " + std::to_string(*state.reported_total) + " rubric " +
                      std::to_string(rubric_total) + "; ";
    }
    if (!sum_detail.empty()) {
        sum_detail.resize(sum_detail.size() - 2);
        out.push_back(make(DiscrepancyKind::score_sum_mismatch, "scores", sum_detail));
    }

    if (recomputed[Component::neglect].value_or(0) > 0 && state.findings.arm &&
        state.findings.arm->severity == ArmSeverity::no_weakness) {
        out.push_back(make(DiscrepancyKind::neglect_without_weakness, "findings.neglect",
                           "neglect scored " + describe(recomputed[Component::neglect]) +
                               " with no arm weakness recorded"));
    }

    const TimeAnchors& t = state.time_anchors;
    if (t.last_known_well && t.symptom_onset && *t.last_known_well > *t.symptom_onset) {
        out.push_back(make(DiscrepancyKind::time_order_violation, "time_anchors",
                           "last known well " + t.last_known_well->to_string() + " is after symptom onset " +
                               t.symptom_onset->to_string()));
    }

    if (state.ancillary.anticoagulants) {
        for (const AnticoagulantEntry& e : *state.ancillary.anticoagulants) {
            if (e.drug == Anticoagulant::other) {
                out.push_back(make(DiscrepancyKind::unknown_anticoagulant, "ancillary.anticoagulants",
                                   "unrecognized anticoagulant '" + e.reported_name + "'"));
            }
        }
    }

    for (auto& field : missing_required_fields(state)) {
        out.push_back(make(DiscrepancyKind::missing_required_field, field, field + " was not recorded"));
    }

    std::stable_sort(out.begin(), out.end());
    return out;
}

}  // namespace voice::assessment
