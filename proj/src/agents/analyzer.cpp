#include "voice/agents/analyzer.hpp"

#include "voice/assessment/rubric.hpp"

namespace voice::agents {

using namespace voice::assessment;

namespace {

std::string side_word(Side s) {
    switch (s) {
        case Side::left: return "left ";
        case Side::right: return "right ";
        case Side::both: return "bilateral ";
        case Side::none: break;
    }
    return "";
}

std::vector<std::string> abnormal_findings(const FastEdFindings& f, const ComponentScores& scores) {
    std::vector<std::string> out;
    if (scores[Component::facial].value_or(0) > 0) {
        out.emplace_back(*f.facial == FacialPalsy::right_droop ? "right facial droop" : "left facial droop");
    }
    if (scores[Component::arm].value_or(0) > 0) {
        out.push_back(side_word(f.arm->side) + (scores[Component::arm] == 2 ? "arm weakness" : "arm drift"));
    }
    if (scores[Component::neglect].value_or(0) > 0) out.emplace_back("neglect");
    if (scores[Component::speech].value_or(0) > 0) {
        if (f.aphasia->mute_or_global || f.aphasia->items_named == 0) {
            out.emplace_back("severe aphasia");
        } else {
            if (*f.speech_slurred) out.emplace_back("slurred speech");
            if (f.aphasia->items_named < 3) out.emplace_back("naming difficulty");
            if (!f.aphasia->command_performed) out.emplace_back("failed command");
        }
    }
    if (scores[Component::eye].value_or(0) > 0) {
        const char* dir = f.eye_deviation->direction == GazeDirection::right ? "rightward" : "leftward";
        out.push_back(std::string(dir) + (scores[Component::eye] == 2 ? " forced gaze deviation" : " gaze preference"));
    }
    return out;
}

}  // namespace

std::string draft_narrative(const AssessmentState& state, const ComponentScores& scores) {
    const TotalScore total = scores.total();
    const bool stroke = classify_stroke(state);
    const bool lvo = classify_lvo(scores);

    std::string text = stroke ? "Stroke likely" : "Stroke unlikely";
    text += lvo ? "; large vessel occlusion likely. " : "; large vessel occlusion unlikely. ";
    text += "FAST-ED " + std::to_string(total.partial_sum) + " of " + std::to_string(kMaxTotal);
    if (!total.complete) text += " (incomplete)";
    text += ".";

    const auto abnormal = abnormal_findings(state.findings, scores);
    if (!abnormal.empty()) {
        text += " Abnormal findings: ";
        for (std::size_t i = 0; i < abnormal.size(); ++i) {
            if (i > 0) text += i + 1 == abnormal.size() ? " and " : ", ";
            text += abnormal[i];
        }
        text += ".";
    }
    std::string missing;
    for (Component c : kComponents) {
        if (!scores[c]) missing += (missing.empty() ? "" : ", ") + enum_string(c);
    }
    if (!missing.empty()) text += " Not assessed: " + missing + ".";
    if (stroke) text += " Call 911 now and report a possible stroke.";
    return text;
}

AnalysisResult DeterministicAnalyzer::analyze(const AssessmentState& state, const TranscriptDigest& digest) const {
    AnalysisResult r;
    r.corrected_scores = score_fast_ed(state.findings);
    r.discrepancies = check_consistency(state, digest);
    for (const Discrepancy& d : r.discrepancies) {
        if (d.resolution == Resolution::clarify_with_user) r.clarifications_needed.push_back(d.field);
    }
    AssessmentState corrected = state;
    corrected.scores = r.corrected_scores;
    r.stroke_likely = classify_stroke(corrected);
    r.lvo_likely = classify_lvo(r.corrected_scores);
    r.narrative = draft_narrative(corrected, r.corrected_scores);
    return r;
}

}  // namespace voice::agents
