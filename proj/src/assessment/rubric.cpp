#include "voice/assessment/rubric.hpp"

#include <algorithm>
#include <stdexcept>

namespace voice::assessment {

TotalScore ComponentScores::total() const {
    return total_score(*this);
}

std::optional<int> score_facial(const FastEdFindings& f) {
    if (!f.facial) return std::nullopt;
    return *f.facial == FacialPalsy::none ? 0 : 1;
}

std::optional<int> score_arm(const FastEdFindings& f) {
    if (!f.arm) return std::nullopt;
    switch (f.arm->severity) {
        case ArmSeverity::no_weakness: return 0;
        case ArmSeverity::drifts_down: return 1;
        case ArmSeverity::falls_rapidly_or_no_effort: return 2;
    }
    return std::nullopt;
}

std::optional<int> score_speech(const FastEdFindings& f) {
    if (!f.speech_assessed()) return std::nullopt;
    const AphasiaFinding& a = *f.aphasia;
    if (a.mute_or_global || a.items_named == 0) return 2;
    if (*f.speech_slurred || a.items_named < 3 || !a.command_performed) return 1;
    return 0;
}

std::optional<int> score_eye(const FastEdFindings& f) {
    if (!f.eye_deviation) return std::nullopt;
    switch (f.eye_deviation->severity) {
        case GazeSeverity::none: return 0;
        case GazeSeverity::partial: return 1;
        case GazeSeverity::forced: return 2;
    }
    return std::nullopt;
}

std::optional<int> score_neglect(const FastEdFindings& f) {
    if (!f.neglect) return std::nullopt;
    return (f.neglect->recognizes_weakness ? 0 : 1) + (f.neglect->recognizes_own_arm ? 0 : 1);
}

ComponentScores score_fast_ed(const FastEdFindings& findings) {
    ComponentScores s;
    s[Component::facial] = score_facial(findings);
    s[Component::arm] = score_arm(findings);
    s[Component::speech] = score_speech(findings);
    s[Component::eye] = score_eye(findings);
    s[Component::neglect] = score_neglect(findings);
    return s;
}

TotalScore total_score(const ComponentScores& scores) {
    TotalScore t;
    t.complete = true;
    for (const auto& v : scores.values) {
        if (v) {
            t.partial_sum += *v;
        } else {
            t.complete = false;
        }
    }
    return t;
}

bool classify_lvo(const ComponentScores& scores) {
    return total_score(scores).partial_sum >= kLvoThreshold;
}

bool classify_stroke(const AssessmentState& state) {
    const ComponentScores s = score_fast_ed(state.findings);
    return std::any_of(s.values.begin(), s.values.end(), [](const std::optional<int>& v) { return v && *v > 0; });
}

void set_canonical_finding(FastEdFindings& f, Component component, int score) {
    if (score < 0 || score > max_component_score(component)) {
        throw std::out_of_range("score out of range for component " + enum_string(component));
    }
    switch (component) {
        case Component::facial:
            f.facial = score == 0 ? FacialPalsy::none : FacialPalsy::left_droop;
            break;
        case Component::arm: {
            static constexpr ArmSeverity by_score[] = {ArmSeverity::no_weakness, ArmSeverity::drifts_down,
                                                       ArmSeverity::falls_rapidly_or_no_effort};
            const Side previous = f.arm ? f.arm->side : Side::none;
            f.arm = ArmFinding{score == 0 ? Side::none : (previous == Side::none ? Side::left : previous),
                               by_score[score]};
            break;
        }
        case Component::speech:
            f.speech_slurred = score >= 1;
            f.aphasia = AphasiaFinding{3, true, score == 2};
            break;
        case Component::eye: {
            static constexpr GazeSeverity by_score[] = {GazeSeverity::none, GazeSeverity::partial,
                                                        GazeSeverity::forced};
            const GazeDirection previous = f.eye_deviation ? f.eye_deviation->direction : GazeDirection::none;
            f.eye_deviation = EyeFinding{
                score == 0 ? GazeDirection::none : (previous == GazeDirection::none ? GazeDirection::left : previous),
                by_score[score]};
            break;
        }
        case Component::neglect:
            f.neglect = NeglectFinding{score == 0, score < 2};
            break;
    }
}

}  // namespace voice::assessment
