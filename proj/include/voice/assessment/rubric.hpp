#pragma once

#include "voice/assessment/types.hpp"

namespace voice::assessment {

/// LVO is flagged once the FAST-ED total (or partial sum, when incomplete)
/// reaches this value.
inline constexpr int kLvoThreshold = 4;

// Per-component rubric lookups. Each returns nullopt when the component was
// not assessed.
std::optional<int> score_facial(const FastEdFindings& findings);
std::optional<int> score_arm(const FastEdFindings& findings);
std::optional<int> score_speech(const FastEdFindings& findings);
std::optional<int> score_eye(const FastEdFindings& findings);
std::optional<int> score_neglect(const FastEdFindings& findings);

ComponentScores score_fast_ed(const FastEdFindings& findings);

TotalScore total_score(const ComponentScores& scores);

bool classify_lvo(const ComponentScores& scores);

/// Stroke is likely when any component scores above zero.
bool classify_stroke(const AssessmentState& state);

/// A canonical finding for `component` that the rubric scores as `score`.
/// Used when a finding must be rewritten to carry a given score.
void set_canonical_finding(FastEdFindings& findings, Component component, int score);

}  // namespace voice::assessment
