#pragma once

#include "voice/assessment/consistency.hpp"
#include "voice/assessment/types.hpp"

#include <string>
#include <vector>

namespace voice::agents {

struct AnalysisResult {
    assessment::ComponentScores corrected_scores;
    bool stroke_likely = false;
    bool lvo_likely = false;
    std::vector<assessment::Discrepancy> discrepancies;
    std::vector<std::string> clarifications_needed;  // discrepancy fields to put back to the user
    std::string narrative;
};

/// The end-of-assessment double check. Implementations must return
/// corrected scores equal to the rubric applied to the recorded findings.
class Analyzer {
public:
    virtual ~Analyzer() = default;
    virtual AnalysisResult analyze(const assessment::AssessmentState& state,
                                   const assessment::TranscriptDigest& digest) const = 0;
};

class DeterministicAnalyzer final : public Analyzer {
public:
    AnalysisResult analyze(const assessment::AssessmentState& state,
                           const assessment::TranscriptDigest& digest) const override;
};

/// Plain-language summary of a scored assessment.
std::string draft_narrative(const assessment::AssessmentState& state, const assessment::ComponentScores& scores);

}  // namespace voice::agents
