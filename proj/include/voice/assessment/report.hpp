#pragma once

#include "voice/assessment/types.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace voice::assessment {

inline constexpr std::string_view kReportSchema = "voice-report/1";

class ReportBuildError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SessionTiming {
    std::int64_t started_s = 0;
    std::int64_t ended_s = 0;
    std::optional<std::int64_t> summary_delivered_s;

    std::int64_t duration_s() const { return summary_delivered_s.value_or(ended_s) - started_s; }

    friend bool operator==(const SessionTiming&, const SessionTiming&) = default;
};

/// Everything about the session the report needs besides state and transcript.
struct ReportContext {
    std::string session_id;
    SessionTiming timing;
    bool aborted = false;
    std::vector<Discrepancy> discrepancies;
    int clarification_rounds = 0;
};

struct Report {
    std::string session_id;
    bool aborted = false;
    SessionTiming timing;
    AssessmentState assessment;  // completeness filled in at build time
    std::vector<Discrepancy> discrepancies;
    int clarification_rounds = 0;
    Transcript transcript;

    friend bool operator==(const Report&, const Report&) = default;
};

/// Assembles the final report. Every video the state links must be present
/// in `registered_videos`; a dangling id raises ReportBuildError.
Report build_report(const AssessmentState& state, const Transcript& transcript,
                    const std::vector<VideoRef>& registered_videos, const ReportContext& context);

/// Canonical serialization: fixed key order, compact, UTF-8.
std::string serialize_report(const Report& report);

Report parse_report(std::string_view json_text);

}  // namespace voice::assessment
