#include "voice/assessment/report.hpp"

#include "voice/assessment/consistency.hpp"
#include "voice/assessment/state_json.hpp"

#include <algorithm>

namespace voice::assessment {

Report build_report(const AssessmentState& state, const Transcript& transcript,
                    const std::vector<VideoRef>& registered_videos, const ReportContext& context) {
    std::vector<std::string> dangling;
    for (const VideoRef& v : state.videos) {
        const bool known = std::any_of(registered_videos.begin(), registered_videos.end(),
                                       [&](const VideoRef& r) { return r.video_id == v.video_id; });
        if (!known) dangling.push_back(v.video_id);
    }
    if (!dangling.empty()) {
        std::string msg = "report references unregistered video(s):";
        for (const auto& id : dangling) msg += " " + id;
        throw ReportBuildError(msg);
    }

    Report r;
    r.session_id = context.session_id;
    r.aborted = context.aborted;
    r.timing = context.timing;
    r.assessment = state;
    r.assessment.completeness = completeness(state);
    r.discrepancies = context.discrepancies;
    r.clarification_rounds = context.clarification_rounds;
    r.transcript = transcript;
    return r;
}

std::string serialize_report(const Report& report) {
    const auto minute = [](std::int64_t s) { return UtcMinute::from_seconds(s).to_string(); };

    ordered_json j;
    j["schema"] = kReportSchema;
    j["session_id"] = report.session_id;
    j["status"] = report.aborted ? "aborted" : "completed";
    j["timing"] = {{"started", minute(report.timing.started_s)},
                   {"ended", minute(report.timing.ended_s)},
                   {"summary_delivered", report.timing.summary_delivered_s
                                             ? ordered_json(minute(*report.timing.summary_delivered_s))
                                             : ordered_json(nullptr)},
                   {"started_s", report.timing.started_s},
                   {"ended_s", report.timing.ended_s},
                   {"summary_delivered_s", report.timing.summary_delivered_s
                                               ? ordered_json(*report.timing.summary_delivered_s)
                                               : ordered_json(nullptr)},
                   {"duration_s", report.timing.duration_s()}};
    j["assessment"] = to_json(report.assessment);
    ordered_json discrepancies = ordered_json::array();
    for (const auto& d : report.discrepancies) discrepancies.push_back(to_json(d));
    j["discrepancies"] = std::move(discrepancies);
    j["clarification_rounds"] = report.clarification_rounds;
    ordered_json turns = ordered_json::array();
    for (const Turn& t : report.transcript) {
        turns.push_back({{"speaker", enum_name(t.speaker)},
                         {"text", t.text},
                         {"at", minute(t.at_s)},
                         {"offset_s", t.at_s - report.timing.started_s}});
    }
    j["transcript"] = std::move(turns);
    return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

Report parse_report(std::string_view json_text) {
    const ordered_json j = ordered_json::parse(json_text);
    if (j.value("schema", "") != kReportSchema) throw SchemaError("not a voice-report/1 document");
    Report r;
    r.session_id = j.at("session_id").get<std::string>();
    r.aborted = j.at("status").get<std::string>() == "aborted";
    const auto& timing = j.at("timing");
    r.timing.started_s = timing.at("started_s").get<std::int64_t>();
    r.timing.ended_s = timing.at("ended_s").get<std::int64_t>();
    if (!timing.at("summary_delivered_s").is_null()) {
        r.timing.summary_delivered_s = timing.at("summary_delivered_s").get<std::int64_t>();
    }
    r.assessment = assessment_from_json(j.at("assessment"));
    for (const auto& d : j.at("discrepancies")) r.discrepancies.push_back(discrepancy_from_json(d));
    r.clarification_rounds = j.at("clarification_rounds").get<int>();
    for (const auto& t : j.at("transcript")) {
        Turn turn;
        turn.speaker = parse_enum<Speaker>(t.at("speaker"), "speaker");
        turn.text = t.at("text").get<std::string>();
        turn.at_s = r.timing.started_s + t.at("offset_s").get<std::int64_t>();
        r.transcript.push_back(std::move(turn));
    }
    return r;
}

}  // namespace voice::assessment
