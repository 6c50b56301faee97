#include "voice/agents/tools.hpp"

#include "voice/assessment/state_json.hpp"

#include <algorithm>

namespace voice::agents {

using namespace voice::assessment;

ToolCall ToolCall::update(std::string field, ordered_json value) {
    return {ToolKind::update_assessment_state, {{"field", std::move(field)}, {"value", std::move(value)}}};
}

ToolCall ToolCall::start_video(VideoComponent component) {
    return {ToolKind::start_video_recording, {{"component", enum_name(component)}}};
}

ToolCall ToolCall::transfer(AgentId target) {
    return {ToolKind::transfer_agent, {{"target", enum_name(target)}}};
}

ToolCall ToolCall::final_analysis() {
    return {ToolKind::run_final_analysis, ordered_json::object()};
}

ToolCall ToolCall::disconnect() {
    return {ToolKind::disconnect, ordered_json::object()};
}

ordered_json ToolCall::to_json() const {
    return {{"kind", enum_name(kind)}, {"arguments", arguments}};
}

ToolCall ToolCall::from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw SchemaError("tool call needs a string 'kind'");
    }
    auto kind = enum_parse<ToolKind>(j["kind"].get<std::string>());
    if (!kind) throw SchemaError("unknown tool kind '" + j["kind"].get<std::string>() + "'");
    ToolCall call{*kind, j.value("arguments", ordered_json::object())};
    if (auto problem = validate_arguments(call); !problem.empty()) throw SchemaError(problem);
    return call;
}

ToolResult ToolResult::success(ordered_json payload) {
    return ToolResult{true, {}, {}, std::move(payload)};
}

ToolResult ToolResult::failure(std::string_view code, std::string message) {
    return ToolResult{false, std::string(code), std::move(message), ordered_json::object()};
}

ordered_json ToolResult::to_json() const {
    ordered_json j{{"ok", ok}};
    if (!ok) {
        j["error"] = error_code;
        j["message"] = message;
    }
    j["payload"] = payload;
    return j;
}

const std::vector<std::string>& updatable_fields() {
    static const std::vector<std::string> fields{
        "demographics.age",
        "demographics.sex",
        "time_anchors.last_known_well",
        "time_anchors.symptom_onset",
        "time_anchors.onset_witnessed",
        "findings.facial",
        "findings.arm",
        "findings.arm.side",
        "findings.arm.severity",
        "findings.speech_slurred",
        "findings.aphasia",
        "findings.aphasia.items_named",
        "findings.aphasia.command_performed",
        "findings.aphasia.mute_or_global",
        "findings.eye_deviation",
        "findings.neglect",
        "findings.neglect.recognizes_weakness",
        "findings.neglect.recognizes_own_arm",
        "ancillary.anticoagulants",
        "ancillary.last_dose_time",
        "ancillary.prior_stroke",
        "ancillary.prior_stroke_detail",
        "ancillary.glucose_mg_dl",
        "scores.facial",
        "scores.arm",
        "scores.speech",
        "scores.eye",
        "scores.neglect",
        "scores.total",
    };
    return fields;
}

std::string validate_arguments(const ToolCall& call) {
    const ordered_json& a = call.arguments;
    if (!a.is_object()) return "arguments must be an object";
    switch (call.kind) {
        case ToolKind::update_assessment_state: {
            if (!a.contains("field") || !a["field"].is_string()) return "update needs a string 'field'";
            if (!a.contains("value")) return "update needs a 'value'";
            const auto& fields = updatable_fields();
            if (std::find(fields.begin(), fields.end(), a["field"].get<std::string>()) == fields.end()) {
                return "unknown field '" + a["field"].get<std::string>() + "'";
            }
            return {};
        }
        case ToolKind::start_video_recording:
            if (!a.contains("component") || !a["component"].is_string() ||
                !enum_parse<VideoComponent>(a["component"].get<std::string>())) {
                return "video recording needs component facial or arm";
            }
            return {};
        case ToolKind::transfer_agent:
            if (!a.contains("target") || !a["target"].is_string() ||
                !enum_parse<AgentId>(a["target"].get<std::string>())) {
                return "transfer needs a valid 'target' agent";
            }
            return {};
        case ToolKind::run_final_analysis:
        case ToolKind::disconnect:
            return {};
    }
    return "unknown tool";
}

namespace {

bool to_bool(const ordered_json& v, std::string_view field) {
    if (!v.is_boolean()) throw SchemaError(std::string(field) + ": expected boolean");
    return v.get<bool>();
}

std::optional<UtcMinute> to_time(const ordered_json& v, std::string_view field, UtcMinute session_start) {
    if (v.is_null()) return std::nullopt;
    if (!v.is_string()) throw SchemaError(std::string(field) + ": expected time string");
    auto t = resolve_time(v.get<std::string>(), session_start);
    if (!t) throw SchemaError(std::string(field) + ": cannot resolve time '" + v.get<std::string>() + "'");
    return t;
}

template <class Record, class Parse>
void update_record(std::optional<Record>& slot, const ordered_json& value, std::string_view sub, Parse parse) {
    if (sub.empty()) {
        if (value.is_null()) {
            slot.reset();
        } else {
            slot = parse(value, Record{});
        }
        return;
    }
    ordered_json partial = ordered_json::object();
    partial[std::string(sub)] = value;
    slot = parse(partial, slot.value_or(Record{}));
}

void write(AssessmentState& s, std::string_view field, const ordered_json& v, UtcMinute start) {
    const auto sub_of = [&](std::string_view prefix) -> std::optional<std::string_view> {
        if (field == prefix) return std::string_view{};
        if (field.size() > prefix.size() && field.starts_with(prefix) && field[prefix.size()] == '.') {
            return field.substr(prefix.size() + 1);
        }
        return std::nullopt;
    };

    if (field == "demographics.age") {
        if (v.is_null()) {
            s.demographics.age.reset();
        } else if (!v.is_number_integer() || v.get<std::int64_t>() < kMinAge || v.get<std::int64_t>() > kMaxAge) {
            throw SchemaError("demographics.age: expected integer 0..130");
        } else {
            s.demographics.age = v.get<int>();
        }
    } else if (field == "demographics.sex") {
        s.demographics.sex = v.is_null() ? Sex::unknown : parse_enum<Sex>(v, field);
    } else if (field == "time_anchors.last_known_well") {
        s.time_anchors.last_known_well = to_time(v, field, start);
    } else if (field == "time_anchors.symptom_onset") {
        s.time_anchors.symptom_onset = to_time(v, field, start);
    } else if (field == "time_anchors.onset_witnessed") {
        s.time_anchors.onset_witnessed = v.is_null() ? false : to_bool(v, field);
    } else if (field == "findings.facial") {
        if (v.is_null()) {
            s.findings.facial.reset();
        } else {
            s.findings.facial = parse_enum<FacialPalsy>(v, field);
        }
    } else if (auto sub = sub_of("findings.arm")) {
        update_record(s.findings.arm, v, *sub, [](const ordered_json& j, ArmFinding b) { return arm_from_json(j, b); });
    } else if (field == "findings.speech_slurred") {
        if (v.is_null()) {
            s.findings.speech_slurred.reset();
        } else {
            s.findings.speech_slurred = to_bool(v, field);
        }
    } else if (auto sub = sub_of("findings.aphasia")) {
        update_record(s.findings.aphasia, v, *sub,
                      [](const ordered_json& j, AphasiaFinding b) { return aphasia_from_json(j, b); });
    } else if (field == "findings.eye_deviation") {
        update_record(s.findings.eye_deviation, v, {},
                      [](const ordered_json& j, EyeFinding b) { return eye_from_json(j, b); });
    } else if (auto sub = sub_of("findings.neglect")) {
        update_record(s.findings.neglect, v, *sub,
                      [](const ordered_json& j, NeglectFinding b) { return neglect_from_json(j, b); });
    } else if (field == "ancillary.anticoagulants") {
        if (v.is_null()) {
            s.ancillary.anticoagulants.reset();
        } else {
            ordered_json wrapper{{"anticoagulants", v}};
            s.ancillary.anticoagulants = ancillary_from_json(wrapper).anticoagulants;
        }
        if (!s.ancillary.anticoagulants || s.ancillary.anticoagulants->empty()) s.ancillary.last_dose_time.reset();
    } else if (field == "ancillary.last_dose_time") {
        auto t = to_time(v, field, start);
        if (t && (!s.ancillary.anticoagulants || s.ancillary.anticoagulants->empty())) {
            throw SchemaError("ancillary.last_dose_time: no anticoagulant recorded");
        }
        s.ancillary.last_dose_time = t;
    } else if (field == "ancillary.prior_stroke") {
        if (v.is_null()) {
            s.ancillary.prior_stroke.reset();
        } else {
            s.ancillary.prior_stroke = parse_enum<PriorStroke>(v, field);
        }
    } else if (field == "ancillary.prior_stroke_detail") {
        if (!v.is_null() && !v.is_string()) throw SchemaError("ancillary.prior_stroke_detail: expected string");
        s.ancillary.prior_stroke_detail = v.is_null() ? std::string() : v.get<std::string>();
    } else if (field == "ancillary.glucose_mg_dl") {
        if (v.is_null()) {
            s.ancillary.glucose.reset();
        } else {
            s.ancillary.glucose = glucose_from_json(v);
        }
    } else if (auto sub = sub_of("scores"); sub && !sub->empty()) {
        if (*sub == "total") {
            if (v.is_null()) {
                s.reported_total.reset();
            } else if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() > kMaxTotal) {
                throw SchemaError("scores.total: expected integer 0..9");
            } else {
                s.reported_total = v.get<int>();
            }
            return;
        }
        auto c = enum_parse<Component>(*sub);
        if (!c) throw SchemaError("unknown score field '" + std::string(field) + "'");
        if (v.is_null()) {
            s.scores[*c].reset();
        } else if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() > max_component_score(*c)) {
            throw SchemaError(std::string(field) + ": score out of range");
        } else {
            s.scores[*c] = v.get<int>();
        }
    } else {
        throw SchemaError("unknown field '" + std::string(field) + "'");
    }
}

}  // namespace

void apply_update(AssessmentState& state, std::string_view field, const ordered_json& value, UtcMinute session_start) {
    AssessmentState next = state;
    try {
        write(next, field, value, session_start);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string(field) + ": " + e.what());
    }
    state = std::move(next);
}

}  // namespace voice::agents
