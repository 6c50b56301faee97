#include "voice/assessment/state_json.hpp"

#include "voice/assessment/rubric.hpp"

namespace voice::assessment {

namespace {

template <class T, class F>
ordered_json opt(const std::optional<T>& v, F&& f) {
    return v ? ordered_json(f(*v)) : ordered_json(nullptr);
}

ordered_json time_json(const std::optional<UtcMinute>& t) {
    return opt(t, [](const UtcMinute& m) { return m.to_string(); });
}

bool get_bool(const ordered_json& j, std::string_view what) {
    if (!j.is_boolean()) throw SchemaError(std::string(what) + ": expected boolean");
    return j.get<bool>();
}

int get_int(const ordered_json& j, std::string_view what, int lo, int hi) {
    if (!j.is_number_integer()) throw SchemaError(std::string(what) + ": expected integer");
    const auto v = j.get<std::int64_t>();
    if (v < lo || v > hi) {
        throw SchemaError(std::string(what) + ": " + std::to_string(v) + " outside " + std::to_string(lo) + ".." +
                          std::to_string(hi));
    }
    return static_cast<int>(v);
}

const ordered_json& member(const ordered_json& j, const char* key) {
    static const ordered_json null_value;
    if (!j.is_object()) throw SchemaError(std::string("expected object containing '") + key + "'");
    auto it = j.find(key);
    return it == j.end() ? null_value : *it;
}

void require_object(const ordered_json& j, std::string_view what) {
    if (!j.is_object()) throw SchemaError(std::string(what) + ": expected object");
}

}  // namespace

ordered_json to_json(const ArmFinding& v) {
    return {{"side", enum_name(v.side)}, {"severity", enum_name(v.severity)}};
}

ordered_json to_json(const AphasiaFinding& v) {
    return {{"items_named", v.items_named},
            {"command_performed", v.command_performed},
            {"mute_or_global", v.mute_or_global}};
}

ordered_json to_json(const EyeFinding& v) {
    return {{"direction", enum_name(v.direction)}, {"severity", enum_name(v.severity)}};
}

ordered_json to_json(const NeglectFinding& v) {
    return {{"recognizes_weakness", v.recognizes_weakness}, {"recognizes_own_arm", v.recognizes_own_arm}};
}

ordered_json to_json(const FastEdFindings& v) {
    ordered_json j;
    j["facial"] = opt(v.facial, [](FacialPalsy f) { return enum_name(f); });
    j["arm"] = opt(v.arm, [](const ArmFinding& a) { return to_json(a); });
    j["speech_slurred"] = opt(v.speech_slurred, [](bool b) { return b; });
    j["aphasia"] = opt(v.aphasia, [](const AphasiaFinding& a) { return to_json(a); });
    j["eye_deviation"] = opt(v.eye_deviation, [](const EyeFinding& e) { return to_json(e); });
    j["neglect"] = opt(v.neglect, [](const NeglectFinding& n) { return to_json(n); });
    return j;
}

ordered_json to_json(const ComponentScores& v) {
    ordered_json j;
    for (Component c : kComponents) {
        j[enum_string(c)] = opt(v[c], [](int s) { return s; });
    }
    const TotalScore t = v.total();
    j["total"] = opt(t.value(), [](int s) { return s; });
    j["partial_sum"] = t.partial_sum;
    j["complete"] = t.complete;
    return j;
}

ordered_json to_json(const TimeAnchors& v) {
    return {{"last_known_well", time_json(v.last_known_well)},
            {"symptom_onset", time_json(v.symptom_onset)},
            {"onset_witnessed", v.onset_witnessed}};
}

ordered_json to_json(const AncillaryData& v) {
    ordered_json j;
    if (v.anticoagulants) {
        ordered_json list = ordered_json::array();
        for (const auto& e : *v.anticoagulants) {
            list.push_back({{"drug", enum_name(e.drug)}, {"reported_name", e.reported_name}});
        }
        j["anticoagulants"] = std::move(list);
    } else {
        j["anticoagulants"] = nullptr;
    }
    j["last_dose_time"] = time_json(v.last_dose_time);
    j["prior_stroke"] = opt(v.prior_stroke, [](PriorStroke p) { return enum_name(p); });
    j["prior_stroke_detail"] = v.prior_stroke_detail;
    if (!v.glucose) {
        j["glucose_mg_dl"] = nullptr;
    } else if (v.glucose->unmeasurable()) {
        j["glucose_mg_dl"] = "unmeasurable";
    } else {
        j["glucose_mg_dl"] = *v.glucose->mg_dl;
    }
    return j;
}

ordered_json to_json(const VideoRef& v) {
    return {{"component", enum_name(v.component)},
            {"video_id", v.video_id},
            {"duration_s", v.duration_s},
            {"uri", v.uri}};
}

ordered_json to_json(const Discrepancy& v) {
    return {{"kind", enum_name(v.kind)},
            {"field", v.field},
            {"detail", v.detail},
            {"resolution", enum_name(v.resolution)}};
}

ordered_json to_json(const AssessmentState& v) {
    ordered_json j;
    j["demographics"] = {{"age", opt(v.demographics.age, [](int a) { return a; })},
                         {"sex", enum_name(v.demographics.sex)}};
    j["time_anchors"] = to_json(v.time_anchors);
    j["findings"] = to_json(v.findings);
    j["scores"] = to_json(v.scores);
    j["reported_total"] = opt(v.reported_total, [](int t) { return t; });
    j["ancillary"] = to_json(v.ancillary);
    j["stroke_likely"] = opt(v.stroke_likely, [](bool b) { return b; });
    j["lvo_likely"] = opt(v.lvo_likely, [](bool b) { return b; });
    ordered_json videos = ordered_json::array();
    for (const auto& video : v.videos) videos.push_back(to_json(video));
    j["videos"] = std::move(videos);
    j["summary_narrative"] = opt(v.summary_narrative, [](const std::string& s) { return s; });
    j["completeness"] = v.completeness;
    return j;
}

ArmFinding arm_from_json(const ordered_json& j, ArmFinding base) {
    require_object(j, "arm");
    if (j.contains("side")) base.side = parse_enum<Side>(j["side"], "arm.side");
    if (j.contains("severity")) base.severity = parse_enum<ArmSeverity>(j["severity"], "arm.severity");
    return base;
}

AphasiaFinding aphasia_from_json(const ordered_json& j, AphasiaFinding base) {
    require_object(j, "aphasia");
    if (j.contains("items_named")) base.items_named = get_int(j["items_named"], "aphasia.items_named", 0, 3);
    if (j.contains("command_performed")) {
        base.command_performed = get_bool(j["command_performed"], "aphasia.command_performed");
    }
    if (j.contains("mute_or_global")) base.mute_or_global = get_bool(j["mute_or_global"], "aphasia.mute_or_global");
    return base;
}

EyeFinding eye_from_json(const ordered_json& j, EyeFinding base) {
    require_object(j, "eye_deviation");
    if (j.contains("direction")) base.direction = parse_enum<GazeDirection>(j["direction"], "eye.direction");
    if (j.contains("severity")) base.severity = parse_enum<GazeSeverity>(j["severity"], "eye.severity");
    if ((base.direction == GazeDirection::none) != (base.severity == GazeSeverity::none)) {
        throw SchemaError("eye_deviation: direction and severity must both be none or both be set");
    }
    return base;
}

NeglectFinding neglect_from_json(const ordered_json& j, NeglectFinding base) {
    require_object(j, "neglect");
    if (j.contains("recognizes_weakness")) {
        base.recognizes_weakness = get_bool(j["recognizes_weakness"], "neglect.recognizes_weakness");
    }
    if (j.contains("recognizes_own_arm")) {
        base.recognizes_own_arm = get_bool(j["recognizes_own_arm"], "neglect.recognizes_own_arm");
    }
    return base;
}

FastEdFindings findings_from_json(const ordered_json& j) {
    require_object(j, "findings");
    FastEdFindings f;
    if (const auto& v = member(j, "facial"); !v.is_null()) f.facial = parse_enum<FacialPalsy>(v, "facial");
    if (const auto& v = member(j, "arm"); !v.is_null()) f.arm = arm_from_json(v);
    if (const auto& v = member(j, "speech_slurred"); !v.is_null()) f.speech_slurred = get_bool(v, "speech_slurred");
    if (const auto& v = member(j, "aphasia"); !v.is_null()) f.aphasia = aphasia_from_json(v);
    if (const auto& v = member(j, "eye_deviation"); !v.is_null()) f.eye_deviation = eye_from_json(v);
    if (const auto& v = member(j, "neglect"); !v.is_null()) f.neglect = neglect_from_json(v);
    return f;
}

ComponentScores scores_from_json(const ordered_json& j) {
    require_object(j, "scores");
    ComponentScores s;
    for (Component c : kComponents) {
        const auto& v = member(j, enum_string(c).c_str());
        if (!v.is_null()) s[c] = get_int(v, enum_name(c), 0, max_component_score(c));
    }
    return s;
}

std::optional<UtcMinute> optional_time_from_json(const ordered_json& j, std::string_view what) {
    if (j.is_null()) return std::nullopt;
    if (!j.is_string()) throw SchemaError(std::string(what) + ": expected timestamp string");
    auto t = UtcMinute::parse(j.get<std::string>());
    if (!t) throw SchemaError(std::string(what) + ": bad timestamp '" + j.get<std::string>() + "'");
    return t;
}

TimeAnchors time_anchors_from_json(const ordered_json& j) {
    require_object(j, "time_anchors");
    TimeAnchors t;
    t.last_known_well = optional_time_from_json(member(j, "last_known_well"), "last_known_well");
    t.symptom_onset = optional_time_from_json(member(j, "symptom_onset"), "symptom_onset");
    if (const auto& v = member(j, "onset_witnessed"); !v.is_null()) t.onset_witnessed = get_bool(v, "onset_witnessed");
    return t;
}

GlucoseReading glucose_from_json(const ordered_json& j) {
    if (j.is_string() && j.get<std::string>() == "unmeasurable") return GlucoseReading{};
    return GlucoseReading{get_int(j, "glucose_mg_dl", kMinGlucose, kMaxGlucose)};
}

AncillaryData ancillary_from_json(const ordered_json& j) {
    require_object(j, "ancillary");
    AncillaryData a;
    if (const auto& list = member(j, "anticoagulants"); !list.is_null()) {
        if (!list.is_array()) throw SchemaError("anticoagulants: expected array");
        a.anticoagulants.emplace();
        for (const auto& e : list) {
            AnticoagulantEntry entry;
            if (e.is_string()) {
                entry.reported_name = e.get<std::string>();
                entry.drug = classify_anticoagulant(entry.reported_name);
            } else {
                entry.drug = parse_enum<Anticoagulant>(member(e, "drug"), "anticoagulants.drug");
                const auto& name = member(e, "reported_name");
                entry.reported_name = name.is_string() ? name.get<std::string>() : enum_string(entry.drug);
            }
            a.anticoagulants->push_back(std::move(entry));
        }
    }
    a.last_dose_time = optional_time_from_json(member(j, "last_dose_time"), "last_dose_time");
    if (const auto& v = member(j, "prior_stroke"); !v.is_null()) a.prior_stroke = parse_enum<PriorStroke>(v, "prior_stroke");
    if (const auto& v = member(j, "prior_stroke_detail"); v.is_string()) a.prior_stroke_detail = v.get<std::string>();
    if (const auto& v = member(j, "glucose_mg_dl"); !v.is_null()) a.glucose = glucose_from_json(v);
    return a;
}

VideoRef video_from_json(const ordered_json& j) {
    require_object(j, "video");
    VideoRef v;
    v.component = parse_enum<VideoComponent>(member(j, "component"), "video.component");
    v.video_id = member(j, "video_id").get<std::string>();
    v.duration_s = member(j, "duration_s").is_number() ? member(j, "duration_s").get<double>() : 0.0;
    v.uri = member(j, "uri").is_string() ? member(j, "uri").get<std::string>() : std::string();
    return v;
}

Discrepancy discrepancy_from_json(const ordered_json& j) {
    Discrepancy d;
    d.kind = parse_enum<DiscrepancyKind>(member(j, "kind"), "discrepancy.kind");
    d.field = member(j, "field").get<std::string>();
    d.detail = member(j, "detail").get<std::string>();
    d.resolution = parse_enum<Resolution>(member(j, "resolution"), "discrepancy.resolution");
    return d;
}

AssessmentState assessment_from_json(const ordered_json& j) {
    require_object(j, "assessment");
    AssessmentState s;
    const auto& demo = member(j, "demographics");
    if (const auto& age = member(demo, "age"); !age.is_null()) s.demographics.age = get_int(age, "age", kMinAge, kMaxAge);
    if (const auto& sex = member(demo, "sex"); !sex.is_null()) s.demographics.sex = parse_enum<Sex>(sex, "sex");
    s.time_anchors = time_anchors_from_json(member(j, "time_anchors"));
    s.findings = findings_from_json(member(j, "findings"));
    s.scores = scores_from_json(member(j, "scores"));
    if (const auto& v = member(j, "reported_total"); !v.is_null()) s.reported_total = get_int(v, "reported_total", 0, kMaxTotal);
    s.ancillary = ancillary_from_json(member(j, "ancillary"));
    if (const auto& v = member(j, "stroke_likely"); !v.is_null()) s.stroke_likely = get_bool(v, "stroke_likely");
    if (const auto& v = member(j, "lvo_likely"); !v.is_null()) s.lvo_likely = get_bool(v, "lvo_likely");
    if (const auto& videos = member(j, "videos"); videos.is_array()) {
        for (const auto& v : videos) s.videos.push_back(video_from_json(v));
    }
    if (const auto& v = member(j, "summary_narrative"); v.is_string()) s.summary_narrative = v.get<std::string>();
    if (const auto& v = member(j, "completeness"); v.is_array()) s.completeness = v.get<std::vector<std::string>>();
    return s;
}

}  // namespace voice::assessment
