#pragma once

#include "voice/assessment/types.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace voice::assessment {

using ordered_json = nlohmann::ordered_json;

/// Thrown when JSON does not match the assessment schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class E>
E parse_enum(const nlohmann::ordered_json& j, std::string_view what) {
    if (!j.is_string()) throw SchemaError(std::string(what) + ": expected string");
    auto v = enum_parse<E>(j.get<std::string>());
    if (!v) throw SchemaError(std::string(what) + ": unknown value '" + j.get<std::string>() + "'");
    return *v;
}

ordered_json to_json(const ArmFinding& v);
ordered_json to_json(const AphasiaFinding& v);
ordered_json to_json(const EyeFinding& v);
ordered_json to_json(const NeglectFinding& v);
ordered_json to_json(const FastEdFindings& v);
ordered_json to_json(const ComponentScores& v);
ordered_json to_json(const TimeAnchors& v);
ordered_json to_json(const AncillaryData& v);
ordered_json to_json(const VideoRef& v);
ordered_json to_json(const Discrepancy& v);
ordered_json to_json(const AssessmentState& v);

// Record parsers accept partial objects: absent keys keep the defaults of
// `base`, which lets a single sub-field be written on top of an existing record.
ArmFinding arm_from_json(const ordered_json& j, ArmFinding base = {});
AphasiaFinding aphasia_from_json(const ordered_json& j, AphasiaFinding base = {});
EyeFinding eye_from_json(const ordered_json& j, EyeFinding base = {});
NeglectFinding neglect_from_json(const ordered_json& j, NeglectFinding base = {});

FastEdFindings findings_from_json(const ordered_json& j);
ComponentScores scores_from_json(const ordered_json& j);
TimeAnchors time_anchors_from_json(const ordered_json& j);
AncillaryData ancillary_from_json(const ordered_json& j);
VideoRef video_from_json(const ordered_json& j);
Discrepancy discrepancy_from_json(const ordered_json& j);
AssessmentState assessment_from_json(const ordered_json& j);

std::optional<UtcMinute> optional_time_from_json(const ordered_json& j, std::string_view what);
GlucoseReading glucose_from_json(const ordered_json& j);

}  // namespace voice::assessment
