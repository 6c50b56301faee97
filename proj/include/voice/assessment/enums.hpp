#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace voice {

// Wire names for closed enums. Each enum provides a specialization of
// EnumNames with a `table` of (value, name) pairs.
template <class E>
struct EnumNames;

template <class E>
constexpr std::string_view enum_name(E value) {
    for (const auto& [v, name] : EnumNames<E>::table) {
        if (v == value) return name;
    }
    return "?";
}

template <class E>
constexpr std::optional<E> enum_parse(std::string_view name) {
    for (const auto& [v, n] : EnumNames<E>::table) {
        if (n == name) return v;
    }
    return std::nullopt;
}

template <class E>
std::string enum_string(E value) {
    return std::string(enum_name(value));
}

#define VOICE_ENUM_NAMES(E, ...)                                                      \
    template <>                                                                       \
    struct EnumNames<E> {                                                             \
        static constexpr auto table = std::to_array<std::pair<E, std::string_view>>( \
            {__VA_ARGS__});                                                           \
    }

namespace assessment {

enum class Sex { male, female, unknown };
enum class FacialPalsy { none, left_droop, right_droop };
enum class Side { none, left, right, both };
enum class ArmSeverity { no_weakness, drifts_down, falls_rapidly_or_no_effort };
enum class GazeDirection { none, left, right };
enum class GazeSeverity { none, partial, forced };
enum class Anticoagulant { warfarin, dabigatran, apixaban, rivaroxaban, edoxaban, heparin_enoxaparin, other };
enum class PriorStroke { yes, no, unknown };
enum class VideoComponent { facial, arm };
enum class Speaker { user, assistant, system };

/// The five scored FAST-ED components, in report order.
enum class Component { facial, arm, speech, eye, neglect };
inline constexpr std::array<Component, 5> kComponents{Component::facial, Component::arm, Component::speech,
                                                      Component::eye, Component::neglect};

enum class DiscrepancyKind {
    sex_mismatch,
    missing_component,
    score_sum_mismatch,
    neglect_without_weakness,
    time_order_violation,
    unknown_anticoagulant,
    missing_required_field,
};
inline constexpr std::array<DiscrepancyKind, 7> kDiscrepancyKinds{
    DiscrepancyKind::sex_mismatch,           DiscrepancyKind::missing_component,
    DiscrepancyKind::score_sum_mismatch,     DiscrepancyKind::neglect_without_weakness,
    DiscrepancyKind::time_order_violation,   DiscrepancyKind::unknown_anticoagulant,
    DiscrepancyKind::missing_required_field,
};

enum class Resolution { clarify_with_user, auto_correct, flag_only };

}  // namespace assessment

VOICE_ENUM_NAMES(assessment::Sex, {assessment::Sex::male, "male"}, {assessment::Sex::female, "female"},
                 {assessment::Sex::unknown, "unknown"});
VOICE_ENUM_NAMES(assessment::FacialPalsy, {assessment::FacialPalsy::none, "none"},
                 {assessment::FacialPalsy::left_droop, "left_droop"},
                 {assessment::FacialPalsy::right_droop, "right_droop"});
VOICE_ENUM_NAMES(assessment::Side, {assessment::Side::none, "none"}, {assessment::Side::left, "left"},
                 {assessment::Side::right, "right"}, {assessment::Side::both, "both"});
VOICE_ENUM_NAMES(assessment::ArmSeverity, {assessment::ArmSeverity::no_weakness, "no_weakness"},
                 {assessment::ArmSeverity::drifts_down, "drifts_down"},
                 {assessment::ArmSeverity::falls_rapidly_or_no_effort, "falls_rapidly_or_no_effort"});
VOICE_ENUM_NAMES(assessment::GazeDirection, {assessment::GazeDirection::none, "none"},
                 {assessment::GazeDirection::left, "left"}, {assessment::GazeDirection::right, "right"});
VOICE_ENUM_NAMES(assessment::GazeSeverity, {assessment::GazeSeverity::none, "none"},
                 {assessment::GazeSeverity::partial, "partial"}, {assessment::GazeSeverity::forced, "forced"});
VOICE_ENUM_NAMES(assessment::Anticoagulant, {assessment::Anticoagulant::warfarin, "warfarin"},
                 {assessment::Anticoagulant::dabigatran, "dabigatran"},
                 {assessment::Anticoagulant::apixaban, "apixaban"},
                 {assessment::Anticoagulant::rivaroxaban, "rivaroxaban"},
                 {assessment::Anticoagulant::edoxaban, "edoxaban"},
                 {assessment::Anticoagulant::heparin_enoxaparin, "heparin_enoxaparin"},
                 {assessment::Anticoagulant::other, "other"});
VOICE_ENUM_NAMES(assessment::PriorStroke, {assessment::PriorStroke::yes, "yes"},
                 {assessment::PriorStroke::no, "no"}, {assessment::PriorStroke::unknown, "unknown"});
VOICE_ENUM_NAMES(assessment::VideoComponent, {assessment::VideoComponent::facial, "facial"},
                 {assessment::VideoComponent::arm, "arm"});
VOICE_ENUM_NAMES(assessment::Speaker, {assessment::Speaker::user, "user"},
                 {assessment::Speaker::assistant, "assistant"}, {assessment::Speaker::system, "system"});
VOICE_ENUM_NAMES(assessment::Component, {assessment::Component::facial, "facial"},
                 {assessment::Component::arm, "arm"}, {assessment::Component::speech, "speech"},
                 {assessment::Component::eye, "eye"}, {assessment::Component::neglect, "neglect"});
VOICE_ENUM_NAMES(assessment::DiscrepancyKind,
                 {assessment::DiscrepancyKind::sex_mismatch, "sex_mismatch"},
                 {assessment::DiscrepancyKind::missing_component, "missing_component"},
                 {assessment::DiscrepancyKind::score_sum_mismatch, "score_sum_mismatch"},
                 {assessment::DiscrepancyKind::neglect_without_weakness, "neglect_without_weakness"},
                 {assessment::DiscrepancyKind::time_order_violation, "time_order_violation"},
                 {assessment::DiscrepancyKind::unknown_anticoagulant, "unknown_anticoagulant"},
                 {assessment::DiscrepancyKind::missing_required_field, "missing_required_field"});
VOICE_ENUM_NAMES(assessment::Resolution, {assessment::Resolution::clarify_with_user, "clarify_with_user"},
                 {assessment::Resolution::auto_correct, "auto_correct"},
                 {assessment::Resolution::flag_only, "flag_only"});

namespace assessment {

/// Maps brand or generic drug names ("Xarelto", "rivaroxaban", ...) to the
/// closed anticoagulant set; anything unrecognized is `other`.
Anticoagulant classify_anticoagulant(std::string_view name);

}  // namespace assessment
}  // namespace voice
