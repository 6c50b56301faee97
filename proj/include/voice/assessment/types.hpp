#pragma once

#include "voice/assessment/enums.hpp"
#include "voice/assessment/time.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace voice::assessment {

inline constexpr int kMinAge = 0;
inline constexpr int kMaxAge = 130;
inline constexpr int kMinGlucose = 10;
inline constexpr int kMaxGlucose = 1000;

struct Demographics {
    std::optional<int> age;
    Sex sex = Sex::unknown;

    friend bool operator==(const Demographics&, const Demographics&) = default;
};

struct TimeAnchors {
    std::optional<UtcMinute> last_known_well;
    std::optional<UtcMinute> symptom_onset;
    bool onset_witnessed = false;

    friend bool operator==(const TimeAnchors&, const TimeAnchors&) = default;
};

struct ArmFinding {
    Side side = Side::none;
    ArmSeverity severity = ArmSeverity::no_weakness;

    friend bool operator==(const ArmFinding&, const ArmFinding&) = default;
};

struct AphasiaFinding {
    int items_named = 3;  // 0..3
    bool command_performed = true;
    bool mute_or_global = false;

    friend bool operator==(const AphasiaFinding&, const AphasiaFinding&) = default;
};

struct EyeFinding {
    GazeDirection direction = GazeDirection::none;
    GazeSeverity severity = GazeSeverity::none;

    friend bool operator==(const EyeFinding&, const EyeFinding&) = default;
};

struct NeglectFinding {
    bool recognizes_weakness = true;
    bool recognizes_own_arm = true;

    friend bool operator==(const NeglectFinding&, const NeglectFinding&) = default;
};

// An empty optional is "unassessed", which is never the same as a normal
// finding. Speech counts as assessed only once both the slurring probe and
// the aphasia record are present.
struct FastEdFindings {
    std::optional<FacialPalsy> facial;
    std::optional<ArmFinding> arm;
    std::optional<bool> speech_slurred;
    std::optional<AphasiaFinding> aphasia;
    std::optional<EyeFinding> eye_deviation;
    std::optional<NeglectFinding> neglect;

    bool speech_assessed() const { return speech_slurred.has_value() && aphasia.has_value(); }

    friend bool operator==(const FastEdFindings&, const FastEdFindings&) = default;
};

struct TotalScore {
    int partial_sum = 0;  // sum over assessed components
    bool complete = false;

    std::optional<int> value() const { return complete ? std::optional<int>(partial_sum) : std::nullopt; }

    friend bool operator==(const TotalScore&, const TotalScore&) = default;
};

/// Per-component scores, indexed by Component. nullopt means unassessed.
struct ComponentScores {
    std::array<std::optional<int>, 5> values{};

    std::optional<int>& operator[](Component c) { return values[static_cast<std::size_t>(c)]; }
    const std::optional<int>& operator[](Component c) const { return values[static_cast<std::size_t>(c)]; }

    TotalScore total() const;

    friend bool operator==(const ComponentScores&, const ComponentScores&) = default;
};

inline constexpr int max_component_score(Component c) { return c == Component::facial ? 1 : 2; }
inline constexpr int kMaxTotal = 9;

struct AnticoagulantEntry {
    Anticoagulant drug = Anticoagulant::other;
    std::string reported_name;

    friend bool operator==(const AnticoagulantEntry&, const AnticoagulantEntry&) = default;
};

struct GlucoseReading {
    std::optional<int> mg_dl;  // nullopt: could not be measured

    bool unmeasurable() const { return !mg_dl.has_value(); }
    friend bool operator==(const GlucoseReading&, const GlucoseReading&) = default;
};

struct AncillaryData {
    std::optional<std::vector<AnticoagulantEntry>> anticoagulants;  // nullopt: never asked
    std::optional<UtcMinute> last_dose_time;
    std::optional<PriorStroke> prior_stroke;
    std::string prior_stroke_detail;
    std::optional<GlucoseReading> glucose;

    friend bool operator==(const AncillaryData&, const AncillaryData&) = default;
};

struct VideoRef {
    VideoComponent component = VideoComponent::facial;
    std::string video_id;
    double duration_s = 0.0;
    std::string uri;

    friend bool operator==(const VideoRef&, const VideoRef&) = default;
};

struct AssessmentState {
    Demographics demographics;
    TimeAnchors time_anchors;
    FastEdFindings findings;
    ComponentScores scores;
    std::optional<int> reported_total;  // a total asserted by an agent, pending the final check
    AncillaryData ancillary;
    std::optional<bool> stroke_likely;
    std::optional<bool> lvo_likely;
    std::vector<VideoRef> videos;
    std::optional<std::string> summary_narrative;
    std::vector<std::string> completeness;

    friend bool operator==(const AssessmentState&, const AssessmentState&) = default;
};

struct Discrepancy {
    DiscrepancyKind kind = DiscrepancyKind::missing_required_field;
    std::string field;
    std::string detail;
    Resolution resolution = Resolution::flag_only;

    friend bool operator==(const Discrepancy&, const Discrepancy&) = default;
    friend auto operator<=>(const Discrepancy& a, const Discrepancy& b) {
        if (auto c = a.kind <=> b.kind; c != 0) return c;
        return a.field <=> b.field;
    }
};

struct Turn {
    Speaker speaker = Speaker::system;
    std::string text;
    std::int64_t at_s = 0;  // clock seconds

    friend bool operator==(const Turn&, const Turn&) = default;
};

using Transcript = std::vector<Turn>;

}  // namespace voice::assessment
