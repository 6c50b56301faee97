#pragma once

#include "voice/assessment/state_json.hpp"
#include "voice/assessment/types.hpp"
#include "voice/scripted/script.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace voice::harness {

using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kScenarioSchema = "voice-scenario/1";

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class MimicKind { none, infection, migraine_aura, thunderclap_headache };

struct GroundTruth {
    assessment::FastEdFindings findings;
    assessment::ComponentScores scores;
    int total = 0;
    bool stroke = false;
    bool lvo = false;
    bool posterior_circulation = false;
    MimicKind mimic = MimicKind::none;
    assessment::Demographics demographics;
    assessment::TimeAnchors times;
    assessment::AncillaryData ancillary;
};

/// One simulated caller utterance. It is chosen when every `when` keyword
/// occurs in what the assistant said since the previous caller turn.
struct CallerLine {
    std::vector<std::string> when;
    std::string say;
};

struct Scenario {
    std::string scenario_id;
    std::string description;
    bool synthetic = true;
    GroundTruth truth;
    std::filesystem::path script_path;  // absolute after loading
    std::vector<scripted::FaultSpec> faults;
    std::vector<CallerLine> caller;
    std::optional<int> user_confidence;
    std::int64_t clock_start_s = 0;
    int turn_seconds = 6;
    std::map<assessment::VideoComponent, int> video_seconds{{assessment::VideoComponent::facial, 10},
                                                            {assessment::VideoComponent::arm, 15}};
    std::string notes;
};

/// Parses a voice-scenario/1 document. Relative script paths resolve against
/// `base_dir`. Throws ScenarioError when the ground truth disagrees with the
/// rubric or the document is malformed.
Scenario parse_scenario(const ordered_json& j, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

struct StudyMix {
    int cases = 0;
    int strokes = 0;
    int lvo = 0;
    int mimics = 0;
    int posterior = 0;
};

StudyMix study_mix(const std::vector<Scenario>& scenarios);

/// Loads every `*.json` in `dir` (not recursive), sorted by scenario id.
/// With `require_study_mix`, the set must be exactly ten cases: seven strokes
/// (four LVO, one posterior circulation with a normal exam) and one mimic
/// each of infection, migraine aura and thunderclap headache.
std::vector<Scenario> load_scenarios(const std::filesystem::path& dir, bool require_study_mix = true);

/// Ease-of-use ratings collected from the physician reviewers.
struct Survey {
    std::vector<int> user_ease;
};

Survey load_survey(const std::filesystem::path& path);

}  // namespace voice::harness

namespace voice {
VOICE_ENUM_NAMES(harness::MimicKind, {harness::MimicKind::none, "none"},
                 {harness::MimicKind::infection, "infection"},
                 {harness::MimicKind::migraine_aura, "migraine_aura"},
                 {harness::MimicKind::thunderclap_headache, "thunderclap_headache"});
}  // namespace voice
