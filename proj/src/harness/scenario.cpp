#include "voice/harness/scenario.hpp"

#include "voice/assessment/rubric.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace voice::harness {

using namespace assessment;

namespace {

const ordered_json& require(const ordered_json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ScenarioError(std::string("missing key '") + key + "'");
    return *it;
}

std::string require_string(const ordered_json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_string()) throw ScenarioError(std::string(key) + ": expected string");
    return v.get<std::string>();
}

bool require_bool(const ordered_json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_boolean()) throw ScenarioError(std::string(key) + ": expected boolean");
    return v.get<bool>();
}

Demographics demographics_from_json(const ordered_json& j) {
    if (!j.is_object()) throw ScenarioError("demographics: expected object");
    Demographics d;
    if (auto it = j.find("age"); it != j.end() && !it->is_null()) {
        if (!it->is_number_integer()) throw ScenarioError("demographics.age: expected integer");
        d.age = it->get<int>();
        if (*d.age < kMinAge || *d.age > kMaxAge) throw ScenarioError("demographics.age out of range");
    }
    if (auto it = j.find("sex"); it != j.end() && !it->is_null()) d.sex = parse_enum<Sex>(*it, "demographics.sex");
    return d;
}

GroundTruth truth_from_json(const ordered_json& j) {
    if (!j.is_object()) throw ScenarioError("ground_truth: expected object");
    GroundTruth t;
    t.findings = findings_from_json(require(j, "findings"));
    t.scores = scores_from_json(require(j, "scores"));
    const auto& total = require(j, "total");
    if (!total.is_number_integer()) throw ScenarioError("ground_truth.total: expected integer");
    t.total = total.get<int>();
    t.stroke = require_bool(j, "stroke");
    t.lvo = require_bool(j, "lvo");
    if (auto it = j.find("posterior_circulation"); it != j.end()) t.posterior_circulation = it->get<bool>();
    if (auto it = j.find("mimic"); it != j.end() && !it->is_null()) t.mimic = parse_enum<MimicKind>(*it, "mimic");
    t.demographics = demographics_from_json(require(j, "demographics"));
    t.times = time_anchors_from_json(require(j, "time_anchors"));
    t.ancillary = ancillary_from_json(require(j, "ancillary"));
    return t;
}

void check_truth(const GroundTruth& t) {
    const ComponentScores expected = score_fast_ed(t.findings);
    if (!(expected == t.scores)) {
        throw ScenarioError("ground truth scores " + to_json(t.scores).dump() + " disagree with rubric " +
                            to_json(expected).dump());
    }
    const TotalScore total = total_score(t.scores);
    if (!total.complete) throw ScenarioError("ground truth leaves a component unassessed");
    if (total.partial_sum != t.total) {
        throw ScenarioError("ground truth total " + std::to_string(t.total) + " is not the component sum " +
                            std::to_string(total.partial_sum));
    }
    if (t.lvo && !t.stroke) throw ScenarioError("ground truth marks an LVO on a non-stroke case");
    if (t.mimic != MimicKind::none && t.stroke) throw ScenarioError("ground truth marks a mimic as a stroke");
    if (t.posterior_circulation && !t.stroke) throw ScenarioError("posterior circulation case must be a stroke");
}

std::int64_t parse_clock(const ordered_json& j) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_string()) {
        if (auto t = UtcMinute::parse(j.get<std::string>())) return t->seconds_since_epoch();
    }
    throw ScenarioError("clock_start: expected timestamp or integer seconds");
}

}  // namespace

Scenario parse_scenario(const ordered_json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ScenarioError("scenario: expected object");
    if (auto it = j.find("schema"); it != j.end() && *it != kScenarioSchema) {
        throw ScenarioError("unsupported scenario schema " + it->dump());
    }
    Scenario s;
    try {
        s.scenario_id = require_string(j, "scenario_id");
        if (auto it = j.find("description"); it != j.end()) s.description = it->get<std::string>();
        if (auto it = j.find("synthetic"); it != j.end()) s.synthetic = it->get<bool>();
        if (auto it = j.find("notes"); it != j.end()) s.notes = it->get<std::string>();
        s.truth = truth_from_json(require(j, "ground_truth"));

        std::filesystem::path script = require_string(j, "script");
        s.script_path = script.is_absolute() ? script : std::filesystem::weakly_canonical(base_dir / script);

        if (auto it = j.find("faults"); it != j.end()) {
            for (const auto& f : *it) s.faults.push_back(scripted::FaultSpec::from_json(f));
        }
        for (const auto& line : require(j, "caller")) {
            CallerLine c;
            const auto& when = require(line, "when");
            if (when.is_string()) {
                c.when.push_back(scripted::normalize_text(when.get<std::string>()));
            } else {
                for (const auto& w : when) c.when.push_back(scripted::normalize_text(w.get<std::string>()));
            }
            c.say = require_string(line, "say");
            s.caller.push_back(std::move(c));
        }
        if (s.caller.empty()) throw ScenarioError("caller: at least one line required");

        if (auto it = j.find("user_confidence"); it != j.end() && !it->is_null()) {
            const int v = it->get<int>();
            if (v < 1 || v > 5) throw ScenarioError("user_confidence must be 1..5");
            s.user_confidence = v;
        }
        s.clock_start_s = parse_clock(require(j, "clock_start"));
        if (auto it = j.find("turn_seconds"); it != j.end()) s.turn_seconds = it->get<int>();
        if (s.turn_seconds < 0) throw ScenarioError("turn_seconds must not be negative");
        if (auto it = j.find("video_seconds"); it != j.end()) {
            for (const auto& [key, value] : it->items()) {
                auto c = enum_parse<VideoComponent>(key);
                if (!c) throw ScenarioError("video_seconds: unknown component '" + key + "'");
                s.video_seconds[*c] = value.get<int>();
            }
        }
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception& e) {
        throw ScenarioError(e.what());
    }
    check_truth(s.truth);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open " + path.string());
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(path.filename().string() + ": " + e.what());
    }
    try {
        return parse_scenario(j, path.parent_path());
    } catch (const ScenarioError& e) {
        throw ScenarioError(path.filename().string() + ": " + e.what());
    }
}

StudyMix study_mix(const std::vector<Scenario>& scenarios) {
    StudyMix m;
    for (const auto& s : scenarios) {
        ++m.cases;
        if (s.truth.stroke) ++m.strokes;
        if (s.truth.lvo) ++m.lvo;
        if (s.truth.mimic != MimicKind::none) ++m.mimics;
        if (s.truth.posterior_circulation) ++m.posterior;
    }
    return m;
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& dir, bool require_study_mix) {
    if (!std::filesystem::is_directory(dir)) throw ScenarioError("not a directory: " + dir.string());
    std::vector<Scenario> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(load_scenario(entry.path()));
    }
    std::sort(out.begin(), out.end(),
              [](const Scenario& a, const Scenario& b) { return a.scenario_id < b.scenario_id; });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].scenario_id == out[i - 1].scenario_id) {
            throw ScenarioError("duplicate scenario id " + out[i].scenario_id);
        }
    }
    if (!require_study_mix) return out;

    const StudyMix m = study_mix(out);
    if (m.cases != 10 || m.strokes != 7 || m.lvo != 4 || m.mimics != 3 || m.posterior != 1) {
        throw ScenarioError("scenario mix is " + std::to_string(m.cases) + " cases, " + std::to_string(m.strokes) +
                            " strokes, " + std::to_string(m.lvo) + " LVO, " + std::to_string(m.mimics) +
                            " mimics, " + std::to_string(m.posterior) +
                            " posterior; expected 10, 7, 4, 3 and 1");
    }
    std::set<MimicKind> kinds;
    for (const auto& s : out) {
        if (s.truth.mimic != MimicKind::none) kinds.insert(s.truth.mimic);
        if (s.truth.posterior_circulation && s.truth.total != 0) {
            throw ScenarioError(s.scenario_id + ": posterior circulation case must have a normal FAST-ED exam");
        }
    }
    if (kinds.size() != 3) throw ScenarioError("mimics must cover infection, migraine aura and thunderclap headache");
    return out;
}

Survey load_survey(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open " + path.string());
    Survey s;
    try {
        const auto j = ordered_json::parse(in);
        for (const auto& v : j.at("user_ease")) {
            const int x = v.get<int>();
            if (x < 1 || x > 5) throw ScenarioError("user_ease values must be 1..5");
            s.user_ease.push_back(x);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(path.filename().string() + ": " + e.what());
    }
    return s;
}

}  // namespace voice::harness
