#include "voice/scripted/script.hpp"

#include "voice/assessment/rubric.hpp"
#include "voice/assessment/state_json.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace voice::scripted {

using namespace voice::assessment;
using agents::ToolKind;

FaultSpec FaultSpec::skip(Component c) {
    FaultSpec f;
    f.kind = FaultKind::skip_component;
    f.component = c;
    return f;
}

FaultSpec FaultSpec::misscore(Component c, int wrong_value) {
    FaultSpec f;
    f.kind = FaultKind::misscore;
    f.component = c;
    f.wrong_value = wrong_value;
    return f;
}

FaultSpec FaultSpec::hallucinate(std::string field, ordered_json value) {
    FaultSpec f;
    f.kind = FaultKind::hallucinate_field;
    f.field = std::move(field);
    f.value = std::move(value);
    return f;
}

FaultSpec FaultSpec::garble(int turn_index) {
    FaultSpec f;
    f.kind = FaultKind::garble_transcript;
    f.turn_index = turn_index;
    return f;
}

ordered_json FaultSpec::to_json() const {
    ordered_json j{{"kind", enum_name(kind)}};
    switch (kind) {
        case FaultKind::skip_component:
            j["component"] = enum_name(*component);
            break;
        case FaultKind::misscore:
            j["component"] = enum_name(*component);
            j["value"] = wrong_value;
            break;
        case FaultKind::hallucinate_field:
            j["field"] = field;
            j["value"] = value;
            break;
        case FaultKind::garble_transcript:
            j["turn_index"] = turn_index;
            break;
    }
    return j;
}

FaultSpec FaultSpec::from_json(const ordered_json& j) {
    if (!j.is_object()) throw ScriptError("fault must be an object");
    try {
        const auto kind = parse_enum<FaultKind>(j.at("kind"), "fault kind");
        switch (kind) {
            case FaultKind::skip_component:
                return skip(parse_enum<Component>(j.at("component"), "fault component"));
            case FaultKind::misscore:
                return misscore(parse_enum<Component>(j.at("component"), "fault component"), j.at("value").get<int>());
            case FaultKind::hallucinate_field:
                return hallucinate(j.at("field").get<std::string>(), j.at("value"));
            case FaultKind::garble_transcript:
                return garble(j.at("turn_index").get<int>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ScriptError(std::string("malformed fault: ") + e.what());
    } catch (const SchemaError& e) {
        throw ScriptError(std::string("malformed fault: ") + e.what());
    }
    throw ScriptError("unknown fault kind");
}

std::string FaultSpec::describe() const {
    switch (kind) {
        case FaultKind::skip_component:
            return "skip_component(" + enum_string(*component) + ")";
        case FaultKind::misscore:
            return "misscore(" + enum_string(*component) + ", " + std::to_string(wrong_value) + ")";
        case FaultKind::hallucinate_field:
            return "hallucinate_field(" + field + ", " + value.dump() + ")";
        case FaultKind::garble_transcript:
            return "garble_transcript(" + std::to_string(turn_index) + ")";
    }
    return "?";
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

bool keywords_match(const std::vector<std::string>& keywords, std::string_view normalized_text) {
    return std::all_of(keywords.begin(), keywords.end(),
                       [&](const std::string& k) { return normalized_text.find(k) != std::string_view::npos; });
}

bool field_belongs_to(std::string_view field, Component component) {
    const auto covers = [&](std::string_view prefix) {
        return field == prefix ||
               (field.size() > prefix.size() && field.starts_with(prefix) && field[prefix.size()] == '.');
    };
    switch (component) {
        case Component::facial: return covers("findings.facial") || field == "scores.facial";
        case Component::arm: return covers("findings.arm") || field == "scores.arm";
        case Component::speech:
            return field == "findings.speech_slurred" || covers("findings.aphasia") || field == "scores.speech";
        case Component::eye: return covers("findings.eye_deviation") || field == "scores.eye";
        case Component::neglect: return covers("findings.neglect") || field == "scores.neglect";
    }
    return false;
}

namespace {

std::string step_label(std::size_t index, const ScriptStep& step) {
    return "step " + std::to_string(index + 1) + " (" + enum_string(step.expected_agent) + ")";
}

bool is_update_of(const ToolCall& call, std::string_view field) {
    return call.kind == ToolKind::update_assessment_state && call.arguments.value("field", "") == field;
}

ToolCall tool_from_json(const ordered_json& j) {
    if (!j.is_object()) throw ScriptError("tool call must be an object");
    if (j.contains("kind")) return ToolCall::from_json(j);
    ToolCall call;
    if (j.contains("update")) {
        if (!j.contains("value")) throw ScriptError("update shorthand needs a 'value'");
        call = ToolCall::update(j.at("update").get<std::string>(), j.at("value"));
    } else if (j.contains("video")) {
        call = ToolCall::start_video(parse_enum<VideoComponent>(j.at("video"), "video component"));
    } else if (j.contains("transfer")) {
        call = ToolCall::transfer(parse_enum<AgentId>(j.at("transfer"), "transfer target"));
    } else if (j.contains("call")) {
        const auto kind = parse_enum<ToolKind>(j.at("call"), "tool kind");
        if (kind != ToolKind::run_final_analysis && kind != ToolKind::disconnect) {
            throw ScriptError("'call' shorthand is only for run_final_analysis and disconnect");
        }
        call = ToolCall{kind, ordered_json::object()};
    } else {
        throw ScriptError("unrecognized tool call " + j.dump());
    }
    if (auto problem = agents::validate_arguments(call); !problem.empty()) throw ScriptError(problem);
    return call;
}

ordered_json tool_to_json(const ToolCall& call) {
    switch (call.kind) {
        case ToolKind::update_assessment_state:
            return {{"update", call.arguments.at("field")}, {"value", call.arguments.at("value")}};
        case ToolKind::start_video_recording:
            return {{"video", call.arguments.at("component")}};
        case ToolKind::transfer_agent:
            return {{"transfer", call.arguments.at("target")}};
        case ToolKind::run_final_analysis:
        case ToolKind::disconnect:
            return {{"call", enum_name(call.kind)}};
    }
    return call.to_json();
}

std::vector<std::string> string_or_list(const ordered_json& j) {
    if (j.is_string()) return {j.get<std::string>()};
    if (!j.is_array()) throw ScriptError("expected a string or a list of strings");
    std::vector<std::string> out;
    for (const auto& s : j) out.push_back(s.get<std::string>());
    return out;
}

// Component findings written by the steps, replayed onto empty findings.
FastEdFindings recorded_findings(const ConversationScript& script, Component component) {
    AssessmentState scratch;
    for (const ScriptStep& step : script.steps) {
        for (const ToolCall& call : step.tool_calls) {
            if (call.kind != ToolKind::update_assessment_state) continue;
            const std::string field = call.arguments.at("field").get<std::string>();
            if (!field.starts_with("findings.") || !field_belongs_to(field, component)) continue;
            agents::apply_update(scratch, field, call.arguments.at("value"), UtcMinute{});
        }
    }
    return scratch.findings;
}

std::vector<ToolCall> canonical_updates(const FastEdFindings& f, Component component) {
    switch (component) {
        case Component::facial:
            return {ToolCall::update("findings.facial", enum_name(*f.facial))};
        case Component::arm:
            return {ToolCall::update("findings.arm", to_json(*f.arm))};
        case Component::speech:
            return {ToolCall::update("findings.speech_slurred", *f.speech_slurred),
                    ToolCall::update("findings.aphasia", to_json(*f.aphasia))};
        case Component::eye:
            return {ToolCall::update("findings.eye_deviation", to_json(*f.eye_deviation))};
        case Component::neglect:
            return {ToolCall::update("findings.neglect", to_json(*f.neglect))};
    }
    return {};
}

}  // namespace

void validate_script(const ConversationScript& script, const agents::AgentTable& table) {
    if (script.steps.empty()) throw ScriptError("script '" + script.script_id + "' has no steps");
    const auto& flow = table.flow();
    std::size_t position = 0;
    for (std::size_t i = 0; i < script.steps.size(); ++i) {
        const ScriptStep& step = script.steps[i];
        const AgentId agent = step.expected_agent;
        if (flow[position] != agent) {
            std::optional<std::size_t> next = table.next_position(position, agent);
            if (!next && agent == AgentId::final_summary && flow[position] == AgentId::main) {
                for (std::size_t p = position; p-- > 0;) {
                    if (flow[p] == agent) {
                        next = p;
                        break;
                    }
                }
            }
            if (!next) {
                throw ScriptError(step_label(i, step) + " is out of order: " + enum_string(agent) +
                                  " cannot follow " + enum_string(flow[position]));
            }
            position = *next;
        }
        if (step.trigger == Trigger::user && step.on_no_match != OnNoMatch::accept_any && step.keywords.empty()) {
            throw ScriptError(step_label(i, step) + " needs keywords unless on_no_match is accept_any");
        }
        for (const ToolCall& call : step.tool_calls) {
            if (auto problem = agents::validate_arguments(call); !problem.empty()) {
                throw ScriptError(step_label(i, step) + ": " + problem);
            }
            if (!table.allows(agent, call.kind)) {
                throw ScriptError(step_label(i, step) + ": agent may not call " + enum_string(call.kind));
            }
        }
    }
}

ConversationScript parse_script(const ordered_json& j, const agents::AgentTable& table) {
    if (!j.is_object() || j.value("schema", "") != kScriptSchema) {
        throw ScriptError("expected a voice-script/1 document");
    }
    ConversationScript script;
    script.script_id = j.value("script_id", "");
    script.description = j.value("description", "");
    if (!j.contains("steps") || !j["steps"].is_array()) throw ScriptError("script needs a 'steps' list");
    std::size_t index = 0;
    for (const auto& s : j["steps"]) {
        ++index;
        try {
            ScriptStep step;
            step.expected_agent = parse_enum<AgentId>(s.at("agent"), "agent");
            if (s.contains("trigger")) step.trigger = parse_enum<Trigger>(s["trigger"], "trigger");
            if (s.contains("match")) {
                for (const auto& k : string_or_list(s["match"])) {
                    std::string norm = normalize_text(k);
                    if (norm.empty()) throw ScriptError("empty keyword");
                    step.keywords.push_back(std::move(norm));
                }
            }
            if (s.contains("say")) step.assistant_text = string_or_list(s["say"]);
            if (s.contains("tools")) {
                for (const auto& t : s["tools"]) step.tool_calls.push_back(tool_from_json(t));
            }
            if (s.contains("on_no_match")) step.on_no_match = parse_enum<OnNoMatch>(s["on_no_match"], "on_no_match");
            script.steps.push_back(std::move(step));
        } catch (const nlohmann::json::exception& e) {
            throw ScriptError("step " + std::to_string(index) + ": " + e.what());
        } catch (const SchemaError& e) {
            throw ScriptError("step " + std::to_string(index) + ": " + e.what());
        } catch (const ScriptError& e) {
            throw ScriptError("step " + std::to_string(index) + ": " + e.what());
        }
    }
    validate_script(script, table);
    if (j.contains("applied_faults")) {
        for (const auto& f : j["applied_faults"]) script.faults.push_back(FaultSpec::from_json(f));
    }
    if (j.contains("faults")) {
        for (const auto& f : j["faults"]) script = inject_fault(script, FaultSpec::from_json(f), table);
    }
    return script;
}

ConversationScript load_script(const std::filesystem::path& path, const agents::AgentTable& table) {
    std::ifstream in(path);
    if (!in) throw ScriptError("cannot open script " + path.string());
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ScriptError(path.string() + ": " + e.what());
    }
    try {
        return parse_script(j, table);
    } catch (const ScriptError& e) {
        throw ScriptError(path.string() + ": " + e.what());
    }
}

ordered_json script_to_json(const ConversationScript& script) {
    ordered_json steps = ordered_json::array();
    for (const ScriptStep& s : script.steps) {
        ordered_json step{{"agent", enum_name(s.expected_agent)}, {"trigger", enum_name(s.trigger)}};
        if (!s.keywords.empty()) step["match"] = s.keywords;
        if (!s.assistant_text.empty()) step["say"] = s.assistant_text;
        if (!s.tool_calls.empty()) {
            ordered_json tools = ordered_json::array();
            for (const ToolCall& c : s.tool_calls) tools.push_back(tool_to_json(c));
            step["tools"] = std::move(tools);
        }
        if (s.on_no_match != OnNoMatch::reprompt) step["on_no_match"] = enum_name(s.on_no_match);
        steps.push_back(std::move(step));
    }
    ordered_json faults = ordered_json::array();
    for (const FaultSpec& f : script.faults) faults.push_back(f.to_json());
    // Faults are already applied to the steps; they are kept for reference
    // under a key that parse_script does not re-apply.
    return {{"schema", kScriptSchema},
            {"script_id", script.script_id},
            {"description", script.description},
            {"steps", std::move(steps)},
            {"applied_faults", std::move(faults)}};
}

ConversationScript inject_fault(const ConversationScript& script, const FaultSpec& fault,
                                const agents::AgentTable& table) {
    ConversationScript out = script;
    switch (fault.kind) {
        case FaultKind::skip_component: {
            const AgentId agent = agents::agent_for(*fault.component);
            const auto next = table.successor(agent);
            const auto removed = std::erase_if(out.steps, [&](const ScriptStep& s) { return s.expected_agent == agent; });
            if (removed == 0 || !next) {
                throw ScriptError("skip_component: script has no steps for " + enum_string(*fault.component));
            }
            for (ScriptStep& s : out.steps) {
                for (ToolCall& c : s.tool_calls) {
                    if (c.kind == ToolKind::transfer_agent && c.arguments["target"] == enum_name(agent)) {
                        c = ToolCall::transfer(*next);
                    }
                }
            }
            break;
        }
        case FaultKind::misscore: {
            const Component component = *fault.component;
            if (fault.wrong_value < 0 || fault.wrong_value > max_component_score(component)) {
                throw ScriptError("misscore: value out of range for " + enum_string(component));
            }
            bool wrote_findings = false;
            bool wrote_score = false;
            for (const ScriptStep& s : out.steps) {
                for (const ToolCall& c : s.tool_calls) {
                    if (c.kind != ToolKind::update_assessment_state) continue;
                    const std::string field = c.arguments["field"].get<std::string>();
                    if (!field_belongs_to(field, component)) continue;
                    (field.starts_with("scores.") ? wrote_score : wrote_findings) = true;
                }
            }
            if (!wrote_findings) throw ScriptError("misscore: script never records " + enum_string(component));

            FastEdFindings findings = recorded_findings(out, component);
            set_canonical_finding(findings, component, fault.wrong_value);
            std::vector<ToolCall> replacement = canonical_updates(findings, component);
            if (wrote_score) {
                replacement.push_back(ToolCall::update("scores." + enum_string(component), fault.wrong_value));
            }

            for (ScriptStep& s : out.steps) {
                std::erase_if(s.tool_calls, [&](const ToolCall& c) {
                    return c.kind == ToolKind::update_assessment_state &&
                           field_belongs_to(c.arguments["field"].get<std::string>(), component);
                });
            }
            const AgentId agent = agents::agent_for(component);
            ScriptStep* target = nullptr;
            for (ScriptStep& s : out.steps) {
                if (s.expected_agent == agent) target = &s;
            }
            if (!target) throw ScriptError("misscore: script has no steps for " + enum_string(component));
            auto at = std::find_if(target->tool_calls.begin(), target->tool_calls.end(),
                                   [](const ToolCall& c) { return c.kind == ToolKind::transfer_agent; });
            target->tool_calls.insert(at, replacement.begin(), replacement.end());
            break;
        }
        case FaultKind::hallucinate_field: {
            bool applied = false;
            for (ScriptStep& s : out.steps) {
                auto it = std::find_if(s.tool_calls.begin(), s.tool_calls.end(),
                                       [&](const ToolCall& c) { return is_update_of(c, fault.field); });
                if (it == s.tool_calls.end()) continue;
                if (fault.value.is_null()) {
                    s.tool_calls.erase(it);
                } else {
                    *it = ToolCall::update(fault.field, fault.value);
                }
                applied = true;
                break;
            }
            if (!applied) throw ScriptError("hallucinate_field: script never writes " + fault.field);
            break;
        }
        case FaultKind::garble_transcript: {
            const auto user_steps = std::count_if(out.steps.begin(), out.steps.end(),
                                                  [](const ScriptStep& s) { return s.trigger == Trigger::user; });
            if (fault.turn_index < 0 || fault.turn_index >= user_steps) {
                throw ScriptError("garble_transcript: turn index " + std::to_string(fault.turn_index) +
                                  " is outside the script's user turns");
            }
            break;
        }
    }
    validate_script(out, table);
    out.faults.push_back(fault);
    return out;
}

}  // namespace voice::scripted
