#include "voice/agents/agent_table.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace voice::agents {

using assessment::Component;
using json = nlohmann::ordered_json;

AgentTable::AgentTable(std::vector<AgentDescriptor> descriptors, std::vector<AgentId> flow)
    : descriptors_(std::move(descriptors)), flow_(std::move(flow)) {}

std::vector<AgentId> agent_order() {
    return {AgentId::main,    AgentId::onset_lkw,     AgentId::facial,  AgentId::arm,
            AgentId::speech,  AgentId::eye_deviation, AgentId::neglect, AgentId::anticoagulant,
            AgentId::main,    AgentId::final_summary, AgentId::main};
}

AgentTable AgentTable::defaults() {
    using T = ToolKind;
    const std::set<T> component_tools{T::update_assessment_state, T::transfer_agent};
    const std::set<T> video_tools{T::update_assessment_state, T::start_video_recording, T::transfer_agent};

    std::vector<AgentDescriptor> d{
        {AgentId::main,
         "You run a guided prehospital stroke assessment over voice. Open by asking the patient's age and sex and "
         "record them. After the component agents finish, ask about prior stroke history and blood glucose, then "
         "hand off to the final summary agent. When control returns with clarification requests, ask about each "
         "listed field and record the answer. When the summary is ready, deliver it, tell the caller to contact "
         "emergency services, and disconnect once the caller has no further questions.",
         {T::update_assessment_state, T::transfer_agent, T::disconnect}},
        {AgentId::onset_lkw,
         "Establish whether symptom onset was witnessed. Record the exact onset time if known; otherwise record "
         "the last time the patient was known to be normal. Resolve relative times (yesterday, this morning) to "
         "clock times.",
         component_tools},
        {AgentId::facial,
         "Start a video recording of the face first. Then have the caller ask the patient to smile or show their "
         "teeth and report whether one side droops. Record the facial finding.",
         video_tools},
        {AgentId::arm,
         "Start a video recording of the arms first. Then have the patient hold both arms out, palms up, for ten "
         "seconds. Record which side drifts, falls, or cannot be lifted.",
         video_tools},
        {AgentId::speech,
         "Assess speech in three parts: slurring on a repeated sentence, naming three common objects, and "
         "following a simple command. Record each result.",
         component_tools},
        {AgentId::eye_deviation,
         "Ask whether the eyes are stuck looking to one side or can follow a finger left and right. Record "
         "direction and whether deviation is partial or forced.",
         component_tools},
        {AgentId::neglect,
         "Show the patient the weak arm and ask whether it is weak, then ask whose arm it is. Record whether each "
         "was recognized.",
         component_tools},
        {AgentId::anticoagulant,
         "Ask whether the patient takes any listed anticoagulant and, if so, when the last dose was taken. Record "
         "only drugs the caller names.",
         component_tools},
        {AgentId::final_summary,
         "Invoke the final analysis. It double-checks scores, determines stroke and LVO likelihood, and drafts "
         "the summary.",
         {T::update_assessment_state, T::run_final_analysis}},
    };
    return AgentTable(std::move(d), agent_order());
}

void AgentTable::validate() const {
    std::map<AgentId, int> described;
    for (const auto& d : descriptors_) {
        if (++described[d.id] > 1) throw ConfigError("duplicate descriptor for agent " + enum_string(d.id));
        for (ToolKind t : d.allowed_tools) {
            if (t == ToolKind::disconnect && d.id != AgentId::main) {
                throw ConfigError("agent " + enum_string(d.id) + " may not hold the disconnect tool");
            }
            if (t == ToolKind::run_final_analysis && d.id != AgentId::final_summary) {
                throw ConfigError("agent " + enum_string(d.id) + " may not hold the run_final_analysis tool");
            }
            if (t == ToolKind::start_video_recording && d.id != AgentId::facial && d.id != AgentId::arm) {
                throw ConfigError("agent " + enum_string(d.id) + " may not hold the start_video_recording tool");
            }
        }
    }
    if (flow_.empty()) throw ConfigError("agent flow is empty");
    if (flow_.front() != AgentId::main || flow_.back() != AgentId::main) {
        throw ConfigError("agent flow must start and end with main");
    }
    std::map<AgentId, int> seen;
    for (std::size_t i = 0; i < flow_.size(); ++i) {
        const AgentId a = flow_[i];
        if (!described.count(a)) throw ConfigError("flow references undescribed agent " + enum_string(a));
        if (i > 0 && flow_[i - 1] == a) throw ConfigError("agent " + enum_string(a) + " transfers to itself");
        if (++seen[a] > 1 && a != AgentId::main) throw ConfigError("cycle: agent " + enum_string(a) + " appears twice");
    }
    for (AgentId a : kAgentIds) {
        if (!seen.count(a)) throw ConfigError("agent " + enum_string(a) + " is unreachable (missing from flow)");
    }
    const std::size_t summary_at = *first_position(AgentId::final_summary);
    for (Component c : assessment::kComponents) {
        if (*first_position(agent_for(c)) > summary_at) {
            throw ConfigError("component agent " + enum_string(agent_for(c)) + " comes after final_summary");
        }
    }
}

const AgentDescriptor& AgentTable::descriptor(AgentId id) const {
    for (const auto& d : descriptors_) {
        if (d.id == id) return d;
    }
    throw ConfigError("no descriptor for agent " + enum_string(id));
}

bool AgentTable::allows(AgentId id, ToolKind tool) const {
    return descriptor(id).allowed_tools.count(tool) > 0;
}

std::optional<AgentId> AgentTable::successor(AgentId id) const {
    auto pos = first_position(id);
    if (!pos || *pos + 1 >= flow_.size()) return std::nullopt;
    return flow_[*pos + 1];
}

std::optional<std::size_t> AgentTable::next_position(std::size_t from, AgentId target) const {
    for (std::size_t i = from + 1; i < flow_.size(); ++i) {
        if (flow_[i] == target) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> AgentTable::first_position(AgentId id) const {
    auto it = std::find(flow_.begin(), flow_.end(), id);
    if (it == flow_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - flow_.begin());
}

AgentTable AgentTable::from_json(const json& j) {
    if (!j.is_object() || j.value("schema", "") != kAgentsSchema) {
        throw ConfigError("agent config must declare schema voice-agents/1");
    }
    std::vector<AgentDescriptor> descriptors;
    for (const auto& a : j.at("agents")) {
        AgentDescriptor d;
        auto id = enum_parse<AgentId>(a.at("id").get<std::string>());
        if (!id) throw ConfigError("unknown agent id '" + a.at("id").get<std::string>() + "'");
        d.id = *id;
        d.instructions = a.value("instructions", "");
        for (const auto& t : a.at("allowed_tools")) {
            auto tool = enum_parse<ToolKind>(t.get<std::string>());
            if (!tool) throw ConfigError("unknown tool '" + t.get<std::string>() + "'");
            d.allowed_tools.insert(*tool);
        }
        descriptors.push_back(std::move(d));
    }
    std::vector<AgentId> flow;
    for (const auto& f : j.at("flow")) {
        auto id = enum_parse<AgentId>(f.get<std::string>());
        if (!id) throw ConfigError("unknown agent id in flow '" + f.get<std::string>() + "'");
        flow.push_back(*id);
    }
    AgentTable table(std::move(descriptors), std::move(flow));
    table.validate();
    return table;
}

AgentTable AgentTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open agent config " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw ConfigError("agent config " + path.string() + ": " + e.what());
    }
}

json AgentTable::to_json() const {
    json agents = json::array();
    for (const auto& d : descriptors_) {
        json tools = json::array();
        for (ToolKind t : d.allowed_tools) tools.push_back(enum_name(t));
        agents.push_back({{"id", enum_name(d.id)}, {"instructions", d.instructions}, {"allowed_tools", tools}});
    }
    json flow = json::array();
    for (AgentId a : flow_) flow.push_back(enum_name(a));
    return {{"schema", kAgentsSchema}, {"flow", flow}, {"agents", agents}};
}

AgentId agent_for(Component component) {
    switch (component) {
        case Component::facial: return AgentId::facial;
        case Component::arm: return AgentId::arm;
        case Component::speech: return AgentId::speech;
        case Component::eye: return AgentId::eye_deviation;
        case Component::neglect: return AgentId::neglect;
    }
    return AgentId::main;
}

std::optional<Component> component_for(AgentId agent) {
    for (Component c : assessment::kComponents) {
        if (agent_for(c) == agent) return c;
    }
    return std::nullopt;
}

}  // namespace voice::agents
