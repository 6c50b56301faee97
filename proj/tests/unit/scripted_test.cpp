#include "voice/scripted/scripted_backend.hpp"

#include <gtest/gtest.h>

using namespace voice;
using namespace voice::scripted;
using assessment::Component;

namespace {

const std::filesystem::path kSourceDir = VOICE_SOURCE_DIR;

const agents::AgentTable& table() {
    static const agents::AgentTable t = agents::AgentTable::defaults();
    return t;
}

const ConversationScript& table1() {
    static const ConversationScript s = load_script(kSourceDir / "scripts/table1.json", table());
    return s;
}

ordered_json minimal_doc() {
    return {{"schema", "voice-script/1"},
            {"script_id", "mini"},
            {"steps",
             {{{"agent", "main"}, {"trigger", "enter"}, {"say", "Age and sex?"}},
              {{"agent", "main"},
               {"match", {"years"}},
               {"say", "Thanks."},
               {"tools", {{{"update", "demographics.age"}, {"value", 70}}}}}}}};
}

// Every tool call in the script touching `prefix`.
int writes_to(const ConversationScript& s, std::string_view prefix) {
    int n = 0;
    for (const auto& step : s.steps) {
        for (const auto& call : step.tool_calls) {
            if (call.kind == agents::ToolKind::update_assessment_state &&
                call.arguments["field"].get<std::string>().starts_with(prefix)) {
                ++n;
            }
        }
    }
    return n;
}

std::vector<std::string> texts(const agents::BackendEvents& events) {
    std::vector<std::string> out;
    for (const auto& e : events) {
        if (const auto* t = std::get_if<agents::AssistantText>(&e)) out.push_back(t->text);
        if (const auto* c = std::get_if<agents::ToolCall>(&e)) out.push_back(c->to_json().dump());
        if (const auto* u = std::get_if<agents::UserTranscript>(&e)) out.push_back("heard:" + u->text);
    }
    return out;
}

}  // namespace

TEST(Script, NormalizesText) {
    EXPECT_EQ(normalize_text("  He's   72,\tMALE "), "he's 72, male");
    EXPECT_TRUE(keywords_match({"72", "male"}, "he's 72, male"));
    EXPECT_FALSE(keywords_match({"72", "female"}, "he's 72, male"));
}

TEST(Script, Table1LoadsAndValidates) {
    EXPECT_EQ(table1().script_id, "table1");
    EXPECT_NO_THROW(validate_script(table1(), table()));
    EXPECT_TRUE(table1().faults.empty());
}

TEST(Script, JsonRoundTrips) {
    EXPECT_EQ(parse_script(script_to_json(table1()), table()), table1());
}

TEST(Script, RejectsInvalidDocuments) {
    auto bad_schema = minimal_doc();
    bad_schema["schema"] = "voice-script/0";
    EXPECT_THROW(parse_script(bad_schema, table()), ScriptError);

    auto no_keywords = minimal_doc();
    no_keywords["steps"][1].erase("match");
    EXPECT_THROW(parse_script(no_keywords, table()), ScriptError);

    auto forbidden = minimal_doc();
    forbidden["steps"][1]["tools"] = {{{"call", "run_final_analysis"}}};
    EXPECT_THROW(parse_script(forbidden, table()), ScriptError);

    auto out_of_order = minimal_doc();
    out_of_order["steps"][1]["agent"] = "neglect";
    out_of_order["steps"].push_back({{"agent", "facial"}, {"trigger", "enter"}, {"say", "Smile."}});
    EXPECT_THROW(parse_script(out_of_order, table()), ScriptError);

    EXPECT_NO_THROW(parse_script(minimal_doc(), table()));
}

TEST(FaultSpec, JsonRoundTrips) {
    for (const FaultSpec& f : {FaultSpec::skip(Component::neglect), FaultSpec::misscore(Component::speech, 2),
                               FaultSpec::hallucinate("ancillary.anticoagulants", {"Xarelto"}), FaultSpec::garble(4)}) {
        EXPECT_EQ(FaultSpec::from_json(f.to_json()), f) << f.describe();
    }
    EXPECT_THROW(FaultSpec::from_json({{"kind", "explode"}}), ScriptError);
}

TEST(InjectFault, SkipRemovesComponentWrites) {
    const ConversationScript faulty = inject_fault(table1(), FaultSpec::skip(Component::neglect), table());
    EXPECT_GT(writes_to(table1(), "findings.neglect"), 0);
    EXPECT_EQ(writes_to(faulty, "findings.neglect"), 0);
    EXPECT_EQ(writes_to(faulty, "scores.neglect"), 0);
    EXPECT_NO_THROW(validate_script(faulty, table()));
    ASSERT_EQ(faulty.faults.size(), 1u);
    EXPECT_GT(writes_to(table1(), "findings.neglect"), 0) << "source script is unchanged";
}

TEST(InjectFault, OtherKindsValidate) {
    for (const FaultSpec& f : {FaultSpec::misscore(Component::speech, 2),
                               FaultSpec::hallucinate("ancillary.anticoagulants", {"Xarelto"}), FaultSpec::garble(3)}) {
        const ConversationScript faulty = inject_fault(table1(), f, table());
        EXPECT_NO_THROW(validate_script(faulty, table())) << f.describe();
        EXPECT_NE(faulty, table1()) << f.describe();
    }
}

TEST(InjectFault, RejectsInapplicableFaults) {
    EXPECT_THROW(inject_fault(table1(), FaultSpec::misscore(Component::facial, 2), table()), ScriptError);
    EXPECT_THROW(inject_fault(table1(), FaultSpec::hallucinate("demographics.height", 180), table()), ScriptError);
    EXPECT_THROW(inject_fault(table1(), FaultSpec::garble(999), table()), ScriptError);
    const ConversationScript skipped = inject_fault(table1(), FaultSpec::skip(Component::eye), table());
    EXPECT_THROW(inject_fault(skipped, FaultSpec::skip(Component::eye), table()), ScriptError);
}

TEST(ScriptedBackend, RepromptsOnMismatchWithoutAdvancing) {
    ScriptedBackend b(parse_script(minimal_doc(), table()));
    agents::InstructionBundle bundle;
    EXPECT_EQ(texts(b.begin(bundle)), std::vector<std::string>{"Age and sex?"});
    const auto miss = texts(b.user_turn({"hello?", {}}));
    ASSERT_EQ(miss.size(), 2u);
    EXPECT_EQ(miss[0], "heard:hello?");
    EXPECT_EQ(miss[1], std::string(kRepromptPrefix) + "Age and sex?");
    EXPECT_EQ(b.cursor(), 1u);
    EXPECT_EQ(b.reprompts(), 1);
    const auto hit = texts(b.user_turn({"Seventy YEARS", {}}));
    EXPECT_EQ(hit.size(), 3u);
    EXPECT_TRUE(b.exhausted());
    EXPECT_THROW(b.user_turn({"more", {}}), ScriptUnderrun);
}

TEST(ScriptedBackend, GarbledTurnIsUnintelligible) {
    auto script = parse_script(minimal_doc(), table());
    script = inject_fault(script, FaultSpec::garble(0), table());
    ScriptedBackend b(script);
    b.begin({});
    const auto out = texts(b.user_turn({"70 years", {}}));
    EXPECT_EQ(out[0], "heard:" + std::string(kUnintelligible));
    EXPECT_EQ(b.reprompts(), 1);
    EXPECT_EQ(texts(b.user_turn({"70 years", {}})).size(), 3u);
}

TEST(ScriptedBackend, DeterministicForEqualInputs) {
    const std::vector<std::string> inputs{"He's 72, male", "nonsense", "yesterday 9 p.m.", "?"};
    auto play = [&] {
        ScriptedBackend b(table1());
        std::vector<std::string> log = texts(b.begin({}));
        for (const auto& in : inputs) {
            for (auto& t : texts(b.user_turn({in, {}}))) log.push_back(std::move(t));
        }
        return log;
    };
    EXPECT_EQ(play(), play());
}
