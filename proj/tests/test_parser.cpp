#include <doctest.h>

#include <algorithm>

#include "dflow/parser.hpp"
#include "dflow/printer.hpp"
#include "support/fixtures.hpp"

using namespace dflow;
using namespace dflow::testing;

namespace {

bool has_code(const std::vector<Diagnostic>& diags, const std::string& code) {
    return std::any_of(diags.begin(), diags.end(),
                       [&](const Diagnostic& d) { return d.code == code; });
}

} // namespace

TEST_CASE("the one-dialogue greeting model parses to the expected shape") {
    Model m = parse_fixture("hello_world.dflow");
    REQUIRE_EQ(m.triggers.size(), 1);
    const auto& intent = std::get<IntentTrigger>(m.triggers[0].node);
    CHECK_EQ(intent.name, "greet");
    REQUIRE_EQ(intent.examples.size(), 3);
    CHECK_EQ(std::get<TextChunk>(intent.examples[0].chunks[0].node).text, "hello");
    REQUIRE_EQ(m.dialogues.size(), 1);
    const auto& d = m.dialogues[0];
    CHECK_EQ(d.name, "dialogue_1");
    CHECK_EQ(d.on, std::vector<std::string>{"greet"});
    REQUIRE_EQ(d.responses.size(), 1);
    const auto& group = std::get<ActionGroup>(d.responses[0].node);
    CHECK_EQ(group.name, "resp");
    REQUIRE_EQ(group.actions.size(), 1);
    const auto& speak = std::get<SpeakAction>(group.actions[0].node);
    REQUIRE_EQ(speak.text.parts.size(), 1);
    CHECK_EQ(std::get<std::string>(speak.text.parts[0].node), "Hello friend");
}

TEST_CASE("the empty document is the empty model") {
    ParseResult r = parse("");
    REQUIRE(r.ok());
    CHECK(r.model->empty());
}

TEST_CASE("the weather model parses with entity chunks and a mixed form") {
    Model m = parse_fixture("weather_assistant.dflow");
    const auto& intent = std::get<IntentTrigger>(m.triggers[0].node);
    CHECK_EQ(intent.name, "ask_weather");
    REQUIRE_EQ(intent.examples.size(), 5);
    const auto& mixed = intent.examples[4];  // text PE:DATE text PE:GPE
    REQUIRE_EQ(mixed.chunks.size(), 4);
    CHECK(std::holds_alternative<TextChunk>(mixed.chunks[0].node));
    CHECK_EQ(std::get<PretrainedEntityChunk>(mixed.chunks[1].node).ref.category,
             EntityCategory::DATE);
    CHECK(std::holds_alternative<TextChunk>(mixed.chunks[2].node));
    const auto& gpe = std::get<PretrainedEntityChunk>(mixed.chunks[3].node).ref;
    CHECK_EQ(gpe.category, EntityCategory::GPE);
    CHECK_EQ(gpe.sample_values, std::vector<std::string>{"Thessaloniki", "Athens"});

    REQUIRE_EQ(m.eservices.size(), 1);
    CHECK_EQ(m.eservices[0].name, "weather_svc");
    CHECK_EQ(m.eservices[0].verb, HttpVerb::Get);

    const auto& form = std::get<Form>(m.dialogues[0].responses[0].node);
    REQUIRE_EQ(form.slots.size(), 2);
    CHECK(std::holds_alternative<HRISource>(form.slots[0].source));
    const auto& svc_slot = std::get<EServiceSource>(form.slots[1].source);
    CHECK_EQ(svc_slot.call.service, "weather_svc");
    CHECK_EQ(svc_slot.call.response_path, std::vector<std::string>{"description"});
    // bare TOKEN resolves to a string literal: no gslot of that name exists
    REQUIRE_EQ(svc_slot.call.header_params.size(), 1);
    const auto& token = std::get<Literal>(svc_slot.call.header_params[0].value.node);
    CHECK_EQ(std::get<std::string>(token), "TOKEN");
}

TEST_CASE("bare identifiers resolve to gslot references when declared") {
    Model m = parse_source(
        "gslots\n    language: str = 'English'\nend\n"
        "triggers\n    Intent go\n        \"go\"\n    end\nend\n"
        "dialogues\n    Dialogue d\n        on: go\n        responses:\n"
        "            ActionGroup g\n                FireEvent('u', language)\n            end\n"
        "    end\nend\n");
    const auto& group = std::get<ActionGroup>(m.dialogues[0].responses[0].node);
    const auto& fire = std::get<FireEventAction>(group.actions[0].node);
    CHECK(std::holds_alternative<GSlotRef>(fire.message.node));
}

TEST_CASE("an intent without examples is rejected") {
    ParseResult r = parse("triggers\n Intent x\n end\nend");
    CHECK_FALSE(r.ok());
    CHECK(has_code(r.diagnostics, "P008"));
}

TEST_CASE("error catalog") {
    SUBCASE("unterminated string") {
        ParseResult r = parse("triggers\n Intent x\n \"oops\n end\nend");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P002"));
    }
    SUBCASE("unknown top-level block") {
        ParseResult r = parse("wibble\n stuff\nend");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P003"));
    }
    SUBCASE("unknown keyword inside a block") {
        ParseResult r = parse("triggers\n Wibble x\n end\nend");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P004"));
    }
    SUBCASE("malformed entity reference") {
        ParseResult r = parse("triggers\n Intent x\n \"go to\" PE:BOGUS\n end\nend");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P005"));
    }
    SUBCASE("missing end") {
        ParseResult r = parse("triggers\n Intent x\n \"hi\"");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P006"));
    }
    SUBCASE("unknown trainable entity reference") {
        ParseResult r = parse("triggers\n Intent x\n \"find\" TE:nope\n end\nend");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P007"));
    }
    SUBCASE("unknown synonym reference") {
        ParseResult r = parse("triggers\n Intent x\n \"find\" S:nope\n end\nend");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P007"));
    }
    SUBCASE("bad literal") {
        ParseResult r = parse("eservices\n EServiceHTTP s\n verb: FETCH\n host: 'h'\n path: '/'\n end\nend");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P009"));
    }
    SUBCASE("numeric literals beyond the representable range") {
        ParseResult ints = parse("gslots\n    g: int = 99999999999999999999999\nend");
        CHECK_FALSE(ints.ok());
        CHECK(has_code(ints.diagnostics, "P009"));
        std::string huge(400, '9');
        ParseResult floats = parse("gslots\n    g: float = " + huge + ".5\nend");
        CHECK_FALSE(floats.ok());
        CHECK(has_code(floats.diagnostics, "P009"));
    }
    SUBCASE("port out of range") {
        ParseResult r =
            parse("eservices\n EServiceHTTP s\n verb: GET\n host: 'h'\n port: 70000\n path: '/'\n end\nend");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P009"));
    }
    SUBCASE("empty strings in NLU lists") {
        ParseResult r = parse("entities\n Entity fruit\n \"apple\",\n \"  \"\n end\nend");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P008"));
    }
    SUBCASE("duplicate synonym words") {
        ParseResult r = parse("synonyms\n Synonym city\n \"town\",\n \"town\"\n end\nend");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P010"));
    }
    SUBCASE("duplicate property") {
        ParseResult r =
            parse("eservices\n EServiceHTTP s\n verb: GET\n verb: GET\n host: 'h'\n path: '/'\n end\nend");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P010"));
    }
}

TEST_CASE("independent errors in separate blocks are all reported") {
    ParseResult r = parse(
        "triggers\n    Intent a\n    end\nend\n"          // empty examples
        "eservices\n    EServiceHTTP s\n        verb: FETCH\n        host: 'h'\n"
        "        path: '/'\n    end\nend\n");
    CHECK_FALSE(r.ok());
    CHECK(has_code(r.diagnostics, "P008"));
    CHECK(has_code(r.diagnostics, "P009"));
}

TEST_CASE("recovery continues after a broken declaration in the same block") {
    ParseResult r = parse(
        "triggers\n"
        "    Intent ok1\n        \"fine\"\n    end\n"
        "    Wibble broken\n"
        "    Intent ok2\n        \"also fine\"\n    end\n"
        "end");
    CHECK_FALSE(r.ok());
    CHECK(has_code(r.diagnostics, "P004"));
}

TEST_CASE("every diagnostic span lies inside the input") {
    const std::string source = "triggers\n Intent x\n \"oops\n end\nend\njunk junk";
    ParseResult r = parse(source);
    int lines = 1;
    for (char c : source)
        if (c == '\n') ++lines;
    for (const auto& d : r.diagnostics) {
        CHECK_GE(d.span.start_line, 1);
        CHECK_LE(d.span.start_line, lines);
        CHECK_LE(d.span.end_line, lines);
        CHECK_GE(d.span.start_col, 1);
    }
}

TEST_CASE("CRLF input parses like LF input") {
    std::string lf = read_fixture("hello_world.dflow");
    std::string crlf;
    for (char c : lf) {
        if (c == '\n') crlf += '\r';
        crlf += c;
    }
    ParseResult a = parse(lf);
    ParseResult b = parse(crlf);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(model_equals(*a.model, *b.model));
}

TEST_CASE("comments are ignored by the grammar") {
    Model m = parse_source(
        "// a greeting assistant\n"
        "triggers // trigger block\n"
        "    Intent greet\n"
        "        \"hello\" // not part of the string\n"
        "    end\nend\n");
    CHECK_EQ(std::get<IntentTrigger>(m.triggers[0].node).examples.size(), 1);
}

TEST_CASE("string escapes cover quotes and backslashes") {
    Model m = parse_source(
        "triggers\n    Intent q\n        \"it's a \\\"test\\\" with \\\\ inside\"\n    end\nend\n");
    const auto& text = std::get<TextChunk>(
        std::get<IntentTrigger>(m.triggers[0].node).examples[0].chunks[0].node);
    CHECK_EQ(text.text, "it's a \"test\" with \\ inside");
}

TEST_CASE("line_count") {
    CHECK_EQ(line_count(""), 0);
    CHECK_EQ(line_count("\n\n  \n"), 0);
    CHECK_EQ(line_count("a\n\nb"), 2);
    CHECK_EQ(line_count("// only a comment\n"), 0);
    CHECK_EQ(line_count("path: 'http://x' // trailing\n"), 1);  // '//' inside a string stays
    CHECK_EQ(line_count(read_fixture("hello_world.dflow")), 16);
    CHECK_EQ(line_count(read_fixture("demo_assistant.dflow")), 72);
    // hand count of the weather listing: 9 trigger lines, 7 eservice lines,
    // 14 dialogue lines
    CHECK_EQ(line_count(read_fixture("weather_assistant.dflow")), 30);
}

TEST_CASE("structural breakage deep in a dialogue is reported, not fatal") {
    SUBCASE("missing end inside a form") {
        ParseResult r = parse(
            "triggers\n    Intent a\n        \"x\"\n    end\nend\n"
            "dialogues\n    Dialogue d\n        on: a\n        responses:\n"
            "            Form f\n                s: str = HRI('q')\n");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P006"));
    }
    SUBCASE("event without a uri") {
        ParseResult r = parse("triggers\n    Event e\n    end\nend");
        CHECK_FALSE(r.ok());
    }
    SUBCASE("form slot with a bare literal source") {
        ParseResult r = parse(
            "dialogues\n    Dialogue d\n        on: a\n        responses:\n"
            "            Form f\n                s: str = 42\n            end\n    end\nend");
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, "P001"));
    }
    SUBCASE("unterminated sample list") {
        ParseResult r = parse("triggers\n    Intent a\n        \"go\" PE:GPE['x'\n    end\nend");
        CHECK_FALSE(r.ok());
    }
}

TEST_CASE("a dialogue may have several triggers") {
    Model m = parse_source(
        "triggers\n    Intent a\n        \"aa\"\n    end\n"
        "    Intent b\n        \"bb\"\n    end\nend\n"
        "dialogues\n    Dialogue d\n        on: a, b\n        responses:\n"
        "            ActionGroup g\n                Speak('hi')\n            end\n    end\nend\n");
    CHECK_EQ(m.dialogues[0].on, std::vector<std::string>{"a", "b"});
}

TEST_CASE("trailing commas are accepted wherever lists appear") {
    Model m = parse_source(
        "triggers\n    Intent a\n        \"x\",\n    end\nend\n"
        "dialogues\n    Dialogue d\n        on: a,\n        responses:\n"
        "            Form f\n                s: str = HRI('q'),\n            end,\n"
        "    end\nend\n");
    CHECK_EQ(m.dialogues[0].on.size(), 1);
}
