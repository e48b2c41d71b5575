#include <doctest.h>

#include "dflow/merger.hpp"
#include "dflow/parser.hpp"
#include "dflow/printer.hpp"
#include "dflow/validator.hpp"
#include "support/fixtures.hpp"

using namespace dflow;
using namespace dflow::testing;

namespace {

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
    size_t at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
}

} // namespace

TEST_CASE("merging a single model is the identity") {
    Model m = parse_fixture("hello_world.dflow");
    MergeResult r = merge({m});
    REQUIRE(r.ok());
    CHECK(model_equals(*r.model, m));
}

TEST_CASE("merging a model with itself deduplicates fully") {
    Model m = parse_fixture("weather_assistant.dflow");
    MergeResult r = merge({m, m});
    REQUIRE(r.ok());
    CHECK(model_equals(*r.model, m));
}

TEST_CASE("merging the empty list yields the empty model") {
    MergeResult r = merge({});
    REQUIRE(r.ok());
    CHECK(r.model->empty());
}

TEST_CASE("demo plus weather: four intents, four eservices, four dialogues") {
    Model demo = parse_fixture("demo_assistant.dflow");
    Model weather = parse_fixture("weather_assistant.dflow");
    MergeResult r = merge({demo, weather});
    REQUIRE(r.ok());
    CHECK_EQ(r.model->triggers.size(), 4);
    CHECK_EQ(r.model->eservices.size(), 4);
    CHECK_EQ(r.model->dialogues.size(), 4);
    CHECK(validate(*r.model).valid);
}

TEST_CASE("merge output keeps the first input's elements first") {
    Model demo = parse_fixture("demo_assistant.dflow");
    Model weather = parse_fixture("weather_assistant.dflow");
    MergeResult r = merge({demo, weather});
    REQUIRE(r.ok());
    CHECK_EQ(r.model->triggers[0].name(), "greet");
    CHECK_EQ(r.model->triggers[3].name(), "ask_weather");
    CHECK_EQ(r.model->dialogues[0].name, "greet_dialogue");
    CHECK_EQ(r.model->dialogues[3].name, "weather_dialogue");
}

TEST_CASE("merge is associative on a three-model success fixture") {
    Model a = parse_fixture("hello_world.dflow");
    Model b = parse_fixture("weather_assistant.dflow");
    Model c = parse_fixture("workshop/user_profile.dflow");

    MergeResult left = merge({a, b});
    REQUIRE(left.ok());
    MergeResult nested = merge({*left.model, c});
    MergeResult flat = merge({a, b, c});
    REQUIRE(nested.ok());
    REQUIRE(flat.ok());
    CHECK(model_equals(*nested.model, *flat.model));
}

TEST_CASE("same name with a different body is a conflict") {
    Model a = parse_fixture("hello_world.dflow");
    std::string mutated = replace_once(read_fixture("hello_world.dflow"), "\"hey\",", "\"heya\",");
    Model b = parse_source(mutated);
    MergeResult r = merge({a, b});
    CHECK_FALSE(r.ok());
    REQUIRE_EQ(r.diagnostics.size(), 1);
    CHECK_EQ(r.diagnostics[0].code, "M001");
    CHECK(r.diagnostics[0].message.find("greet") != std::string::npos);
}

TEST_CASE("all conflicts are reported, not just the first") {
    std::string two =
        "triggers\n    Intent a\n        \"one\"\n    end\n"
        "    Intent b\n        \"two\"\n    end\nend\n";
    std::string other =
        "triggers\n    Intent a\n        \"uno\"\n    end\n"
        "    Intent b\n        \"dos\"\n    end\nend\n";
    MergeResult r = merge({parse_source(two), parse_source(other)});
    CHECK_FALSE(r.ok());
    CHECK_EQ(r.diagnostics.size(), 2);
}

TEST_CASE("two dialogues on one trigger conflict at merge time via V003") {
    // both inputs declare the same trigger identically, each with its own
    // dialogue; only the combined model breaks the one-dialogue rule
    std::string first =
        "triggers\n    Intent go\n        \"go\"\n    end\nend\n"
        "dialogues\n    Dialogue d1\n        on: go\n        responses:\n"
        "            ActionGroup g1\n                Speak('one')\n            end\n    end\nend\n";
    std::string second =
        "triggers\n    Intent go\n        \"go\"\n    end\nend\n"
        "dialogues\n    Dialogue d2\n        on: go\n        responses:\n"
        "            ActionGroup g2\n                Speak('two')\n            end\n    end\nend\n";
    Model a = parse_source(first);
    Model b = parse_source(second);
    REQUIRE(validate(a).valid);
    REQUIRE(validate(b).valid);
    MergeResult r = merge({a, b});
    CHECK_FALSE(r.ok());
    REQUIRE_FALSE(r.diagnostics.empty());
    CHECK_EQ(r.diagnostics[0].code, "V003");
}

TEST_CASE("merged output validates and round-trips through the printer") {
    MergeResult r = merge({parse_fixture("demo_assistant.dflow"),
                           parse_fixture("weather_assistant.dflow")});
    REQUIRE(r.ok());
    std::string printed = print(*r.model);
    ParseResult again = parse(printed, "merged");
    REQUIRE(again.ok());
    CHECK(model_equals(*again.model, *r.model));
    CHECK(validate(*again.model).valid);
}
