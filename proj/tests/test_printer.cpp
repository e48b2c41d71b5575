#include <doctest.h>

#include "dflow/parser.hpp"
#include "dflow/printer.hpp"
#include "support/fixtures.hpp"
#include "support/model_gen.hpp"

using namespace dflow;
using namespace dflow::testing;

TEST_CASE("canonical form of the greeting model is 16 non-blank lines") {
    Model m = parse_fixture("hello_world.dflow");
    CHECK_EQ(line_count(print(m)), 16);
}

TEST_CASE("the empty model prints as the empty string") {
    CHECK_EQ(print(Model{}), "");
}

TEST_CASE("canonical form of the concatenated demo model stays near 72 lines") {
    Model m = parse_fixture("demo_assistant.dflow");
    int lines = line_count(print(m));
    CHECK_GE(lines, 67);
    CHECK_LE(lines, 77);
}

TEST_CASE("round-trip and idempotence over the sample models") {
    for (const char* name :
         {"hello_world.dflow", "demo_triggers.dflow", "demo_eservices.dflow",
          "demo_dialogues.dflow", "demo_assistant.dflow", "weather_assistant.dflow",
          "workshop/hello_world.dflow", "workshop/user_profile.dflow",
          "workshop/weather.dflow"}) {
        CAPTURE(name);
        Model m = parse_fixture(name);
        std::string printed = print(m);
        ParseResult again = parse(printed, "printed");
        REQUIRE(again.ok());
        CHECK(model_equals(*again.model, m));
        CHECK_EQ(print(*again.model), printed);
        CHECK(!printed.empty());
        CHECK_EQ(printed.back(), '\n');
    }
}

TEST_CASE("round-trip holds over randomly generated models") {
    for (uint64_t seed = 1; seed <= 50; ++seed) {
        CAPTURE(seed);
        Model m = random_valid_model(seed);
        std::string printed = print(m);
        ParseResult again = parse(printed, "generated");
        REQUIRE_MESSAGE(again.ok(), printed);
        CHECK(model_equals(*again.model, m));
        CHECK_EQ(print(*again.model), printed);
    }
}

TEST_CASE("canonical quoting: double quotes for NLU examples, single elsewhere") {
    Model m = parse_fixture("hello_world.dflow");
    std::string printed = print(m);
    CHECK(printed.find("\"hello\",") != std::string::npos);
    CHECK(printed.find("Speak('Hello friend')") != std::string::npos);

    Model weather = parse_fixture("weather_assistant.dflow");
    std::string wprinted = print(weather);
    // literal param values canonicalize to single quotes
    CHECK(wprinted.find("language='English'") != std::string::npos);
    CHECK(wprinted.find("PE:GPE['Thessaloniki', 'Athens']") != std::string::npos);
}

TEST_CASE("printing normalizes physical line wrapping to one declaration per line") {
    Model m = parse_fixture("demo_dialogues.dflow");
    std::string printed = print(m);
    // the wrapped pharmacy_slot declaration collapses onto one line
    CHECK(printed.find("pharmacy_slot: str = pharmacy_svc(query=[latitude=form1.lan, "
                       "longtitude=form1.lon], header=[access_token='TOKEN'])[data.address]") !=
          std::string::npos);
}
