#include "mutants.hpp"

#include <stdexcept>

#include "dflow/parser.hpp"
#include "fixtures.hpp"

namespace dflow::testing {

namespace {

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
    size_t at = text.find(from);
    if (at == std::string::npos) throw std::runtime_error("mutation anchor not found: " + from);
    return text.replace(at, from.size(), to);
}

ValidationReport of_source(const std::string& source) {
    return validate(parse_source(source, "mutant"));
}

} // namespace

std::vector<RuleMutant> rule_mutants() {
    std::vector<RuleMutant> mutants;
    const std::string hello = read_fixture("hello_world.dflow");
    const std::string weather = read_fixture("weather_assistant.dflow");
    const std::string demo = read_fixture("demo_assistant.dflow");

    // V001: the same intent declared twice
    mutants.push_back({"V001", true,
                       of_source(replace_once(hello, "end\n\ndialogues",
                                              "    Intent greet\n        \"hello\",\n"
                                              "        \"hey\",\n        \"good morning\"\n"
                                              "    end\nend\n\ndialogues"))});

    // V002: dialogue on an undeclared trigger
    mutants.push_back({"V002", true, of_source(replace_once(hello, "on: greet", "on: greeet"))});

    // V003: a second dialogue on the same trigger
    mutants.push_back(
        {"V003", true,
         of_source(replace_once(hello, "            end\n    end\nend\n",
                                "            end\n    end\n\n    Dialogue dialogue_2\n"
                                "        on: greet\n        responses:\n"
                                "            ActionGroup resp2\n                Speak('Hi')\n"
                                "            end\n    end\nend\n"))});

    // V004: the eservice is renamed at its declaration only
    mutants.push_back({"V004", true,
                       of_source(replace_once(weather, "EServiceHTTP weather_svc",
                                              "EServiceHTTP weather_svc2"))});

    // V005: a speak action reads a slot that does not exist
    mutants.push_back({"V005", true,
                       of_source(replace_once(weather, "form1.city_slot ' is '",
                                              "form1.citty_slot ' is '"))});

    // V006: SetGSlot on an undeclared gslot
    mutants.push_back(
        {"V006", true,
         of_source(replace_once(hello, "Speak('Hello friend')",
                                "Speak('Hello friend')\n                SetGSlot(counter, 1)"))});

    // V007: a slot expression reads a slot filled later in the same form
    mutants.push_back(
        {"V007", true,
         of_source(replace_once(demo, "query=[place=USER:CITY], header=[access_token=\"TOKEN\"],)[lan]",
                                "query=[place=form1.pharmacy_slot], "
                                "header=[access_token=\"TOKEN\"],)[lan]"))});

    // V008: FromIntent naming an undeclared intent
    mutants.push_back({"V008", true,
                       of_source(replace_once(weather, "HRI('For which city?', [PE:GPE])",
                                              "HRI('For which city?', [confirm='yes'])"))});

    // V009: default literal does not match the gslot type
    mutants.push_back({"V009", true, of_source("gslots\n    counter: int = 'nope'\nend\n")});

    // V010: intent with no examples (only constructible programmatically)
    {
        Model m;
        IntentTrigger hollow;
        hollow.name = "hollow";
        m.triggers.push_back(Trigger{std::move(hollow)});
        mutants.push_back({"V010", true, validate(m)});
    }

    // V011: a trigger no dialogue uses (warning)
    mutants.push_back({"V011", false,
                       of_source(replace_once(hello, "end\n\ndialogues",
                                              "    Intent lonely\n        \"unused\"\n    end\n"
                                              "end\n\ndialogues"))});

    // V012: the same example twice in one intent (warning)
    mutants.push_back({"V012", false, of_source(replace_once(hello, "\"hey\",", "\"hello\","))});

    // V013: two intents sharing one example
    mutants.push_back({"V013", true,
                       of_source(replace_once(hello, "end\n\ndialogues",
                                              "    Intent copycat\n        \"hello\"\n    end\n"
                                              "end\n\ndialogues"))});

    return mutants;
}

} // namespace dflow::testing
