#pragma once

#include <string>
#include <vector>

#include "dflow/diagnostics.hpp"
#include "dflow/model.hpp"

namespace dflow {

// Rule catalog:
//   V001  duplicate name within a concept list
//   V002  dialogue `on:` references an undeclared trigger
//   V003  trigger referenced by more than one dialogue
//   V004  service call references an undeclared eservice
//   V005  form slot reference to an undeclared form or slot
//   V006  gslot reference to an undeclared gslot
//   V007  forward form-slot read (error inside the same dialogue,
//         warning across dialogues)
//   V008  FromIntent maps an undeclared intent
//   V009  literal/slot type mismatch
//   V010  intent with zero phrase examples
//   V011  trigger used by no dialogue (warning)
//   V012  duplicate phrase example within one intent (warning)
//   V013  identical phrase example shared by two intents
struct ValidationReport {
    std::vector<Diagnostic> diagnostics;
    bool valid = true;  // true iff no diagnostic has severity error
};

// Checks every rule and reports all violations in source order.
ValidationReport validate(const Model& model);

// Parse + validate in one step; parse failures are reported inside the same
// report with their parser codes. This is the body of /model/validation.
ValidationReport check_source(const std::string& source,
                              const std::string& file_label = "<input>");

// {"valid": bool, "diagnostics": [{"code","severity","message","span":{...}}]}
std::string report_to_json(const ValidationReport& report, int pretty_indent = -1);

} // namespace dflow
