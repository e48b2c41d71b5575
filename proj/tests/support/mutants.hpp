#pragma once

#include <string>
#include <vector>

#include "dflow/validator.hpp"

// One mutant fixture per validator rule code, each derived from a sample
// model (or built programmatically where the parser would refuse the
// source). Used by the acceptance suite's mutation criterion.

namespace dflow::testing {

struct RuleMutant {
    std::string code;       // the rule the mutant must trip
    bool expect_error;      // false for warning-severity rules
    ValidationReport report;
};

std::vector<RuleMutant> rule_mutants();

} // namespace dflow::testing
