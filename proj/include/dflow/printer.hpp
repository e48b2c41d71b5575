#pragma once

#include <string>

#include "dflow/model.hpp"

namespace dflow {

// Canonical dFlow text: 4-space indentation, one declaration per line,
// blocks closed with `end`, double quotes for NLU example strings, single
// quotes everywhere else, LF line endings, trailing newline. Printing the
// empty model yields the empty string.
std::string print(const Model& model);

// Non-blank lines after stripping // comments and trimming whitespace.
int line_count(const std::string& source);

} // namespace dflow
