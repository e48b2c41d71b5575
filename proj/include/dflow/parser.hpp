#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dflow/diagnostics.hpp"
#include "dflow/model.hpp"

namespace dflow {

struct ParseResult {
    std::optional<Model> model;  // engaged iff no error diagnostics
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return model.has_value(); }
};

// Parses dFlow source text. Never throws on bad input: every failure is a
// Diagnostic with a span inside the source. On errors the parser skips to
// the end of the enclosing block (or the next declaration) and keeps going,
// so independent mistakes are all reported.
ParseResult parse(const std::string& source, const std::string& file_label = "<input>");

} // namespace dflow
