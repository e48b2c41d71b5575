#pragma once

#include <string>
#include <vector>

namespace dflow {

// Half-open in spirit but stored inclusive, 1-based, as editors count.
struct SourceSpan {
    int start_line = 1;
    int start_col = 1;
    int end_line = 1;
    int end_col = 1;
    std::string file = "<memory>";
};

enum class Severity { Error, Warning };

// Stable diagnostic codes:
//   P001 unexpected token            P002 unterminated string
//   P003 unknown top-level block     P004 unknown keyword in block
//   P005 malformed entity reference  P006 missing 'end'
//   P007 unknown entity/synonym ref  P008 empty list where one is required
//   P009 malformed literal           P010 duplicate property
//   V001..V013 semantic rules (see validator.hpp)
//   M001 merge name conflict
struct Diagnostic {
    std::string code;
    Severity severity = Severity::Error;
    std::string message;
    SourceSpan span;
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.severity == Severity::Error) return true;
    return false;
}

std::string severity_name(Severity s);

// "file:line:col: severity CODE: message"
std::string format_diagnostic(const Diagnostic& d);

// Sort key used everywhere diagnostics surface: source order, then code.
void sort_diagnostics(std::vector<Diagnostic>& diags);

} // namespace dflow
