#pragma once

#include <string>
#include <vector>

#include "dflow/diagnostics.hpp"

// Token stream for the dFlow grammar. Newlines are plain whitespace; logical
// declarations continue across physical lines until their brackets close.

namespace dflow {

enum class Tok {
    Ident,
    String,    // value with escapes resolved
    Int,
    Float,
    Prefixed,  // PE:GPE, TE:name, S:name, USER:CITY, SYSTEM:TIME (no spaces)
    Colon,
    Comma,
    Dot,
    Equals,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eof,
};

struct Token {
    Tok kind = Tok::Eof;
    std::string text;    // identifier, string value, or prefixed name
    std::string prefix;  // only for Tok::Prefixed
    long long int_value = 0;
    double float_value = 0.0;
    SourceSpan span;

    bool is_ident(const char* s) const { return kind == Tok::Ident && text == s; }
};

struct LexResult {
    std::vector<Token> tokens;  // always ends with Eof
    std::vector<Diagnostic> diagnostics;
};

// `source` must already be LF-normalized.
LexResult lex(const std::string& source, const std::string& file_label);

// CRLF -> LF. Applied before span computation everywhere.
std::string normalize_newlines(std::string source);

} // namespace dflow
