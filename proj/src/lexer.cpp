#include "lexer.hpp"

#include <cctype>
#include <stdexcept>

namespace dflow {

std::string normalize_newlines(std::string source) {
    std::string out;
    out.reserve(source.size());
    for (size_t i = 0; i < source.size(); ++i) {
        if (source[i] == '\r' && i + 1 < source.size() && source[i + 1] == '\n') continue;
        if (source[i] == '\r') {
            out.push_back('\n');
            continue;
        }
        out.push_back(source[i]);
    }
    return out;
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

bool is_prefix_word(const std::string& s) {
    return s == "PE" || s == "TE" || s == "S" || s == "USER" || s == "SYSTEM";
}

struct Lexer {
    const std::string& src;
    const std::string& file;
    size_t pos = 0;
    int line = 1;
    int col = 1;
    LexResult result;

    char peek(size_t ahead = 0) const {
        return pos + ahead < src.size() ? src[pos + ahead] : '\0';
    }

    char advance() {
        char c = src[pos++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }

    SourceSpan here() const { return {line, col, line, col, file}; }

    void error(const char* code, std::string msg, SourceSpan span) {
        result.diagnostics.push_back({code, Severity::Error, std::move(msg), span});
    }

    void push(Tok kind, Token t, int start_line, int start_col) {
        t.kind = kind;
        t.span = {start_line, start_col, line, col > 1 ? col - 1 : 1, file};
        result.tokens.push_back(std::move(t));
    }

    void run() {
        while (pos < src.size()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\n') {
                advance();
                continue;
            }
            if (c == '/' && peek(1) == '/') {
                while (pos < src.size() && peek() != '\n') advance();
                continue;
            }
            int sl = line, sc = col;
            if (ident_start(c)) {
                lex_word(sl, sc);
            } else if (digit(c) || ((c == '-' || c == '+') && digit(peek(1)))) {
                lex_number(sl, sc);
            } else if (c == '\'' || c == '"') {
                lex_string(sl, sc);
            } else {
                Tok kind;
                switch (c) {
                    case ':': kind = Tok::Colon; break;
                    case ',': kind = Tok::Comma; break;
                    case '.': kind = Tok::Dot; break;
                    case '=': kind = Tok::Equals; break;
                    case '(': kind = Tok::LParen; break;
                    case ')': kind = Tok::RParen; break;
                    case '[': kind = Tok::LBracket; break;
                    case ']': kind = Tok::RBracket; break;
                    default: {
                        SourceSpan span = here();
                        advance();
                        error("P001", std::string("unexpected character '") + c + "'", span);
                        continue;
                    }
                }
                Token t;
                t.text = c;
                advance();
                push(kind, std::move(t), sl, sc);
            }
        }
        Token eof;
        eof.span = {line, col, line, col, file};
        eof.kind = Tok::Eof;
        result.tokens.push_back(std::move(eof));
    }

    void lex_word(int sl, int sc) {
        std::string word;
        while (pos < src.size() && ident_char(peek())) word.push_back(advance());
        // PE:GPE / TE:name / S:name / USER:CITY / SYSTEM:TIME — only when the
        // colon is glued on both sides, so `verb: GET` stays three tokens.
        if (is_prefix_word(word) && peek() == ':' && ident_start(peek(1))) {
            advance();  // ':'
            std::string name;
            while (pos < src.size() && ident_char(peek())) name.push_back(advance());
            Token t;
            t.prefix = word;
            t.text = name;
            push(Tok::Prefixed, std::move(t), sl, sc);
            return;
        }
        Token t;
        t.text = word;
        push(Tok::Ident, std::move(t), sl, sc);
    }

    void lex_number(int sl, int sc) {
        std::string text;
        if (peek() == '-' || peek() == '+') text.push_back(advance());
        while (digit(peek())) text.push_back(advance());
        bool is_float = false;
        if (peek() == '.' && digit(peek(1))) {
            is_float = true;
            text.push_back(advance());
            while (digit(peek())) text.push_back(advance());
        }
        Token t;
        t.text = text;
        if (is_float) {
            try {
                t.float_value = std::stod(text);
            } catch (const std::out_of_range&) {
                error("P009", "float literal out of range: " + text, {sl, sc, line, col - 1, file});
                t.float_value = 0.0;
            }
            push(Tok::Float, std::move(t), sl, sc);
        } else {
            try {
                t.int_value = std::stoll(text);
            } catch (const std::out_of_range&) {
                error("P009", "integer literal out of range: " + text, {sl, sc, line, col - 1, file});
                t.int_value = 0;
            }
            push(Tok::Int, std::move(t), sl, sc);
        }
    }

    void lex_string(int sl, int sc) {
        char quote = advance();
        std::string value;
        while (pos < src.size()) {
            char c = peek();
            if (c == '\n') break;
            advance();
            if (c == quote) {
                Token t;
                t.text = std::move(value);
                push(Tok::String, std::move(t), sl, sc);
                return;
            }
            if (c == '\\' && (peek() == '\'' || peek() == '"' || peek() == '\\')) {
                value.push_back(advance());
            } else {
                value.push_back(c);
            }
        }
        error("P002", "unterminated string", {sl, sc, line, col > 1 ? col - 1 : 1, file});
    }
};

} // namespace

LexResult lex(const std::string& source, const std::string& file_label) {
    Lexer lx{source, file_label};
    lx.run();
    return std::move(lx.result);
}

} // namespace dflow
