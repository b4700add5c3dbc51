#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace sobo {

enum class TokenKind {
    Keyword,
    Identifier,
    Number,
    String,
    CharLit,
    Operator,
    Punct,
    Comment,
};

struct Token {
    TokenKind kind;
    std::string text; // exact slice of the (sanitized) source
    int line = 1;     // 1-based
    int col = 1;      // 1-based byte column
};

inline const std::unordered_set<std::string_view>& java_keywords() {
    static const std::unordered_set<std::string_view> kw = {
        "abstract", "assert",     "boolean",  "break",     "byte",   "case",    "catch",  "char",
        "class",    "const",      "continue", "default",   "do",     "double",  "else",   "enum",
        "extends",  "final",      "finally",  "float",     "for",    "goto",    "if",     "implements",
        "import",   "instanceof", "int",      "interface", "long",   "native",  "new",    "package",
        "private",  "protected",  "public",   "return",    "short",  "static",  "strictfp", "super",
        "switch",   "synchronized", "this",   "throw",     "throws", "transient", "try",  "void",
        "volatile", "while",      "true",     "false",     "null",
    };
    return kw;
}

// Replaces structurally invalid UTF-8 bytes with U+FFFD. Valid input passes
// through byte-identical, which the token round-trip property relies on.
inline std::string sanitize_utf8(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    size_t i = 0;
    while (i < in.size()) {
        unsigned char c = static_cast<unsigned char>(in[i]);
        size_t cont = 0;
        if (c < 0x80) {
            out += static_cast<char>(c);
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            cont = 1;
        } else if ((c & 0xF0) == 0xE0) {
            cont = 2;
        } else if ((c & 0xF8) == 0xF0) {
            cont = 3;
        } else {
            out += "\xEF\xBF\xBD";
            ++i;
            continue;
        }
        bool ok = i + cont < in.size();
        for (size_t k = 1; ok && k <= cont; ++k)
            ok = (static_cast<unsigned char>(in[i + k]) & 0xC0) == 0x80;
        if (ok) {
            out.append(in.substr(i, cont + 1));
            i += cont + 1;
        } else {
            out += "\xEF\xBF\xBD";
            ++i;
        }
    }
    return out;
}

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_hex_digit(char c) {
    return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}
inline bool is_ident_start(char c) {
    unsigned char uc = static_cast<unsigned char>(c);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || uc >= 0x80;
}
inline bool is_ident_part(char c) { return is_ident_start(c) || is_digit(c); }
inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

class Scanner {
public:
    explicit Scanner(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> tokens;
        while (!eof()) {
            if (is_space(peek())) {
                advance();
                continue;
            }
            tokens.push_back(next_token());
        }
        return tokens;
    }

private:
    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;

    bool eof() const { return pos_ >= src_.size(); }
    char peek(size_t off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

    void advance() {
        if (eof()) return;
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    Token make(TokenKind kind, size_t start, int line, int col) {
        return Token{kind, std::string(src_.substr(start, pos_ - start)), line, col};
    }

    Token next_token() {
        size_t start = pos_;
        int line = line_, col = col_;
        char c = peek();

        if (c == '/' && peek(1) == '/') {
            while (!eof() && peek() != '\n') advance();
            return make(TokenKind::Comment, start, line, col);
        }
        if (c == '/' && peek(1) == '*') {
            advance();
            advance();
            while (!eof() && !(peek() == '*' && peek(1) == '/')) advance();
            if (!eof()) {
                advance();
                advance();
            }
            return make(TokenKind::Comment, start, line, col);
        }
        if (c == '"') {
            if (peek(1) == '"' && peek(2) == '"') return text_block(start, line, col);
            advance();
            while (!eof() && peek() != '"' && peek() != '\n') {
                if (peek() == '\\' && pos_ + 1 < src_.size() && peek(1) != '\n') advance();
                advance();
            }
            if (!eof() && peek() == '"') advance();
            return make(TokenKind::String, start, line, col);
        }
        if (c == '\'') {
            advance();
            while (!eof() && peek() != '\'' && peek() != '\n') {
                if (peek() == '\\' && pos_ + 1 < src_.size() && peek(1) != '\n') advance();
                advance();
            }
            if (!eof() && peek() == '\'') advance();
            return make(TokenKind::CharLit, start, line, col);
        }
        if (is_digit(c) || (c == '.' && is_digit(peek(1)))) return number(start, line, col);
        if (is_ident_start(c)) {
            while (!eof() && is_ident_part(peek())) advance();
            std::string_view text = src_.substr(start, pos_ - start);
            TokenKind kind = java_keywords().count(text) ? TokenKind::Keyword : TokenKind::Identifier;
            return make(kind, start, line, col);
        }

        // longest-match operator scan
        static const std::array<std::string_view, 38> ops = {
            ">>>=", "<<=", ">>=", ">>>", "->",  "::", "++", "--", "<<", ">>", "<=", ">=", "==",
            "!=",   "&&",  "||",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "+",  "-",
            "*",    "/",   "%",   "=",   "<",   ">",  "!",  "&",  "|",  "^",  "~",  "?",
        };
        for (std::string_view op : ops) {
            if (src_.substr(pos_).substr(0, op.size()) == op) {
                for (size_t k = 0; k < op.size(); ++k) advance();
                return make(TokenKind::Operator, start, line, col);
            }
        }
        if (c == ':') {
            advance();
            return make(TokenKind::Operator, start, line, col);
        }
        if (c == '.' && peek(1) == '.' && peek(2) == '.') {
            advance();
            advance();
            advance();
            return make(TokenKind::Punct, start, line, col);
        }
        // any other byte, known bracket or not, is single-char punctuation
        advance();
        return make(TokenKind::Punct, start, line, col);
    }

    Token text_block(size_t start, int line, int col) {
        advance();
        advance();
        advance();
        while (!eof() && !(peek() == '"' && peek(1) == '"' && peek(2) == '"')) {
            if (peek() == '\\' && pos_ + 1 < src_.size()) advance();
            advance();
        }
        if (!eof()) {
            advance();
            advance();
            advance();
        }
        return make(TokenKind::String, start, line, col);
    }

    Token number(size_t start, int line, int col) {
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
            advance();
            advance();
            while (!eof() && (is_hex_digit(peek()) || peek() == '_')) advance();
            // hex float: optional fraction, then a binary exponent ("0x1.8p1")
            if (peek() == '.' && is_hex_digit(peek(1))) {
                advance();
                while (!eof() && (is_hex_digit(peek()) || peek() == '_')) advance();
            }
            if ((peek() == 'p' || peek() == 'P') &&
                (is_digit(peek(1)) ||
                 ((peek(1) == '+' || peek(1) == '-') && is_digit(peek(2))))) {
                advance();
                if (peek() == '+' || peek() == '-') advance();
                while (!eof() && is_digit(peek())) advance();
            }
        } else if (peek() == '0' && (peek(1) == 'b' || peek(1) == 'B')) {
            advance();
            advance();
            while (!eof() && (peek() == '0' || peek() == '1' || peek() == '_')) advance();
        } else {
            while (!eof() && (is_digit(peek()) || peek() == '_')) advance();
            // '.' joins the literal only when a digit follows ("1." stays two tokens)
            if (peek() == '.' && is_digit(peek(1))) {
                advance();
                while (!eof() && (is_digit(peek()) || peek() == '_')) advance();
            }
            if ((peek() == 'e' || peek() == 'E') &&
                (is_digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && is_digit(peek(2))))) {
                advance();
                if (peek() == '+' || peek() == '-') advance();
                while (!eof() && is_digit(peek())) advance();
            }
        }
        if (peek() == 'l' || peek() == 'L' || peek() == 'f' || peek() == 'F' || peek() == 'd' ||
            peek() == 'D') {
            advance();
        }
        return make(TokenKind::Number, start, line, col);
    }
};

} // namespace detail

// Full token stream including comments; unknown characters degrade to
// punctuation tokens, so this never fails.
inline std::vector<Token> tokenize(std::string_view source) {
    std::string clean = sanitize_utf8(source);
    return detail::Scanner(clean).run();
}

} // namespace sobo
