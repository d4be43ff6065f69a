#include "abmc/sexpr.hpp"

#include <cctype>

namespace abmc {

namespace {

class Reader {
public:
    explicit Reader(std::string_view s) : s_(s) {}

    std::vector<SExpr> all() {
        std::vector<SExpr> out;
        for (skip(); pos_ < s_.size(); skip()) out.push_back(expr());
        return out;
    }

private:
    void advance() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip() {
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (c == ';') {
                while (pos_ < s_.size() && s_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    SExpr expr() {
        SExpr e;
        e.line = line_;
        e.column = col_;
        char c = s_[pos_];
        if (c == ')') throw ParseError("unexpected ')'", line_, col_);
        if (c == '(') {
            advance();
            e.kind = SExpr::Kind::List;
            for (;;) {
                skip();
                if (pos_ >= s_.size()) throw ParseError("unbalanced '(' (missing ')')", e.line, e.column);
                if (s_[pos_] == ')') {
                    advance();
                    return e;
                }
                e.items.push_back(expr());
            }
        }
        if (c == '"') {
            advance();
            e.kind = SExpr::Kind::String;
            for (;;) {
                if (pos_ >= s_.size()) throw ParseError("unterminated string", e.line, e.column);
                if (s_[pos_] == '"') {
                    advance();
                    if (pos_ < s_.size() && s_[pos_] == '"') {  // "" escapes a quote
                        e.text += '"';
                        advance();
                        continue;
                    }
                    return e;
                }
                e.text += s_[pos_];
                advance();
            }
        }
        if (c == '|') {
            advance();
            for (;;) {
                if (pos_ >= s_.size()) throw ParseError("unterminated |symbol|", e.line, e.column);
                if (s_[pos_] == '|') {
                    advance();
                    return e;
                }
                e.text += s_[pos_];
                advance();
            }
        }
        while (pos_ < s_.size()) {
            char d = s_[pos_];
            if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';' || d == '"') break;
            e.text += d;
            advance();
        }
        return e;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    unsigned line_ = 1;
    unsigned col_ = 1;
};

}  // namespace

std::string SExpr::str() const {
    switch (kind) {
    case Kind::Atom: return text;
    case Kind::String: return "\"" + text + "\"";
    case Kind::List: {
        std::string s = "(";
        for (std::size_t i = 0; i < items.size(); ++i) s += (i ? " " : "") + items[i].str();
        return s + ")";
    }
    }
    return {};
}

std::vector<SExpr> parse_sexprs(std::string_view text) { return Reader(text).all(); }

std::size_t complete_sexpr_length(std::string_view b) {
    std::size_t i = 0;
    while (i < b.size() && std::isspace(static_cast<unsigned char>(b[i]))) ++i;
    if (i == b.size()) return 0;
    if (b[i] != '(') {
        // atom: complete once followed by whitespace
        std::size_t j = i;
        bool quoted = b[i] == '"';
        if (quoted) {
            for (j = i + 1; j < b.size(); ++j)
                if (b[j] == '"') return j + 1;
            return 0;
        }
        while (j < b.size() && !std::isspace(static_cast<unsigned char>(b[j]))) ++j;
        return j < b.size() ? j : 0;
    }
    int depth = 0;
    bool in_string = false;
    bool in_bar = false;
    for (std::size_t j = i; j < b.size(); ++j) {
        char c = b[j];
        if (in_string) {
            if (c == '"') in_string = false;
            continue;
        }
        if (in_bar) {
            if (c == '|') in_bar = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '|') in_bar = true;
        else if (c == '(') ++depth;
        else if (c == ')' && --depth == 0) return j + 1;
    }
    return 0;
}

}  // namespace abmc
