#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace abmc {

/// Parse error with a 1-based source position.
struct ParseError : std::runtime_error {
    ParseError(const std::string &msg, unsigned line, unsigned column)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line(line), column(column) {}
    unsigned line;
    unsigned column;
};

struct SExpr {
    enum class Kind { Atom, String, List };
    Kind kind = Kind::Atom;
    std::string text;  ///< atom or string contents (|quoted| symbols unquoted)
    std::vector<SExpr> items;
    unsigned line = 1;
    unsigned column = 1;

    [[nodiscard]] bool is_atom() const { return kind == Kind::Atom; }
    [[nodiscard]] bool is_list() const { return kind == Kind::List; }
    [[nodiscard]] bool is_atom(std::string_view s) const { return kind == Kind::Atom && text == s; }
    /// True if this is a list whose head is the atom `s`.
    [[nodiscard]] bool head_is(std::string_view s) const {
        return kind == Kind::List && !items.empty() && items.front().is_atom(s);
    }
    [[noreturn]] void fail(const std::string &msg) const { throw ParseError(msg, line, column); }
    [[nodiscard]] std::string str() const;
};

/// Parses every top-level expression of `text`. `;` starts a line comment.
std::vector<SExpr> parse_sexprs(std::string_view text);

/// Incremental reader over a growing buffer: returns how many bytes form
/// the first complete expression (after leading whitespace), or 0 if the
/// buffer does not hold one yet.
std::size_t complete_sexpr_length(std::string_view buffer);

}  // namespace abmc
