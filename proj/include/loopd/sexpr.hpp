#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "loopd/error.hpp"
#include "loopd/value.hpp"

namespace loopd {

/// Incremental reader over a text buffer. Semicolon comments and whitespace
/// between forms are skipped. Symbols are upper-cased unless written
/// between vertical bars.
class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    /// Next form, or nullopt at end of input. Throws Error(UnbalancedParen |
    /// BadToken) carrying the position of the offending character.
    std::optional<Value> next();

    /// Start of the form most recently returned by next().
    SourcePos form_start() const { return form_start_; }
    std::size_t offset() const { return pos_; }
    bool at_end();

private:
    Value read_form(int depth);
    Value read_list(int depth, SourcePos open);
    Value read_atom();
    Value read_string();
    void skip_blank();
    SourcePos here() const { return {pos_, line_, col_}; }
    char peek() const { return text_[pos_]; }
    void advance();
    [[noreturn]] void fail(ErrorKind kind, const std::string& msg, SourcePos at) const;

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
    SourcePos form_start_;
};

struct ReadResult {
    Value value;
    std::size_t end;
};

/// Reads one form starting at `offset`; returns it and the position after it.
ReadResult read_sexpr(std::string_view text, std::size_t offset = 0);

/// Convenience: parse text holding exactly one form.
Value parse(std::string_view text);

std::vector<Value> read_all(std::string_view text);

/// Canonical single-line rendering; read_sexpr(print_sexpr(v)) == v.
std::string print_sexpr(const Value& v);

}  // namespace loopd
