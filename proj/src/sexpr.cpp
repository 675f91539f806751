#include "loopd/sexpr.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace loopd {

namespace {

constexpr int kMaxNesting = 10000;

bool delimiter(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '\'' || c == '"' ||
           c == ';';
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string_view strip_sign(std::string_view s) {
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
    return s;
}

bool looks_integer(std::string_view tok) { return all_digits(strip_sign(tok)); }

bool looks_rational(std::string_view tok) {
    auto body = strip_sign(tok);
    auto slash = body.find('/');
    return slash != std::string_view::npos && all_digits(body.substr(0, slash)) &&
           all_digits(body.substr(slash + 1));
}

bool looks_float(std::string_view tok) {
    auto body = strip_sign(tok);
    auto dot = body.find('.');
    if (dot == std::string_view::npos) return false;
    auto before = body.substr(0, dot);
    auto after = body.substr(dot + 1);
    return (before.empty() || all_digits(before)) && (all_digits(after) || (after.empty() && !before.empty()));
}

}  // namespace

void Reader::advance() {
    if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
    } else {
        ++col_;
    }
    ++pos_;
}

void Reader::fail(ErrorKind kind, const std::string& msg, SourcePos at) const {
    throw Error(kind, msg, {}, at);
}

void Reader::skip_blank() {
    while (pos_ < text_.size()) {
        char c = peek();
        if (c == ';') {
            while (pos_ < text_.size() && peek() != '\n') advance();
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            advance();
        } else {
            return;
        }
    }
}

bool Reader::at_end() {
    skip_blank();
    return pos_ >= text_.size();
}

std::optional<Value> Reader::next() {
    skip_blank();
    if (pos_ >= text_.size()) return std::nullopt;
    form_start_ = here();
    return read_form(0);
}

Value Reader::read_form(int depth) {
    skip_blank();
    if (pos_ >= text_.size()) fail(ErrorKind::UnbalancedParen, "unexpected end of input", here());
    if (depth > kMaxNesting) fail(ErrorKind::BadToken, "nesting too deep", here());
    SourcePos start = here();
    char c = peek();
    switch (c) {
    case '(':
        advance();
        return read_list(depth + 1, start);
    case ')': fail(ErrorKind::UnbalancedParen, "unexpected ')'", start);
    case '\'': {
        advance();
        Value quoted = read_form(depth + 1);
        return list({Value::symbol(sym::quote()), quoted});
    }
    case '"': return read_string();
    case '`':
    case ',':
    case '#': fail(ErrorKind::BadToken, std::string("unsupported reader syntax '") + c + "'", start);
    default: return read_atom();
    }
}

Value Reader::read_list(int depth, SourcePos open) {
    std::vector<Value> items;
    Value tail;
    for (;;) {
        skip_blank();
        if (pos_ >= text_.size()) fail(ErrorKind::UnbalancedParen, "unterminated list", open);
        if (peek() == ')') {
            advance();
            break;
        }
        // A lone dot introduces the tail of a dotted list.
        if (peek() == '.' && (pos_ + 1 >= text_.size() || delimiter(text_[pos_ + 1]))) {
            SourcePos dot = here();
            if (items.empty()) fail(ErrorKind::BadToken, "dot with no preceding element", dot);
            advance();
            tail = read_form(depth);
            skip_blank();
            if (pos_ >= text_.size()) fail(ErrorKind::UnbalancedParen, "unterminated list", open);
            if (peek() != ')') fail(ErrorKind::BadToken, "expected ')' after dotted tail", here());
            advance();
            break;
        }
        items.push_back(read_form(depth));
    }
    Value r = std::move(tail);
    for (auto it = items.rbegin(); it != items.rend(); ++it) r = cons(std::move(*it), std::move(r));
    return r;
}

Value Reader::read_string() {
    SourcePos start = here();
    advance();
    std::string s;
    for (;;) {
        if (pos_ >= text_.size()) fail(ErrorKind::BadToken, "unterminated string", start);
        char c = peek();
        advance();
        if (c == '"') break;
        if (c == '\\') {
            if (pos_ >= text_.size()) fail(ErrorKind::BadToken, "unterminated string", start);
            c = peek();
            advance();
        }
        s.push_back(c);
    }
    return Value::string(std::move(s));
}

Value Reader::read_atom() {
    SourcePos start = here();
    if (peek() == '|') {
        advance();
        std::string name;
        for (;;) {
            if (pos_ >= text_.size()) fail(ErrorKind::BadToken, "unterminated |symbol|", start);
            char c = peek();
            advance();
            if (c == '|') break;
            if (c == '\\') {
                if (pos_ >= text_.size()) fail(ErrorKind::BadToken, "unterminated |symbol|", start);
                c = peek();
                advance();
            }
            name.push_back(c);
        }
        if (pos_ < text_.size() && !delimiter(peek()))
            fail(ErrorKind::BadToken, "unexpected character after |symbol|", here());
        return Value::symbol(name);
    }
    std::size_t begin = pos_;
    while (pos_ < text_.size() && !delimiter(peek())) {
        if (peek() == '|' || peek() == '\\' || peek() == '#')
            fail(ErrorKind::BadToken, std::string("unsupported character '") + peek() + "' in token", here());
        advance();
    }
    std::string_view tok = text_.substr(begin, pos_ - begin);
    if (tok == ".") fail(ErrorKind::BadToken, "dot outside of a list", start);
    if (looks_integer(tok)) {
        std::string digits(tok.front() == '+' ? tok.substr(1) : tok);
        return Value::integer(mpz_class(digits, 10));
    }
    if (looks_rational(tok)) fail(ErrorKind::BadToken, "rational numbers are not supported: " + std::string(tok), start);
    if (looks_float(tok)) fail(ErrorKind::BadToken, "floating point numbers are not supported: " + std::string(tok), start);
    std::string name(tok);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
    return Value::symbol(name);
}

ReadResult read_sexpr(std::string_view text, std::size_t offset) {
    Reader r(text.substr(offset));
    auto v = r.next();
    if (!v) throw Error(ErrorKind::UnbalancedParen, "no form in input", {}, SourcePos{offset, 1, 1});
    return {*v, offset + r.offset()};
}

Value parse(std::string_view text) {
    Reader r(text);
    auto v = r.next();
    if (!v) throw Error(ErrorKind::UnbalancedParen, "no form in input", {}, SourcePos{});
    if (!r.at_end()) throw Error(ErrorKind::BadToken, "trailing text after form", {}, SourcePos{r.offset(), 1, 1});
    return *v;
}

std::vector<Value> read_all(std::string_view text) {
    Reader r(text);
    std::vector<Value> out;
    while (auto v = r.next()) out.push_back(*v);
    return out;
}

namespace {

bool needs_bars(const std::string& name) {
    if (name.empty() || name == ".") return true;
    if (looks_integer(name) || looks_rational(name) || looks_float(name)) return true;
    for (char c : name) {
        if (delimiter(c) || c == '|' || c == '\\' || c == '#' || c == '`' || c == ',') return true;
        if (std::islower(static_cast<unsigned char>(c))) return true;
    }
    return false;
}

void print_to(std::string& out, const Value& v);

void print_atom(std::string& out, const Value& v) {
    if (v.is_fixnum()) {
        out += std::to_string(v.fixnum());
    } else if (v.is_integer()) {
        out += v.bigint().get_str();
    } else if (v.is_symbol()) {
        const std::string& name = v.as_symbol()->name;
        if (!needs_bars(name)) {
            out += name;
            return;
        }
        out.push_back('|');
        for (char c : name) {
            if (c == '|' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        out.push_back('|');
    } else if (v.is_string()) {
        out.push_back('"');
        for (char c : v.as_string()) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        out.push_back('"');
    } else if (v.is_lambda()) {
        print_to(out, lambda_to_sexpr(*v.as_lambda()));
    }
}

void print_to(std::string& out, const Value& v) {
    if (!v.is_pair()) {
        print_atom(out, v);
        return;
    }
    if (v.car().is(sym::quote()) && v.cdr().is_pair() && v.cdr().cdr().is_nil()) {
        out.push_back('\'');
        print_to(out, v.cdr().car());
        return;
    }
    out.push_back('(');
    const Value* p = &v;
    bool first = true;
    while (p->is_pair()) {
        if (!first) out.push_back(' ');
        first = false;
        print_to(out, p->car());
        p = &p->cdr();
    }
    if (!p->is_nil()) {
        out += " . ";
        print_atom(out, *p);
    }
    out.push_back(')');
}

}  // namespace

std::string print_sexpr(const Value& v) {
    std::string out;
    print_to(out, v);
    return out;
}

}  // namespace loopd
