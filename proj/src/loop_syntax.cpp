#include "loopd/loop_syntax.hpp"

#include <algorithm>

#include "loopd/error.hpp"
#include "loopd/kernel.hpp"
#include "loopd/sexpr.hpp"
#include "loopd/symbols.hpp"

namespace loopd {

// ---------------------------------------------------------------------------
// Type specs

bool TypeSpec::holds(const Value& v) const {
    switch (kind) {
    case Kind::Integer:
    case Kind::Rational: return v.is_integer();
    case Kind::Cons: return v.is_pair();
    case Kind::T: return true;
    case Kind::IntegerRange:
        if (!v.is_integer()) return false;
        if (lo && int_compare(v, *lo) < 0) return false;
        if (hi && int_compare(v, *hi) > 0) return false;
        return true;
    }
    return false;
}

Value TypeSpec::to_sexpr() const {
    switch (kind) {
    case Kind::Integer: return Value::symbol(sym::integer());
    case Kind::Rational: return Value::symbol(sym::rational());
    case Kind::Cons: return Value::symbol(sym::cons());
    case Kind::T: return Value::t();
    case Kind::IntegerRange: {
        Value star = Value::symbol(sym::star());
        return list({Value::symbol(sym::integer()), lo ? *lo : star, hi ? *hi : star});
    }
    }
    return Value();
}

const char* TypeSpec::predicate_name() const {
    switch (kind) {
    case Kind::Integer: return "INTEGERP";
    case Kind::Rational: return "RATIONALP";
    case Kind::Cons: return "CONSP";
    case Kind::T: return "T";
    case Kind::IntegerRange: return "INTEGER-IN-RANGE";
    }
    return "";
}

bool operator==(const TypeSpec& a, const TypeSpec& b) {
    auto same = [](const std::optional<Value>& x, const std::optional<Value>& y) {
        return x.has_value() == y.has_value() && (!x || equal(*x, *y));
    };
    return a.kind == b.kind && same(a.lo, b.lo) && same(a.hi, b.hi);
}

TypeSpec parse_type_spec(const Value& e) {
    TypeSpec s;
    if (e.is(sym::integer())) {
        s.kind = TypeSpec::Kind::Integer;
        return s;
    }
    if (e.is(sym::rational())) {
        s.kind = TypeSpec::Kind::Rational;
        return s;
    }
    if (e.is(sym::cons())) {
        s.kind = TypeSpec::Kind::Cons;
        return s;
    }
    if (e.is(sym::t())) return s;
    if (e.is_pair() && e.car().is(sym::integer()) && is_true_list(e) && length(e) == 3) {
        s.kind = TypeSpec::Kind::IntegerRange;
        const Value& lo = e.cdr().car();
        const Value& hi = e.cdr().cdr().car();
        auto bound = [&](const Value& b) -> std::optional<Value> {
            if (b.is(sym::star())) return std::nullopt;
            if (!b.is_integer()) throw Error(ErrorKind::MalformedOfType, "bad type bound in " + print_sexpr(e), {e});
            return b;
        };
        s.lo = bound(lo);
        s.hi = bound(hi);
        return s;
    }
    throw Error(ErrorKind::MalformedOfType, "unsupported type spec " + print_sexpr(e), {e});
}

TermPtr typespec_term(const TypeSpec& s, const TermPtr& x) {
    switch (s.kind) {
    case TypeSpec::Kind::Integer: return make_call(sym::integerp(), {x});
    case TypeSpec::Kind::Rational: return make_call(sym::rationalp(), {x});
    case TypeSpec::Kind::Cons: return make_call(sym::consp(), {x});
    case TypeSpec::Kind::T: return make_const(Value::t());
    case TypeSpec::Kind::IntegerRange: {
        std::vector<TermPtr> parts{make_call(sym::integerp(), {x})};
        if (s.lo) parts.push_back(make_call(sym::not_(), {make_call(sym::less(), {x, make_const(*s.lo)})}));
        if (s.hi) parts.push_back(make_call(sym::not_(), {make_call(sym::less(), {make_const(*s.hi), x})}));
        return make_and(parts);
    }
    }
    return make_const(Value::t());
}

const char* loop_op_name(LoopOp op) {
    switch (op) {
    case LoopOp::Always: return "ALWAYS";
    case LoopOp::Thereis: return "THEREIS";
    case LoopOp::Append: return "APPEND";
    case LoopOp::Collect: return "COLLECT";
    case LoopOp::Sum: return "SUM";
    }
    return "";
}

std::vector<const Symbol*> LoopSpec::iter_vars() const {
    std::vector<const Symbol*> out;
    for (const auto& it : iters) out.push_back(it.var);
    return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool is_word(const Value& v, std::string_view name) { return v.is_symbol() && v.as_symbol()->name == name; }

std::optional<LoopOp> op_of(const Value& v) {
    if (!v.is_symbol()) return std::nullopt;
    const std::string& n = v.as_symbol()->name;
    if (n == "ALWAYS") return LoopOp::Always;
    if (n == "THEREIS") return LoopOp::Thereis;
    if (n == "APPEND") return LoopOp::Append;
    if (n == "COLLECT") return LoopOp::Collect;
    if (n == "SUM") return LoopOp::Sum;
    return std::nullopt;
}

struct RawTarget {
    TargetKind kind = TargetKind::In;
    Value lst, lo, hi, by;
    bool by_given = false;
};

struct RawIter {
    const Symbol* var;
    std::optional<TypeSpec> type;
    RawTarget target;
};

class LoopParser {
public:
    LoopParser(const Value& e, const SymbolSet& outer, const World& w, const SelfSignature* self)
        : form_(e), outer_(outer), w_(w), self_(self) {
        if (!is_true_list(e) || !e.car().is(sym::loop_dollar()))
            throw Error(ErrorKind::MalformedLoop, "not a loop$ form: " + print_sexpr(e), {e});
        toks_ = list_to_vector(e.cdr());
    }

    LoopSpec parse() {
        std::vector<RawIter> raw;
        if (!at_word("FOR")) fail(ErrorKind::MalformedLoop, "loop$ must begin with FOR");
        ++pos_;
        raw.push_back(iter_clause());
        while (at_word("AS")) {
            ++pos_;
            raw.push_back(iter_clause());
        }
        LoopSpec spec;
        spec.original = form_;
        SymbolSet iter_names;
        for (const auto& r : raw) {
            if (!iter_names.insert(r.var).second)
                throw Error(ErrorKind::DuplicateIterVar, "duplicate iteration variable " + r.var->name,
                            {Value::symbol(r.var)});
        }
        for (const auto& r : raw) spec.iters.push_back(IterClause{r.var, r.type, target(r.target, iter_names)});

        SymbolSet inner = outer_;
        inner.insert(iter_names.begin(), iter_names.end());

        Value until_guard, until_test, when_guard, when_test;
        bool has_until = false, has_when = false, until_guarded = false, when_guarded = false;
        if (at_word("UNTIL")) {
            ++pos_;
            has_until = true;
            until_guarded = guard_clause(until_guard);
            until_test = take("UNTIL test");
        }
        if (at_word("WHEN")) {
            ++pos_;
            has_when = true;
            when_guarded = guard_clause(when_guard);
            when_test = take("WHEN test");
        }
        if (pos_ >= toks_.size()) throw Error(ErrorKind::MissingBody, "missing loop operator and body: " + print_sexpr(form_), {form_});
        std::optional<LoopOp> op = op_of(toks_[pos_]);
        if (!op) {
            if (at_word("UNTIL") || at_word("WHEN") || at_word("AS") || at_word("FOR"))
                fail(ErrorKind::MalformedLoop, "clauses out of order");
            throw Error(ErrorKind::UnknownLoopOperator, "unknown loop operator " + print_sexpr(toks_[pos_]),
                        {toks_[pos_]});
        }
        ++pos_;
        spec.op = *op;
        if (has_when && (spec.op == LoopOp::Always || spec.op == LoopOp::Thereis))
            throw Error(ErrorKind::WhenWithAlwaysOrThereis,
                        std::string("WHEN may not be used with ") + loop_op_name(spec.op), {form_});
        Value body_guard;
        bool body_guarded = false;
        if (pos_ < toks_.size() && toks_[pos_].is(sym::kw_guard())) {
            ++pos_;
            if (pos_ >= toks_.size()) throw Error(ErrorKind::MissingBody, "missing :GUARD term", {form_});
            body_guard = toks_[pos_++];
            body_guarded = true;
        }
        if (pos_ >= toks_.size()) throw Error(ErrorKind::MissingBody, "missing loop body: " + print_sexpr(form_), {form_});
        Value body = toks_[pos_++];
        if (pos_ != toks_.size()) fail(ErrorKind::MalformedLoop, "unexpected tokens after the loop body");

        auto tr = [&](const Value& v) { return translate_term(v, inner, w_, self_); };
        if (has_until) spec.until = LoopTest{until_guarded ? tr(until_guard) : nullptr, tr(until_test)};
        if (has_when) spec.when = LoopTest{when_guarded ? tr(when_guard) : nullptr, tr(when_test)};
        if (body_guarded) spec.body_guard = tr(body_guard);
        spec.body = tr(body);
        return spec;
    }

private:
    [[noreturn]] void fail(ErrorKind k, const std::string& msg) {
        throw Error(k, msg + ": " + print_sexpr(form_), {form_});
    }

    bool at_word(std::string_view w) const { return pos_ < toks_.size() && is_word(toks_[pos_], w); }

    Value take(const char* what) {
        if (pos_ >= toks_.size()) fail(ErrorKind::MalformedLoop, std::string("missing ") + what);
        return toks_[pos_++];
    }

    bool guard_clause(Value& out) {
        if (pos_ < toks_.size() && toks_[pos_].is(sym::kw_guard())) {
            ++pos_;
            out = take(":GUARD term");
            return true;
        }
        return false;
    }

    RawIter iter_clause() {
        if (pos_ >= toks_.size()) fail(ErrorKind::MalformedTarget, "missing iteration variable");
        const Value& v = toks_[pos_];
        if (!v.is_symbol() || v.is_nil() || v.is(sym::t()) || v.as_symbol()->keyword())
            fail(ErrorKind::MalformedTarget, "iteration variable must be a symbol");
        RawIter r{v.as_symbol(), std::nullopt, {}};
        ++pos_;
        if (at_word("OF-TYPE")) {
            ++pos_;
            if (pos_ >= toks_.size()) throw Error(ErrorKind::MalformedOfType, "missing type spec", {form_});
            r.type = parse_type_spec(toks_[pos_++]);
        }
        if (at_word("IN") || at_word("ON")) {
            r.target.kind = at_word("IN") ? TargetKind::In : TargetKind::On;
            ++pos_;
            if (pos_ >= toks_.size()) fail(ErrorKind::MalformedTarget, "missing target list");
            r.target.lst = toks_[pos_++];
        } else if (at_word("FROM")) {
            r.target.kind = TargetKind::FromToBy;
            ++pos_;
            if (pos_ >= toks_.size()) fail(ErrorKind::MalformedTarget, "missing FROM bound");
            r.target.lo = toks_[pos_++];
            if (!at_word("TO")) fail(ErrorKind::MalformedTarget, "FROM requires TO");
            ++pos_;
            if (pos_ >= toks_.size()) fail(ErrorKind::MalformedTarget, "missing TO bound");
            r.target.hi = toks_[pos_++];
            if (at_word("BY")) {
                ++pos_;
                if (pos_ >= toks_.size()) fail(ErrorKind::MalformedTarget, "missing BY step");
                r.target.by = toks_[pos_++];
                r.target.by_given = true;
            }
        } else {
            fail(ErrorKind::MalformedTarget, "expected IN, ON or FROM after " + r.var->name);
        }
        return r;
    }

    TargetClause target(const RawTarget& r, const SymbolSet& iter_names) {
        // Targets are computed before iteration starts, so they may not see
        // the iteration variables (unless an outer binding has the same name).
        SymbolSet scope = outer_;
        scope.insert(iter_names.begin(), iter_names.end());
        auto tr = [&](const Value& v) {
            TermPtr t = translate_term(v, scope, w_, self_);
            for (const Symbol* s : free_vars(*t))
                if (iter_names.count(s) != 0 && outer_.count(s) == 0)
                    fail(ErrorKind::MalformedTarget, "target mentions iteration variable " + s->name);
            return t;
        };
        TargetClause c;
        c.kind = r.kind;
        c.by_given = r.by_given;
        if (r.kind == TargetKind::FromToBy) {
            c.lo = tr(r.lo);
            c.hi = tr(r.hi);
            c.by = r.by_given ? tr(r.by) : make_const(Value::integer(1));
        } else {
            c.lst = tr(r.lst);
        }
        return c;
    }

    Value form_;
    const SymbolSet& outer_;
    const World& w_;
    const SelfSignature* self_;
    std::vector<Value> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

LoopSpec parse_loop(const Value& e, const SymbolSet& outer, const World& w, const SelfSignature* self) {
    return LoopParser(e, outer, w, self).parse();
}

// ---------------------------------------------------------------------------
// Classification and free variables

namespace {

std::vector<TermPtr> inner_terms(const LoopSpec& spec) {
    std::vector<TermPtr> out;
    for (const auto* test : {&spec.until, &spec.when}) {
        if (!*test) continue;
        if ((*test)->guard) out.push_back((*test)->guard);
        out.push_back((*test)->test);
    }
    if (spec.body_guard) out.push_back(spec.body_guard);
    out.push_back(spec.body);
    return out;
}

void add_unique(std::vector<const Symbol*>& out, const Symbol* s) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
}

}  // namespace

Classification classify(const LoopSpec& spec) {
    Classification c;
    auto ivars = spec.iter_vars();
    for (const TermPtr& t : inner_terms(spec))
        for (const Symbol* s : free_vars(*t))
            if (std::find(ivars.begin(), ivars.end(), s) == ivars.end()) add_unique(c.globals, s);
    c.plain = spec.iters.size() == 1 && c.globals.empty();
    return c;
}

std::vector<const Symbol*> loop_free_vars(const LoopSpec& spec) {
    std::vector<const Symbol*> out;
    for (const auto& it : spec.iters)
        for (const TermPtr* p : {&it.target.lst, &it.target.lo, &it.target.hi, &it.target.by})
            if (*p)
                for (const Symbol* s : free_vars(**p)) add_unique(out, s);
    for (const Symbol* s : classify(spec).globals) add_unique(out, s);
    return out;
}

// ---------------------------------------------------------------------------
// Rendering and comparison

Value loop_to_sexpr(const LoopSpec& spec, bool sugar) {
    auto render = [&](const TermPtr& t) { return sugar ? untranslate(*t) : term_to_sexpr(*t); };
    auto word = [](const char* w) { return Value::symbol(w); };
    std::vector<Value> out{Value::symbol(sym::loop_dollar())};
    bool first = true;
    for (const auto& it : spec.iters) {
        out.push_back(word(first ? "FOR" : "AS"));
        first = false;
        out.push_back(Value::symbol(it.var));
        if (it.type) {
            out.push_back(word("OF-TYPE"));
            out.push_back(it.type->to_sexpr());
        }
        const TargetClause& tg = it.target;
        switch (tg.kind) {
        case TargetKind::In:
        case TargetKind::On:
            out.push_back(word(tg.kind == TargetKind::In ? "IN" : "ON"));
            out.push_back(render(tg.lst));
            break;
        case TargetKind::FromToBy:
            out.push_back(word("FROM"));
            out.push_back(render(tg.lo));
            out.push_back(word("TO"));
            out.push_back(render(tg.hi));
            if (tg.by_given) {
                out.push_back(word("BY"));
                out.push_back(render(tg.by));
            }
            break;
        }
    }
    auto test = [&](const char* kw, const std::optional<LoopTest>& t) {
        if (!t) return;
        out.push_back(word(kw));
        if (t->guard) {
            out.push_back(Value::symbol(sym::kw_guard()));
            out.push_back(render(t->guard));
        }
        out.push_back(render(t->test));
    };
    test("UNTIL", spec.until);
    test("WHEN", spec.when);
    out.push_back(word(loop_op_name(spec.op)));
    if (spec.body_guard) {
        out.push_back(Value::symbol(sym::kw_guard()));
        out.push_back(render(spec.body_guard));
    }
    out.push_back(render(spec.body));
    return list_from(out);
}

bool loop_spec_equal(const LoopSpec& a, const LoopSpec& b) {
    if (a.iters.size() != b.iters.size() || a.op != b.op) return false;
    for (std::size_t i = 0; i < a.iters.size(); ++i) {
        const IterClause& x = a.iters[i];
        const IterClause& y = b.iters[i];
        if (x.var != y.var || x.type != y.type || x.target.kind != y.target.kind) return false;
        if (!term_equal(x.target.lst, y.target.lst) || !term_equal(x.target.lo, y.target.lo) ||
            !term_equal(x.target.hi, y.target.hi) || !term_equal(x.target.by, y.target.by))
            return false;
    }
    auto same_test = [](const std::optional<LoopTest>& x, const std::optional<LoopTest>& y) {
        if (x.has_value() != y.has_value()) return false;
        return !x || (term_equal(x->guard, y->guard) && term_equal(x->test, y->test));
    };
    return same_test(a.until, b.until) && same_test(a.when, b.when) && term_equal(a.body_guard, b.body_guard) &&
           term_equal(a.body, b.body);
}

}  // namespace loopd
