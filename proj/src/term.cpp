#include "loopd/term.hpp"

#include <algorithm>

#include "loopd/kernel.hpp"
#include "loopd/loop_syntax.hpp"
#include "loopd/symbols.hpp"
#include "loopd/translate.hpp"

namespace loopd {

namespace {

constexpr std::string_view kWarrantPrefix = "APPLY$-WARRANT-";

std::shared_ptr<Term> fresh(TermKind k) {
    auto t = std::make_shared<Term>();
    t->kind = k;
    return t;
}

bool is_call(const Term& t, const Symbol* fn) { return t.kind == TermKind::Call && t.symbol == fn; }

}  // namespace

TermPtr make_const(Value v, const Symbol* display) {
    auto t = fresh(TermKind::Const);
    t->value = std::move(v);
    t->symbol = display;
    return t;
}

TermPtr make_var(const Symbol* s) {
    auto t = fresh(TermKind::Var);
    t->symbol = s;
    return t;
}

TermPtr make_call(const Symbol* fn, std::vector<TermPtr> args) {
    auto t = fresh(TermKind::Call);
    t->symbol = fn;
    t->args = std::move(args);
    t->builtin = find_builtin(fn);
    if (fn->name.size() > kWarrantPrefix.size() && fn->name.starts_with(kWarrantPrefix))
        t->warrant_of = intern(std::string_view(fn->name).substr(kWarrantPrefix.size()));
    return t;
}

TermPtr make_warrant_hyp(const Symbol* fn) {
    return make_call(intern(std::string(kWarrantPrefix) + fn->name), {});
}

TermPtr make_if(TermPtr test, TermPtr then, TermPtr otherwise) {
    auto t = fresh(TermKind::If);
    t->args = {std::move(test), std::move(then), std::move(otherwise)};
    return t;
}

TermPtr make_let(std::vector<const Symbol*> vars, std::vector<TermPtr> values, TermPtr body) {
    auto t = fresh(TermKind::Let);
    t->vars = std::move(vars);
    t->args = std::move(values);
    t->body = std::move(body);
    return t;
}

TermPtr make_lambda(std::shared_ptr<const LambdaObj> fn) {
    auto t = fresh(TermKind::Lambda);
    t->lambda = std::move(fn);
    return t;
}

TermPtr make_loop(std::shared_ptr<const LoopNode> node) {
    auto t = fresh(TermKind::Loop);
    t->loop = std::move(node);
    return t;
}

bool is_const(const Term& t, const Value& v) { return t.kind == TermKind::Const && equal(t.value, v); }

TermPtr make_and(const std::vector<TermPtr>& parts) {
    if (parts.empty()) return make_const(Value::t());
    TermPtr acc = parts.back();
    for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) acc = make_if(*it, acc, make_const(Value::nil()));
    return acc;
}

std::vector<TermPtr> conjuncts(const TermPtr& t) {
    std::vector<TermPtr> out;
    std::vector<TermPtr> work{t};
    while (!work.empty()) {
        TermPtr cur = work.back();
        work.pop_back();
        if (cur->kind == TermKind::If && is_const(*cur->args[2], Value::nil())) {
            work.push_back(cur->args[1]);
            work.push_back(cur->args[0]);
        } else if (!is_const(*cur, Value::t())) {
            out.push_back(cur);
        }
    }
    return out;
}

namespace {

void collect_free(const Term& t, std::vector<const Symbol*>& bound, std::vector<const Symbol*>& out) {
    auto add = [&](const Symbol* s) {
        if (std::find(bound.begin(), bound.end(), s) != bound.end()) return;
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    };
    switch (t.kind) {
    case TermKind::Const:
    case TermKind::Lambda: return;
    case TermKind::Var: add(t.symbol); return;
    case TermKind::Call:
    case TermKind::If:
        for (const auto& a : t.args) collect_free(*a, bound, out);
        return;
    case TermKind::Let: {
        for (const auto& a : t.args) collect_free(*a, bound, out);
        std::size_t mark = bound.size();
        bound.insert(bound.end(), t.vars.begin(), t.vars.end());
        collect_free(*t.body, bound, out);
        bound.resize(mark);
        return;
    }
    case TermKind::Loop:
        for (const Symbol* s : loop_free_vars(*t.loop->spec)) add(s);
        return;
    }
}

}  // namespace

std::vector<const Symbol*> free_vars(const Term& t) {
    std::vector<const Symbol*> bound;
    std::vector<const Symbol*> out;
    collect_free(t, bound, out);
    return out;
}

bool occurs_free(const Symbol* s, const Term& t) {
    auto fv = free_vars(t);
    return std::find(fv.begin(), fv.end(), s) != fv.end();
}

namespace {

void collect_calls(const Term& t, std::vector<const Symbol*>& out);

void collect_calls_lambda(const LambdaObj& fn, std::vector<const Symbol*>& out) {
    if (fn.guard) collect_calls(*fn.guard, out);
    collect_calls(*fn.body, out);
}

void collect_calls_loop(const LoopSpec& spec, std::vector<const Symbol*>& out) {
    for (const auto& it : spec.iters) {
        for (const TermPtr* p : {&it.target.lst, &it.target.lo, &it.target.hi, &it.target.by})
            if (*p) collect_calls(**p, out);
    }
    for (const auto* test : {&spec.until, &spec.when}) {
        if (!*test) continue;
        if ((*test)->guard) collect_calls(*(*test)->guard, out);
        collect_calls(*(*test)->test, out);
    }
    if (spec.body_guard) collect_calls(*spec.body_guard, out);
    collect_calls(*spec.body, out);
}

void collect_calls(const Term& t, std::vector<const Symbol*>& out) {
    switch (t.kind) {
    case TermKind::Const:
    case TermKind::Var: return;
    case TermKind::Call:
        if (t.builtin == nullptr && t.warrant_of == nullptr &&
            std::find(out.begin(), out.end(), t.symbol) == out.end())
            out.push_back(t.symbol);
        for (const auto& a : t.args) collect_calls(*a, out);
        return;
    case TermKind::If:
        for (const auto& a : t.args) collect_calls(*a, out);
        return;
    case TermKind::Let:
        for (const auto& a : t.args) collect_calls(*a, out);
        collect_calls(*t.body, out);
        return;
    case TermKind::Lambda: collect_calls_lambda(*t.lambda, out); return;
    case TermKind::Loop: collect_calls_loop(*t.loop->spec, out); return;
    }
}

}  // namespace

std::vector<const Symbol*> called_functions(const Term& t) {
    std::vector<const Symbol*> out;
    collect_calls(t, out);
    return out;
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
    if (!a || !b) return !a && !b;
    return term_equal(*a, *b);
}

bool lambda_equal(const LambdaObj& a, const LambdaObj& b) {
    return a.formals == b.formals && term_equal(a.guard, b.guard) && term_equal(a.body, b.body);
}

bool term_equal(const Term& a, const Term& b) {
    if (&a == &b) return true;
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case TermKind::Const: return equal(a.value, b.value);
    case TermKind::Var: return a.symbol == b.symbol;
    case TermKind::Call:
    case TermKind::If:
        if (a.symbol != b.symbol || a.args.size() != b.args.size()) return false;
        for (std::size_t i = 0; i < a.args.size(); ++i)
            if (!term_equal(a.args[i], b.args[i])) return false;
        return true;
    case TermKind::Let:
        if (a.vars != b.vars || a.args.size() != b.args.size()) return false;
        for (std::size_t i = 0; i < a.args.size(); ++i)
            if (!term_equal(a.args[i], b.args[i])) return false;
        return term_equal(a.body, b.body);
    case TermKind::Lambda: return lambda_equal(*a.lambda, *b.lambda);
    case TermKind::Loop: return loop_spec_equal(*a.loop->spec, *b.loop->spec);
    }
    return false;
}

TermPtr substitute(const TermPtr& t, const std::map<const Symbol*, TermPtr>& subst) {
    if (subst.empty()) return t;
    switch (t->kind) {
    case TermKind::Const:
    case TermKind::Lambda: return t;
    case TermKind::Var: {
        auto it = subst.find(t->symbol);
        return it == subst.end() ? t : it->second;
    }
    case TermKind::Call: {
        std::vector<TermPtr> args;
        for (const auto& a : t->args) args.push_back(substitute(a, subst));
        auto r = std::make_shared<Term>(*t);
        r->args = std::move(args);
        return r;
    }
    case TermKind::If:
        return make_if(substitute(t->args[0], subst), substitute(t->args[1], subst),
                       substitute(t->args[2], subst));
    case TermKind::Let: {
        std::vector<TermPtr> values;
        for (const auto& a : t->args) values.push_back(substitute(a, subst));
        auto inner = subst;
        for (const Symbol* v : t->vars) inner.erase(v);
        return make_let(t->vars, std::move(values), substitute(t->body, inner));
    }
    case TermKind::Loop: {
        // A loop's sub-terms live inside the parsed spec; bind instead of
        // rewriting it.
        std::vector<const Symbol*> vars;
        std::vector<TermPtr> values;
        for (const Symbol* s : free_vars(*t)) {
            auto it = subst.find(s);
            if (it == subst.end()) continue;
            vars.push_back(s);
            values.push_back(it->second);
        }
        if (vars.empty()) return t;
        return make_let(std::move(vars), std::move(values), t);
    }
    }
    return t;
}

namespace {

Value sym_value(const Symbol* s) { return Value::symbol(s); }

Value quoted(const Value& v) { return list({sym_value(sym::quote()), v}); }

bool self_evaluating(const Value& v) {
    if (v.is_integer() || v.is_string() || v.is_nil()) return true;
    if (v.is_symbol()) return v.as_symbol() == sym::t() || v.as_symbol()->keyword();
    return false;
}

Value let_to_sexpr(const Term& t, Value (*render)(const Term&)) {
    std::vector<Value> bindings;
    for (std::size_t i = 0; i < t.vars.size(); ++i) bindings.push_back(list({sym_value(t.vars[i]), render(*t.args[i])}));
    return list({sym_value(sym::let()), list_from(bindings), render(*t.body)});
}

Value declare_form(const LambdaObj& fn, Value (*render)(const Term&), bool with_ignorable) {
    std::vector<Value> decls{sym_value(sym::declare())};
    if (fn.guard) decls.push_back(list({sym_value(sym::xargs()), sym_value(sym::kw_guard()), render(*fn.guard)}));
    if (with_ignorable) {
        std::vector<Value> ign{sym_value(sym::ignorable())};
        for (const Symbol* f : fn.formals) ign.push_back(sym_value(f));
        decls.push_back(list_from(ign));
    }
    return list_from(decls);
}

Value formals_list(const LambdaObj& fn) {
    std::vector<Value> fs;
    for (const Symbol* f : fn.formals) fs.push_back(sym_value(f));
    return list_from(fs);
}

}  // namespace

Value lambda_to_sexpr(const LambdaObj& fn) {
    return list({sym_value(sym::lambda()), formals_list(fn), declare_form(fn, &term_to_sexpr, true),
                 term_to_sexpr(*fn.body)});
}

Value untranslate_lambda(const LambdaObj& fn) {
    std::vector<Value> parts{sym_value(sym::lambda_dollar()), formals_list(fn)};
    if (fn.guard) parts.push_back(declare_form(fn, &untranslate, false));
    parts.push_back(untranslate(*fn.body));
    return list_from(parts);
}

Value term_to_sexpr(const Term& t) {
    switch (t.kind) {
    case TermKind::Const: return t.symbol ? sym_value(t.symbol) : quoted(t.value);
    case TermKind::Var: return sym_value(t.symbol);
    case TermKind::Call: {
        std::vector<Value> items{sym_value(t.symbol)};
        for (const auto& a : t.args) items.push_back(term_to_sexpr(*a));
        return list_from(items);
    }
    case TermKind::If:
        return list({sym_value(sym::if_()), term_to_sexpr(*t.args[0]), term_to_sexpr(*t.args[1]),
                     term_to_sexpr(*t.args[2])});
    case TermKind::Let: return let_to_sexpr(t, &term_to_sexpr);
    case TermKind::Lambda: return quoted(lambda_to_sexpr(*t.lambda));
    case TermKind::Loop: return scion_to_sexpr(*t.loop->scion);
    }
    return Value();
}

namespace {

// Right-nested chains of a binary primitive, flattened into one sugar call.
Value flatten_binary(const Term& t, const Symbol* prim, const Symbol* macro) {
    std::vector<Value> items{sym_value(macro)};
    const Term* cur = &t;
    for (;;) {
        items.push_back(untranslate(*cur->args[0]));
        const Term& rest = *cur->args[1];
        bool rest_is_minus = prim == sym::binary_plus() && is_call(rest, sym::binary_plus()) &&
                             is_call(*rest.args[1], sym::unary_minus());
        if (is_call(rest, prim) && !rest_is_minus) {
            cur = &rest;
            continue;
        }
        items.push_back(untranslate(rest));
        break;
    }
    return list_from(items);
}

Value untranslate_call(const Term& t) {
    const Symbol* f = t.symbol;
    if (f == sym::binary_plus()) {
        if (is_call(*t.args[1], sym::unary_minus()))
            return list({sym_value(sym::minus()), untranslate(*t.args[0]), untranslate(*t.args[1]->args[0])});
        return flatten_binary(t, sym::binary_plus(), sym::plus());
    }
    if (f == sym::binary_times()) return flatten_binary(t, sym::binary_times(), sym::times());
    if (f == sym::unary_minus()) return list({sym_value(sym::minus()), untranslate(*t.args[0])});
    if (f == sym::not_() && is_call(*t.args[0], sym::less())) {
        const Term& lt = *t.args[0];
        return list({sym_value(sym::less_eq()), untranslate(*lt.args[1]), untranslate(*lt.args[0])});
    }
    if (f == sym::cons()) {
        std::vector<Value> items;
        const Term* cur = &t;
        while (is_call(*cur, sym::cons())) {
            items.push_back(untranslate(*cur->args[0]));
            cur = cur->args[1].get();
        }
        if (is_const(*cur, Value::nil()) && cur->symbol == nullptr) {
            items.insert(items.begin(), sym_value(sym::list()));
            return list_from(items);
        }
    }
    std::vector<Value> items{sym_value(f)};
    for (const auto& a : t.args) items.push_back(untranslate(*a));
    return list_from(items);
}

Value untranslate_if(const Term& t) {
    const Term& test = *t.args[0];
    const Term& then = *t.args[1];
    const Term& otherwise = *t.args[2];
    if (is_const(otherwise, Value::nil()) && otherwise.symbol == nullptr) {
        std::vector<Value> items{sym_value(sym::and_())};
        const Term* cur = &t;
        while (cur->kind == TermKind::If && is_const(*cur->args[2], Value::nil()) && cur->args[2]->symbol == nullptr) {
            items.push_back(untranslate(*cur->args[0]));
            cur = cur->args[1].get();
        }
        items.push_back(untranslate(*cur));
        return list_from(items);
    }
    if (term_equal(test, then)) {
        std::vector<Value> items{sym_value(sym::or_())};
        const Term* cur = &t;
        while (cur->kind == TermKind::If && term_equal(*cur->args[0], *cur->args[1])) {
            items.push_back(untranslate(*cur->args[0]));
            cur = cur->args[2].get();
        }
        items.push_back(untranslate(*cur));
        return list_from(items);
    }
    return list({sym_value(sym::if_()), untranslate(test), untranslate(then), untranslate(otherwise)});
}

}  // namespace

Value untranslate(const Term& t) {
    switch (t.kind) {
    case TermKind::Const:
        if (t.symbol) return sym_value(t.symbol);
        return self_evaluating(t.value) ? t.value : quoted(t.value);
    case TermKind::Var: return sym_value(t.symbol);
    case TermKind::Call: return untranslate_call(t);
    case TermKind::If: return untranslate_if(t);
    case TermKind::Let: return let_to_sexpr(t, &untranslate);
    case TermKind::Lambda: return untranslate_lambda(*t.lambda);
    case TermKind::Loop: return loop_to_sexpr(*t.loop->spec, true);
    }
    return Value();
}

}  // namespace loopd
