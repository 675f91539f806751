#include "loopd/guards.hpp"

#include <algorithm>
#include <random>

#include "loopd/error.hpp"
#include "loopd/sexpr.hpp"
#include "loopd/symbols.hpp"
#include "loopd/translate.hpp"

namespace loopd {

char class_letter(ConjectureClass c) {
    switch (c) {
    case ConjectureClass::A: return 'A';
    case ConjectureClass::B: return 'B';
    case ConjectureClass::C: return 'C';
    }
    return '?';
}

TermPtr typespec_pred(const TypeSpec& s, const TermPtr& x) { return typespec_term(s, x); }

namespace {

void add_unique(std::vector<const Symbol*>& out, const Symbol* s) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
}

std::vector<TermPtr> loop_terms(const LoopSpec& spec, bool with_targets) {
    std::vector<TermPtr> out;
    if (with_targets)
        for (const auto& it : spec.iters)
            for (const TermPtr* p : {&it.target.lst, &it.target.lo, &it.target.hi, &it.target.by})
                if (*p) out.push_back(*p);
    for (const auto* test : {&spec.until, &spec.when}) {
        if (!*test) continue;
        if ((*test)->guard) out.push_back((*test)->guard);
        out.push_back((*test)->test);
    }
    if (spec.body_guard) out.push_back(spec.body_guard);
    out.push_back(spec.body);
    return out;
}

const Symbol* fresh_variable(const LoopSpec& spec, const TermPtr& context_guard) {
    std::vector<const Symbol*> taken = spec.iter_vars();
    for (const TermPtr& t : loop_terms(spec, true))
        for (const Symbol* s : free_vars(*t)) add_unique(taken, s);
    for (const Symbol* s : free_vars(*context_guard)) add_unique(taken, s);
    auto free = [&](const Symbol* s) { return std::find(taken.begin(), taken.end(), s) == taken.end(); };
    if (free(sym::newv())) return sym::newv();
    for (int i = 0;; ++i) {
        const Symbol* s = intern("NEWV" + std::to_string(i));
        if (free(s)) return s;
    }
}

TermPtr target_term(const TargetClause& c) {
    switch (c.kind) {
    case TargetKind::In: return c.lst;
    case TargetKind::On: return make_call(sym::tails(), {c.lst});
    case TargetKind::FromToBy: return make_call(sym::from_to_by(), {c.lo, c.hi, c.by});
    }
    return c.lst;
}

TermPtr nth_of(std::size_t i, const TermPtr& v) {
    TermPtr t = v;
    for (std::size_t k = 0; k < i; ++k) t = make_call(sym::cdr(), {t});
    return make_call(sym::car(), {t});
}

TermPtr conj_or_null(std::vector<TermPtr> parts) {
    std::vector<TermPtr> kept;
    for (auto& p : parts)
        if (p && !is_const(*p, Value::t())) kept.push_back(std::move(p));
    if (kept.empty()) return nullptr;
    return make_and(kept);
}

}  // namespace

std::vector<GuardConjecture> generate_guard_conjectures(const LoopSpec& spec, const TermPtr& context_guard,
                                                        const World& w) {
    TermPtr ctx_guard = context_guard ? context_guard : make_const(Value::t());
    std::vector<TermPtr> base = conjuncts(ctx_guard);

    // Warrant hypotheses for the warranted functions used by the loop.
    std::vector<const Symbol*> fns;
    for (const TermPtr& t : loop_terms(spec, false))
        for (const Symbol* f : called_functions(*t)) add_unique(fns, f);
    for (const Symbol* f : fns)
        if (w.warranted(f)) base.push_back(make_warrant_hyp(f));

    const Symbol* fresh = fresh_variable(spec, ctx_guard);
    TermPtr fresh_var = make_var(fresh);
    std::map<const Symbol*, TermPtr> subst;
    TermPtr member_target;
    if (spec.iters.size() == 1) {
        subst[spec.iters[0].var] = fresh_var;
        member_target = target_term(spec.iters[0].target);
    } else {
        std::vector<TermPtr> parts;
        for (std::size_t i = 0; i < spec.iters.size(); ++i) {
            subst[spec.iters[i].var] = nth_of(i, fresh_var);
            parts.push_back(target_term(spec.iters[i].target));
        }
        TermPtr lst = make_const(Value());
        for (auto it = parts.rbegin(); it != parts.rend(); ++it) lst = make_call(sym::cons(), {*it, lst});
        member_target = make_call(sym::loop_as(), {lst});
    }
    std::vector<TermPtr> member_hyps = base;
    member_hyps.push_back(make_call(sym::member_equal(), {fresh_var, member_target}));

    std::vector<TermPtr> recognizers;
    for (const auto& it : spec.iters)
        if (it.type) recognizers.push_back(typespec_pred(*it.type, make_var(it.var)));

    std::vector<GuardConjecture> out;
    auto add_a = [&](const TermPtr& clause_guard, const char* source, bool always) {
        std::vector<TermPtr> parts = recognizers;
        parts.push_back(clause_guard);
        TermPtr g = conj_or_null(parts);
        if (!g || (!always && !clause_guard)) return;
        out.push_back(GuardConjecture{ConjectureClass::A, member_hyps, substitute(g, subst), source, fresh});
    };
    if (spec.until) add_a(spec.until->guard, "UNTIL", false);
    if (spec.when) add_a(spec.when->guard, "WHEN", false);
    add_a(spec.body_guard, "body", true);

    if (spec.op == LoopOp::Sum || spec.op == LoopOp::Append) {
        TermPtr body = substitute(spec.body, subst);
        TermPtr concl = spec.op == LoopOp::Sum ? make_call(sym::integerp(), {body})
                                               : make_call(sym::true_listp(), {body});
        out.push_back(GuardConjecture{ConjectureClass::B, member_hyps, concl, "body result", fresh});
    }

    for (const auto& it : spec.iters) {
        if (!it.type || it.type->kind == TypeSpec::Kind::T) continue;
        const TargetClause& c = it.target;
        if (c.kind == TargetKind::On) {
            out.push_back(GuardConjecture{ConjectureClass::C, base, typespec_pred(*it.type, make_const(Value())),
                                          "ON terminal NIL", nullptr});
        } else if (c.kind == TargetKind::FromToBy) {
            const TermPtr& i = c.lo;
            const TermPtr& j = c.hi;
            const TermPtr& k = c.by;
            // (+ i (* k (floor (- j i) k)) k): one step past the last index.
            TermPtr past = make_call(
                sym::binary_plus(),
                {i, make_call(sym::binary_plus(),
                              {make_call(sym::binary_times(),
                                         {k, make_call(sym::floor(),
                                                       {make_call(sym::binary_plus(),
                                                                  {j, make_call(sym::unary_minus(), {i})}),
                                                        k})}),
                               k})});
            const std::pair<TermPtr, const char*> items[] = {
                {i, "FROM-TO-BY lower bound"}, {j, "FROM-TO-BY upper bound"}, {k, "FROM-TO-BY step"},
                {past, "FROM-TO-BY final step"}};
            for (const auto& [t, what] : items)
                out.push_back(GuardConjecture{ConjectureClass::C, base, typespec_pred(*it.type, t), what, nullptr});
        }
    }
    return out;
}

Value conjecture_to_sexpr(const GuardConjecture& c) {
    Value concl = untranslate(*c.concl);
    if (c.hyps.empty()) return concl;
    Value hyp;
    if (c.hyps.size() == 1) {
        hyp = untranslate(*c.hyps[0]);
    } else {
        std::vector<Value> items{Value::symbol(sym::and_())};
        for (const auto& h : c.hyps) items.push_back(untranslate(*h));
        hyp = list_from(items);
    }
    return list({Value::symbol(sym::implies()), hyp, concl});
}

// ---------------------------------------------------------------------------
// Bounded checking

bool Report::all_pass() const {
    return std::all_of(results.begin(), results.end(), [](const ConjectureResult& r) { return r.pass; });
}

std::vector<Value> Report::to_sexprs() const {
    std::vector<Value> out;
    for (const auto& r : results) {
        std::vector<Value> items{Value::symbol("CONJECTURE"),
                                 Value::integer(static_cast<std::int64_t>(r.index)),
                                 Value::symbol("CLASS"),
                                 Value::symbol(std::string(1, class_letter(r.cls))),
                                 Value::symbol("STATUS"),
                                 Value::symbol(r.pass ? "PASS" : "FAIL")};
        if (!r.pass) {
            ListBuilder b;
            for (const auto& [s, v] : r.counterexample) b.push_back(cons(Value::symbol(s), v));
            items.push_back(list({Value::symbol("COUNTEREXAMPLE"), b.finish()}));
            if (!r.error.empty()) items.push_back(list({Value::symbol("ERROR"), Value::string(r.error)}));
        }
        out.push_back(list_from(items));
    }
    return out;
}

namespace {

class ConjectureChecker {
public:
    ConjectureChecker(const GuardConjecture& c, const World& w) : c_(c), w_(w) {
        for (const auto& h : c.hyps)
            for (const Symbol* s : free_vars(*h)) add(s);
        for (const Symbol* s : free_vars(*c.concl)) add(s);
    }

    const std::vector<const Symbol*>& vars() const { return vars_; }

    // False when the instance is a counterexample; fills `r`.
    bool check(Environment& env, ConjectureResult& r) {
        EvalContext ctx = EvalContext::top_level();
        ++r.instances;
        try {
            const std::size_t n = c_.hyps.size();
            const bool member = c_.fresh != nullptr;
            for (std::size_t i = 0; i + (member ? 1 : 0) < n; ++i)
                if (eval_term(*c_.hyps[i], env, w_, ctx).is_nil()) return true;
            if (!member) return holds(env, ctx, r);
            // The membership hypothesis: enumerate the concrete target list.
            const Term& mem = *c_.hyps[n - 1];
            Value lst = eval_term(*mem.args[1], env, w_, ctx);
            for (const Value* p = &lst; p->is_pair(); p = &p->cdr()) {
                env.bind(c_.fresh, p->car());
                bool ok = holds(env, ctx, r);
                env.truncate(env.size() - 1);
                if (!ok) return false;
            }
            return true;
        } catch (const Error& e) {
            record(env, r);
            r.error = e.what();
            return false;
        }
    }

private:
    void add(const Symbol* s) {
        if (s != c_.fresh) add_unique(vars_, s);
    }

    bool holds(Environment& env, EvalContext& ctx, ConjectureResult& r) {
        if (eval_term(*c_.concl, env, w_, ctx).truthy()) return true;
        record(env, r);
        return false;
    }

    void record(const Environment& env, ConjectureResult& r) {
        r.pass = false;
        r.counterexample.assign(env.bindings().begin(), env.bindings().end());
    }

    const GuardConjecture& c_;
    const World& w_;
    std::vector<const Symbol*> vars_;
};

}  // namespace

Report check_conjectures(const std::vector<GuardConjecture>& cs, const Domains& domains, const World& w,
                         std::size_t max_envs) {
    Report report;
    for (std::size_t ci = 0; ci < cs.size(); ++ci) {
        ConjectureChecker checker(cs[ci], w);
        std::vector<const std::vector<Value>*> doms;
        for (const Symbol* v : checker.vars()) {
            auto it = domains.find(v);
            if (it == domains.end())
                throw Error(ErrorKind::DomainMissing, "no domain given for variable " + v->name, {Value::symbol(v)});
            doms.push_back(&it->second);
        }
        ConjectureResult r;
        r.index = ci + 1;
        r.cls = cs[ci].cls;

        // Total number of environments, saturating.
        std::size_t total = 1;
        bool overflow = false;
        for (const auto* d : doms) {
            if (d->empty()) {
                total = 0;
                break;
            }
            if (total > SIZE_MAX / d->size()) overflow = true;
            else total *= d->size();
        }
        const bool sample = max_envs != 0 && (overflow || total > max_envs);
        const std::size_t count = sample ? max_envs : total;
        std::mt19937_64 rng(0x5eed);
        std::vector<std::size_t> digits(doms.size(), 0);
        for (std::size_t n = 0; n < count; ++n) {
            if (sample) {
                for (std::size_t i = 0; i < doms.size(); ++i) digits[i] = rng() % doms[i]->size();
            }
            Environment env;
            for (std::size_t i = 0; i < doms.size(); ++i) env.bind(checker.vars()[i], (*doms[i])[digits[i]]);
            if (!checker.check(env, r)) break;
            if (!sample) {
                // Advance the mixed-radix counter, last variable fastest.
                for (std::size_t i = doms.size(); i-- > 0;) {
                    if (++digits[i] < doms[i]->size()) break;
                    digits[i] = 0;
                }
            }
        }
        report.results.push_back(std::move(r));
    }
    return report;
}

const std::vector<Value>& default_domain() {
    static const std::vector<Value> values = [] {
        std::vector<Value> v;
        for (int i = -3; i <= 6; ++i) v.push_back(Value::integer(i));
        v.push_back(Value());
        v.push_back(Value::t());
        v.push_back(list({Value::integer(1), Value::integer(2), Value::integer(3)}));
        v.push_back(list({Value::integer(3), Value::integer(-1)}));
        v.push_back(list({Value::symbol("A"), Value::symbol("B")}));
        v.push_back(list({list({Value::integer(1), Value::integer(2)}), list({Value::integer(3)})}));
        return v;
    }();
    return values;
}

namespace {

void collect_loops(const Term& t, std::vector<const LoopSpec*>& out);

void collect_loops_in_spec(const LoopSpec& spec, std::vector<const LoopSpec*>& out) {
    for (const TermPtr& t : loop_terms(spec, true)) collect_loops(*t, out);
}

void collect_loops(const Term& t, std::vector<const LoopSpec*>& out) {
    switch (t.kind) {
    case TermKind::Const:
    case TermKind::Var: return;
    case TermKind::Call:
    case TermKind::If:
        for (const auto& a : t.args) collect_loops(*a, out);
        return;
    case TermKind::Let:
        for (const auto& a : t.args) collect_loops(*a, out);
        collect_loops(*t.body, out);
        return;
    case TermKind::Lambda:
        if (t.lambda->guard) collect_loops(*t.lambda->guard, out);
        collect_loops(*t.lambda->body, out);
        return;
    case TermKind::Loop:
        out.push_back(t.loop->spec.get());
        collect_loops_in_spec(*t.loop->spec, out);
        return;
    }
}

}  // namespace

std::vector<const LoopSpec*> loops_in(const Term& t) {
    std::vector<const LoopSpec*> out;
    collect_loops(t, out);
    return out;
}

std::vector<GuardConjecture> definition_conjectures(const Definition& def, const World& w) {
    std::vector<GuardConjecture> out;
    for (const LoopSpec* spec : loops_in(*def.body)) {
        auto cs = generate_guard_conjectures(*spec, def.guard, w);
        out.insert(out.end(), cs.begin(), cs.end());
    }
    return out;
}

GuardVerification verify_definition_guards(const Definition& def, const World& w) {
    constexpr std::size_t kMaxEnvs = 20000;
    GuardVerification v;
    for (const Symbol* f : called_functions(*def.body)) {
        if (f == def.name) continue;
        const Definition* callee = w.find(f);
        if (callee == nullptr || !callee->guard_verified) {
            v.note = "callee " + f->name + " is not guard-verified";
            return v;
        }
    }
    auto cs = definition_conjectures(def, w);
    if (cs.empty()) {
        v.verified = true;
        v.note = "no loop$ guard conjectures";
        return v;
    }
    Domains domains;
    for (const auto& c : cs) {
        for (const auto& h : c.hyps)
            for (const Symbol* s : free_vars(*h)) domains.emplace(s, default_domain());
        for (const Symbol* s : free_vars(*c.concl)) domains.emplace(s, default_domain());
    }
    Report r = check_conjectures(cs, domains, w, kMaxEnvs);
    for (const auto& res : r.results) {
        if (!res.pass) {
            v.note = "conjecture " + std::to_string(res.index) + " failed: " + print_sexpr(r.to_sexprs()[res.index - 1]);
            return v;
        }
    }
    v.verified = true;
    v.note = "bounded check of " + std::to_string(cs.size()) +
             " conjectures passed over integers -3..6, NIL, T and four small lists per variable";
    return v;
}

}  // namespace loopd
