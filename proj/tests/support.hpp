#pragma once

// Shared helpers for the test binaries: quick read/eval wrappers and the
// random loop$ generator used by the differential tests.

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "loopd/fastpath.hpp"
#include "loopd/kernel.hpp"
#include "loopd/loop_syntax.hpp"
#include "loopd/scions.hpp"
#include "loopd/sexpr.hpp"
#include "loopd/translate.hpp"

namespace loopd::testkit {

inline Value rd(std::string_view text) { return parse(text); }
inline std::string pr(const Value& v) { return print_sexpr(v); }
inline const Symbol* S(std::string_view name) { return intern(name); }

inline World load(std::string_view text, World w = World()) {
    for (const Value& form : read_all(text)) w = define(form, w);
    return w;
}

inline Value eval_in(const World& w, std::string_view text, EvalContext& ctx, Environment env = {}) {
    SymbolSet bound;
    for (const auto& b : env.bindings()) bound.insert(b.first);
    TermPtr t = translate_term(rd(text), bound, w);
    return eval_term(*t, env, w, ctx);
}

inline Value eval_top(const World& w, std::string_view text, Environment env = {}) {
    EvalContext ctx = EvalContext::top_level();
    return eval_in(w, text, ctx, std::move(env));
}

inline LoopSpec loop_of(std::string_view text, const SymbolSet& outer = {}, const World& w = World()) {
    return parse_loop(rd(text), outer, w);
}

/// Both functions are warranted; SQ has an INTEGERP guard, INC none.
inline const char* kRandomWorld = R"(
  (defun$ sq (n) (declare (xargs :guard (integerp n))) (* n n))
  (defun$ inc (n) (+ n 1))
)";

struct GenInfo {
    LoopOp op = LoopOp::Collect;
    std::set<TargetKind> kinds;
    bool has_until = false;
    bool has_when = false;
    bool as_clause = false;
};

/// Random loop$ source text over globals K, M (integers) and L, L2 (lists).
class LoopGen {
public:
    explicit LoopGen(std::uint64_t seed) : rng_(seed) {}

    static SymbolSet outer() { return {S("K"), S("M"), S("L"), S("L2")}; }

    std::string loop(GenInfo* info = nullptr) {
        GenInfo g;
        vars_.clear();
        std::string out = "(LOOP$";
        const int n = pick(0, 9) < 7 ? 1 : pick(2, 3);
        g.as_clause = n > 1;
        static const char* names[] = {"X", "Y", "Z"};
        for (int i = 0; i < n; ++i) {
            out += i == 0 ? " FOR " : " AS ";
            Var v{names[i], false};
            const int k = pick(0, 2);
            std::string type;
            std::string target;
            if (k == 0) {
                g.kinds.insert(TargetKind::In);
                target = " IN " + list_source();
                if (pick(0, 5) == 0) type = " OF-TYPE T";
            } else if (k == 1) {
                g.kinds.insert(TargetKind::On);
                v.list = true;
                target = " ON " + list_source();
                if (pick(0, 5) == 0) type = " OF-TYPE T";
            } else {
                g.kinds.insert(TargetKind::FromToBy);
                target = " FROM " + bound_source() + " TO " + bound_source();
                if (pick(0, 1) == 0) target += " BY " + std::to_string(pick(1, 3));
                if (pick(0, 2) == 0) type = " OF-TYPE INTEGER";
            }
            out += v.name + type + target;
            vars_.push_back(v);
        }
        g.op = static_cast<LoopOp>(pick(0, 4));
        if (pick(0, 2) == 0) {
            g.has_until = true;
            out += " UNTIL " + bool_term(2);
        }
        if (g.op != LoopOp::Always && g.op != LoopOp::Thereis && pick(0, 2) == 0) {
            g.has_when = true;
            out += " WHEN " + bool_term(2);
        }
        out += std::string(" ") + loop_op_name(g.op) + " ";
        switch (g.op) {
        case LoopOp::Sum: out += int_term(3); break;
        case LoopOp::Collect: out += pick(0, 3) == 0 ? list_term(2) : int_term(3); break;
        case LoopOp::Append: out += list_term(2); break;
        case LoopOp::Always: out += bool_term(3); break;
        case LoopOp::Thereis: out += pick(0, 1) == 0 ? bool_term(3) : maybe_int(3); break;
        }
        out += ")";
        if (info != nullptr) *info = g;
        return out;
    }

    Environment env() {
        Environment e;
        e.bind(S("K"), Value::integer(pick(-3, 5)));
        e.bind(S("M"), Value::integer(pick(-3, 5)));
        e.bind(S("L"), random_list());
        e.bind(S("L2"), random_list());
        return e;
    }

    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

private:
    struct Var {
        std::string name;
        bool list;
    };

    Value random_list() {
        std::vector<Value> xs;
        const int n = pick(0, 7);
        for (int i = 0; i < n; ++i) {
            // Mostly integers, with the odd symbol to exercise the fixing
            // behaviour of arithmetic.
            xs.push_back(pick(0, 12) == 0 ? Value::symbol("A") : Value::integer(pick(-4, 9)));
        }
        return list_from(xs);
    }

    std::string list_source() {
        switch (pick(0, 3)) {
        case 0: return "L";
        case 1: return "L2";
        case 2: return "(CDR L)";
        default: {
            std::string s = "'(";
            const int n = pick(0, 5);
            for (int i = 0; i < n; ++i) s += (i ? " " : "") + std::to_string(pick(-3, 7));
            return s + ")";
        }
        }
    }

    std::string bound_source() {
        switch (pick(0, 3)) {
        case 0: return "K";
        case 1: return "(+ M 3)";
        default: return std::to_string(pick(-4, 8));
        }
    }

    std::string int_var() {
        std::vector<std::string> ok{"K", "M"};
        for (const Var& v : vars_)
            if (!v.list) ok.push_back(v.name);
        // Iteration variables are preferred so most loops are plain.
        std::vector<std::string> iter;
        for (const Var& v : vars_)
            if (!v.list) iter.push_back(v.name);
        if (!iter.empty() && pick(0, 3) != 0) return iter[pick(0, static_cast<int>(iter.size()) - 1)];
        return ok[pick(0, static_cast<int>(ok.size()) - 1)];
    }

    std::string list_var() {
        std::vector<std::string> ok;
        for (const Var& v : vars_)
            if (v.list) ok.push_back(v.name);
        if (ok.empty() || pick(0, 4) == 0) return "L";
        return ok[pick(0, static_cast<int>(ok.size()) - 1)];
    }

    std::string int_term(int d) {
        const int c = d <= 0 ? pick(0, 1) : pick(0, 11);
        switch (c) {
        case 0: return std::to_string(pick(-3, 5));
        case 1: return int_var();
        case 2: return "(+ " + int_term(d - 1) + " " + int_term(d - 1) + ")";
        case 3: return "(* " + int_term(d - 1) + " " + int_term(d - 1) + ")";
        case 4: return "(- " + int_term(d - 1) + " " + int_term(d - 1) + ")";
        case 5: return "(IF " + bool_term(d - 1) + " " + int_term(d - 1) + " " + int_term(d - 1) + ")";
        case 6: return "(SQ " + int_term(d - 1) + ")";
        case 7: return "(LEN " + list_var() + ")";
        case 8: return "(CAR " + list_var() + ")";
        case 9: return "(MOD " + int_term(d - 1) + " 3)";
        case 10: return "(INC " + int_term(d - 1) + ")";
        default: return "(- " + int_term(d - 1) + ")";
        }
    }

    std::string maybe_int(int d) { return "(IF " + bool_term(d - 1) + " " + int_term(d - 1) + " NIL)"; }

    std::string bool_term(int d) {
        const int c = d <= 0 ? pick(0, 1) : pick(0, 7);
        switch (c) {
        case 0: return "(EVENP " + int_var() + ")";
        case 1: return "(< " + int_var() + " " + std::to_string(pick(-2, 6)) + ")";
        case 2: return "(NOT " + bool_term(d - 1) + ")";
        case 3: return "(EQUAL " + int_term(d - 1) + " " + int_term(d - 1) + ")";
        case 4: return "(CONSP " + list_var() + ")";
        case 5: return "(AND " + bool_term(d - 1) + " " + bool_term(d - 1) + ")";
        case 6: return "(OR " + bool_term(d - 1) + " " + bool_term(d - 1) + ")";
        default: return "(> " + int_term(d - 1) + " " + int_term(d - 1) + ")";
        }
    }

    std::string list_term(int d) {
        switch (pick(0, 4)) {
        case 0: return "(LIST " + int_term(d - 1) + " " + int_term(d - 1) + ")";
        case 1: return list_var();
        case 2: return "(IF " + bool_term(d - 1) + " (LIST " + int_term(d - 1) + ") NIL)";
        case 3: return "(CONS " + int_term(d - 1) + " " + list_var() + ")";
        default: return "(REVERSE " + list_var() + ")";
        }
    }

    std::mt19937_64 rng_;
    std::vector<Var> vars_;
};

struct Outcome {
    bool ok = false;
    Value value;
    std::string error;
};

inline Outcome reference_outcome(const LoopSpec& spec, Environment env, const World& w) {
    EvalContext ctx = EvalContext::top_level();
    try {
        return {true, eval_loop_reference(translate_loop(spec), env, w, ctx), {}};
    } catch (const Error& e) {
        return {false, Value(), std::string(error_kind_name(e.kind()))};
    }
}

inline Outcome fast_outcome(const LoopSpec& spec, Environment env, const World& w,
                            ExecMode mode = ExecMode::Trusted) {
    try {
        return {true, eval_loop_fast(spec, env, w, mode), {}};
    } catch (const Error& e) {
        return {false, Value(), std::string(error_kind_name(e.kind()))};
    }
}

}  // namespace loopd::testkit
