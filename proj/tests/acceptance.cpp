// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "loopd/guards.hpp"
#include "loopd/session.hpp"
#include "support.hpp"

using namespace loopd;
using namespace loopd::testkit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const char* kSquareWorld = R"(
  (defun$ square (n) (declare (xargs :guard (integerp n))) (* n n))
  (defun f2 (lower upper)
    (declare (xargs :guard (and (integerp lower) (integerp upper))))
    (loop$ for i of-type integer from lower to upper collect (square i)))
  (defun sum-squares-2 (lower upper)
    (declare (xargs :guard (and (integerp lower) (integerp upper))))
    (loop$ for i of-type integer from lower to upper sum (square i)))
)";

struct Check {
    bool ok = true;
    std::ostringstream why;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            if (!ok) why << "; ";
            why << what;
            ok = false;
        }
    }
};

Value both_paths(Check& c, std::string_view text, const World& w, const std::string& expected) {
    LoopSpec spec = loop_of(text, {}, w);
    Environment env;
    EvalContext ctx = EvalContext::top_level();
    Value ref = eval_loop_reference(translate_loop(spec), env, w, ctx);
    Value fast = eval_loop_fast(spec, env, w, ExecMode::Trusted);
    c.expect(pr(ref) == expected, std::string(text) + " reference gave " + pr(ref));
    c.expect(pr(fast) == expected, std::string(text) + " fast gave " + pr(fast));
    return ref;
}

Check golden() {
    Check c;
    World w = load(kSquareWorld);
    both_paths(c, "(LOOP$ FOR X IN '(1 2 3 4) SUM (* X X))", w, "30");
    both_paths(c, "(loop$ for i of-type integer from 0 to 1000000 by 5 until (> i 30) when (evenp i) collect (* i i))",
               w, "(0 100 400 900)");
    both_paths(c, "(LOOP$ FOR I FROM 1 TO 5 COLLECT (* I I))", w, "(1 4 9 16 25)");

    const Definition* f2 = w.find(S("F2"));
    std::vector<Value> args{Value::integer(3), Value::integer(5)};
    EvalContext top = EvalContext::top_level();
    c.expect(pr(call_definition(*f2, args, w, top)) == "(9 16 25)", "(F2 3 5)");

    c.expect(pr(loop_as(rd("((1 2 3 4 A B C) (5 6 7 8))"))) == "((1 5) (2 6) (3 7) (4 8))", "loop$-as");

    const Definition* ss = w.find(S("SUM-SQUARES-2"));
    std::vector<Value> bounds{Value::integer(1), Value::integer(4)};
    EvalContext with = EvalContext::proof({S("SQUARE")});
    c.expect(pr(call_definition(*ss, bounds, w, with)) == "30", "(SUM-SQUARES-2 1 4) with the warrant");
    EvalContext without = EvalContext::proof({});
    bool forced = false;
    try {
        call_definition(*ss, bounds, w, without);
    } catch (const Error& e) {
        forced = e.kind() == ErrorKind::ForcedWarrant && !e.details().empty() && e.details()[0].is(S("SQUARE"));
    }
    c.expect(forced, "(SUM-SQUARES-2 1 4) without the warrant did not force SQUARE");
    return c;
}

Check conjecture_fidelity() {
    Check c;
    World w = load(kSquareWorld);
    const SymbolSet outer{S("LOWER"), S("UPPER")};
    LoopSpec spec = loop_of("(loop$ for i of-type integer from lower to upper collect (square i))", outer, w);
    TermPtr ctx_guard = translate_term(rd("(and (integerp lower) (integerp upper))"), outer, w);
    std::vector<GuardConjecture> cs = generate_guard_conjectures(spec, ctx_guard, w);
    c.expect(!cs.empty() && cs[0].cls == ConjectureClass::A, "no class (a) conjecture");
    if (!c.ok) return c;
    const char* expected =
        "(IMPLIES (AND (INTEGERP LOWER) (INTEGERP UPPER) (APPLY$-WARRANT-SQUARE)"
        " (MEMBER-EQUAL NEWV (FROM-TO-BY LOWER UPPER 1))) (INTEGERP NEWV))";
    c.expect(equal(conjecture_to_sexpr(cs[0]), rd(expected)), "got " + pr(conjecture_to_sexpr(cs[0])));

    Domains d;
    for (long i = -2; i <= 6; ++i) {
        d[S("LOWER")].push_back(Value::integer(i));
        d[S("UPPER")].push_back(Value::integer(i));
    }
    auto t0 = Clock::now();
    Report r = check_conjectures(cs, d, w);
    double secs = seconds_since(t0);
    c.expect(r.all_pass(), "bounded check failed");
    c.expect(!r.results.empty() && r.results[0].instances == 81, "sweep was not exhaustive");
    c.expect(secs < 5.0, "check took " + std::to_string(secs) + " s");
    c.why << (c.ok ? "" : "; ") << "check " << static_cast<int>(secs * 1000) << " ms";
    return c;
}

Check class_c_boundary() {
    Check c;
    World w;
    LoopSpec spec = loop_of("(loop$ for i of-type (integer 0 12) from 1 to 10 by 3 collect i)", {}, w);
    std::vector<GuardConjecture> cs = generate_guard_conjectures(spec, make_const(Value::t()), w);
    // i + k*floor((j-i)/k) + k with i=1, j=10, k=3
    const long past = 1 + 3 * ((10 - 1) / 3) + 3;
    c.expect(past == 13, "oracle arithmetic");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        std::string concl = pr(untranslate(*cs[i].concl));
        if (cs[i].cls == ConjectureClass::C && concl.find("(FLOOR (- 10 1) 3)") != std::string::npos) idx = i + 1;
    }
    c.expect(idx != 0, "no class (c) conjecture for the step past the range");
    Report r = check_conjectures(cs, {}, w);
    bool failed_there = false;
    for (const ConjectureResult& res : r.results)
        if (res.index == idx && !res.pass) failed_there = true;
    c.expect(failed_there, "checker did not report the failure");
    int fails = 0;
    for (const ConjectureResult& res : r.results) fails += !res.pass;
    c.expect(fails == 1, "unexpected number of failures: " + std::to_string(fails));
    // The same check, evaluated directly: 13 is outside (INTEGER 0 12).
    c.expect(!parse_type_spec(rd("(integer 0 12)")).holds(Value::integer(past)), "13 satisfies the type");
    return c;
}

Check differential() {
    Check c;
    auto t0 = Clock::now();
    LoopGen gen(20250101);
    World w = load(kRandomWorld);
    std::map<LoopOp, int> ops;
    std::map<TargetKind, int> kinds;
    int fancy = 0, plain = 0, untils = 0, whens = 0, agree = 0, specs = 0;
    for (; specs < 1500 && c.ok; ++specs) {
        GenInfo info;
        std::string text = gen.loop(&info);
        LoopSpec spec = parse_loop(rd(text), LoopGen::outer(), w);
        ++ops[info.op];
        for (TargetKind k : info.kinds) ++kinds[k];
        classify(spec).plain ? ++plain : ++fancy;
        untils += info.has_until;
        whens += info.has_when;
        for (int e = 0; e < 4; ++e) {
            Environment env = gen.env();
            Outcome ref = reference_outcome(spec, env, w);
            Outcome fst = fast_outcome(spec, env, w);
            if (!ref.ok || !fst.ok) {
                c.expect(ref.ok == fst.ok, text + ": only one path failed");
                continue;
            }
            c.expect(equal(ref.value, fst.value), text + ": " + pr(ref.value) + " vs " + pr(fst.value));
            ++agree;
        }
    }
    double secs = seconds_since(t0);
    c.expect(ops.size() == 5 && kinds.size() == 3, "coverage of operators or target kinds");
    c.expect(fancy > 0 && plain > 0 && untils > 0 && whens > 0, "coverage of plain/fancy/UNTIL/WHEN");
    c.expect(secs < 60.0, "took " + std::to_string(secs) + " s");
    c.why << (c.ok ? "" : "; ") << specs << " specs, " << agree << " agreeing runs, " << plain << " plain, " << fancy
          << " fancy, " << static_cast<int>(secs * 1000) << " ms";
    return c;
}

Check scion_algebra() {
    Check c;
    std::mt19937 rng(1913);
    World w;
    EvalContext ctx = EvalContext::top_level();
    const char* fns[] = {"(LAMBDA (X) X)", "(LAMBDA (X) (BINARY-* X X))", "(LAMBDA (X) (IF (EVENP X) X 'NIL))",
                         "EVENP", "(LAMBDA (X) (< X '3))", "(LAMBDA (X) (CONS X 'NIL))"};
    auto random_list = [&] {
        std::vector<Value> xs;
        for (int n = static_cast<int>(rng() % 9); n > 0; --n)
            xs.push_back(rng() % 10 == 0 ? Value::symbol("Q") : Value::integer(static_cast<long>(rng() % 17) - 6));
        return list_from(xs);
    };
    int homo = 0, shape = 0;
    for (int i = 0; i < 600; ++i) {
        FnObject f = fn_from_value(rd(fns[rng() % std::size(fns)]), w);
        Value x = random_list(), y = random_list();
        Value lhs = plain_scion(ScionKind::Sum, f, reverse_onto(x, y), w, ctx);
        Value rhs = int_add(plain_scion(ScionKind::Sum, f, x, w, ctx), plain_scion(ScionKind::Sum, f, y, w, ctx));
        c.expect(equal(lhs, rhs), "revappend: " + pr(x) + " " + pr(y));
        ++homo;

        std::vector<Value> lst = list_to_vector(x);
        std::vector<Value> upto = list_to_vector(plain_scion(ScionKind::Until, f, x, w, ctx));
        std::vector<Value> kept = list_to_vector(plain_scion(ScionKind::When, f, x, w, ctx));
        Value all = plain_scion(ScionKind::Collect, f, x, w, ctx);
        bool prefix = upto.size() <= lst.size();
        for (std::size_t k = 0; prefix && k < upto.size(); ++k) prefix = equal(upto[k], lst[k]);
        std::size_t m = 0;
        for (std::size_t k = 0; k < lst.size() && m < kept.size(); ++k)
            if (equal(kept[m], lst[k])) ++m;
        c.expect(prefix, "UNTIL$ prefix on " + pr(x));
        c.expect(m == kept.size(), "WHEN$ subsequence on " + pr(x));
        c.expect(length(all) == lst.size(), "COLLECT$ length on " + pr(x));
        ++shape;
    }
    c.why << (c.ok ? "" : "; ") << homo << " revappend cases, " << shape << " shape cases";
    return c;
}

Check ratio_check(const BenchResult& r, const std::string& expected, const char* label) {
    Check c;
    c.expect(pr(r.result) == expected, std::string(label) + " gave " + pr(r.result));
    double ratio = r.fast_ms > 0 ? r.reference_ms / r.fast_ms : 1e9;
    c.expect(r.reps >= 3, "fewer than 3 reps");
    c.expect(ratio >= 2.0, "ratio " + std::to_string(ratio));
    char buf[160];
    std::snprintf(buf, sizeof buf, "%sreference %.1f ms, fast %.1f ms, ratio %.2f over %d reps", c.ok ? "" : "; ",
                  r.reference_ms, r.fast_ms, ratio, r.reps);
    c.why << buf;
    return c;
}

Check doubles_bench() {
    World w = load("(defun$ double (x) (declare (xargs :guard (integerp x))) (* 2 x))");
    std::vector<Value> xs;
    const long n = 1000000;
    for (long i = 1; i <= n; ++i) xs.push_back(Value::integer(i));
    Environment env{{S("L"), list_from(xs)}};
    LoopSpec spec = loop_of("(loop$ for x of-type integer in l sum (double x))", {S("L")}, w);
    BenchResult r;
    try {
        r = bench(spec, env, w, 3);
    } catch (const Error& e) {
        Check c;
        c.expect(false, e.what());
        return c;
    }
    return ratio_check(r, std::to_string(n * (n + 1)), "sum of doubles");
}

Check range_bench() {
    World w;
    LoopSpec spec = loop_of("(loop$ for i from 1 to 10000000 sum i)", {}, w);
    Environment env;
    BenchResult r;
    try {
        r = bench(spec, env, w, 3);
    } catch (const Error& e) {
        Check c;
        c.expect(false, e.what());
        return c;
    }
    return ratio_check(r, "50000005000000", "range sum");
}

Check from_to_by_cube() {
    Check c;
    long cases = 0;
    for (long lo = -20; lo <= 20; ++lo)
        for (long hi = -20; hi <= 20; ++hi)
            for (long by = 1; by <= 20; ++by) {
                std::vector<Value> got =
                    list_to_vector(from_to_by(Value::integer(lo), Value::integer(hi), Value::integer(by)));
                std::vector<long> want;
                for (long k = 0; lo + k * by <= hi; ++k) want.push_back(lo + k * by);
                bool same = got.size() == want.size();
                for (std::size_t i = 0; same && i < got.size(); ++i)
                    same = got[i].is_fixnum() && got[i].fixnum() == want[i];
                c.expect(same, "(" + std::to_string(lo) + " " + std::to_string(hi) + " " + std::to_string(by) + ")");
                ++cases;
            }
    c.why << (c.ok ? "" : "; ") << cases << " triples";
    return c;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Check()>> criteria[] = {
        {"golden examples", golden},
        {"guard conjecture for f2", conjecture_fidelity},
        {"class (c) boundary at 13", class_c_boundary},
        {"differential equivalence", differential},
        {"scion algebra", scion_algebra},
        {"sum of DOUBLE over 10^6 elements", doubles_bench},
        {"FROM 1 TO 10^7 SUM", range_bench},
        {"from-to-by over [-20,20]^3", from_to_by_cube},
    };
    int failures = 0;
    int n = 0;
    for (const auto& [name, run] : criteria) {
        ++n;
        Check c;
        try {
            run_with_large_stack([&] {
                c = run();
                return 0;
            });
        } catch (const std::exception& e) {
            c.ok = false;
            c.why << "exception: " << e.what();
        }
        failures += !c.ok;
        std::printf("%s %d %s (%s)\n", c.ok ? "PASS" : "FAIL", n, name, c.why.str().c_str());
        std::fflush(stdout);
    }
    return failures;
}
