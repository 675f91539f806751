#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace loopd;
using namespace loopd::testkit;

namespace {

// Drops (DECLARE (IGNORABLE ...)) forms, which the displayed translations
// leave out.
Value without_ignorable(const Value& v) {
    if (!v.is_pair()) return v;
    std::vector<Value> out;
    const Value* p = &v;
    for (; p->is_pair(); p = &p->cdr()) {
        const Value& e = p->car();
        if (e.is_pair() && e.car().is(S("DECLARE")) && e.cdr().is_pair() && e.cdr().car().is_pair() &&
            e.cdr().car().car().is(S("IGNORABLE")))
            continue;
        out.push_back(without_ignorable(e));
    }
    Value tail = *p;
    Value r = tail;
    for (auto it = out.rbegin(); it != out.rend(); ++it) r = cons(*it, r);
    return r;
}

}  // namespace

TEST_CASE("plain translation: sum of squares") {
    ScionCall sc = translate_loop(loop_of("(LOOP$ FOR X IN LST SUM (* X X))", {S("LST")}));
    CHECK(sc.op == LoopOp::Sum);
    CHECK_FALSE(sc.fancy);
    REQUIRE(sc.body.lambda != nullptr);
    REQUIRE(sc.body.lambda->formals.size() == 1);
    CHECK(sc.body.lambda->formals[0] == S("X"));
    CHECK(pr(term_to_sexpr(*sc.body.lambda->body)) == "(BINARY-* X X)");
    CHECK(sc.target.kind == TargetExpr::Kind::List);
    CHECK(pr(term_to_sexpr(*sc.target.lst)) == "LST");
    CHECK(pr(untranslate(sc)) == "(SUM$ (LAMBDA$ (X) (* X X)) LST)");
    CHECK(pr(scion_to_sexpr(sc)) == "(SUM$ '(LAMBDA (X) (DECLARE (IGNORABLE X)) (BINARY-* X X)) LST)");
}

TEST_CASE("plain translation: until and when chain") {
    ScionCall sc = translate_loop(
        loop_of("(loop$ for i from 0 to 1000000 by 5 until (> i 30) when (evenp i) collect (* i i))"));
    CHECK(pr(without_ignorable(scion_to_sexpr(sc))) ==
          "(COLLECT$ '(LAMBDA (I) (BINARY-* I I)) (WHEN$ '(LAMBDA (I) (EVENP I)) "
          "(UNTIL$ '(LAMBDA (I) (< '30 I)) (FROM-TO-BY '0 '1000000 '5))))");
    CHECK(pr(untranslate(sc)) ==
          "(COLLECT$ (LAMBDA$ (I) (* I I)) (WHEN$ (LAMBDA$ (I) (EVENP I)) "
          "(UNTIL$ (LAMBDA$ (I) (< 30 I)) (FROM-TO-BY 0 1000000 5))))");
}

TEST_CASE("fancy translation: two targets and globals") {
    ScionCall sc = translate_loop(loop_of("(loop$ for x1 in lst1 as x2 in lst2 sum (* m n x1 x2))",
                                          {S("M"), S("N"), S("LST1"), S("LST2")}));
    CHECK(sc.fancy);
    CHECK(sc.op == LoopOp::Sum);
    REQUIRE(sc.globals.size() == 2);
    CHECK(pr(term_to_sexpr(*sc.globals[0])) == "M");
    CHECK(pr(term_to_sexpr(*sc.globals[1])) == "N");
    CHECK(sc.target.kind == TargetExpr::Kind::Zip);
    REQUIRE(sc.target.parts.size() == 2);
    REQUIRE(sc.body.lambda->formals.size() == 2);
    CHECK(sc.body.lambda->formals[0] == S("LOOP$-GVARS"));
    CHECK(sc.body.lambda->formals[1] == S("LOOP$-IVARS"));
    CHECK(pr(untranslate(*sc.body.lambda->body)) ==
          "(LET ((M (CAR LOOP$-GVARS)) (N (CAR (CDR LOOP$-GVARS))) (X1 (CAR LOOP$-IVARS)) "
          "(X2 (CAR (CDR LOOP$-IVARS)))) (* M N X1 X2))");
    std::string shown = pr(untranslate(sc));
    CHECK(shown.rfind("(SUM$+ (LAMBDA$ (LOOP$-GVARS LOOP$-IVARS) (DECLARE (XARGS :GUARD", 0) == 0);
    CHECK(shown.find("(LIST M N) (LOOP$-AS (LIST LST1 LST2)))") != std::string::npos);
}

TEST_CASE("fancy single-variable loops zip a singleton list") {
    ScionCall sc = translate_loop(loop_of("(loop$ for x on l collect (cons k x))", {S("L"), S("K")}));
    CHECK(sc.fancy);
    CHECK(sc.target.kind == TargetExpr::Kind::Zip);
    REQUIRE(sc.target.parts.size() == 1);
    CHECK(sc.target.parts[0].kind == TargetExpr::Kind::Tails);
    CHECK(pr(untranslate(sc)).find("(LOOP$-AS (LIST (TAILS L)))") != std::string::npos);
}

TEST_CASE("AS clauses without globals still get fancy lambdas") {
    ScionCall sc = translate_loop(loop_of("(loop$ for x in '(1 2) as y in '(3 4) collect (list x y))"));
    CHECK(sc.fancy);
    CHECK(sc.globals.empty());
    CHECK(pr(untranslate(sc)).find(" NIL (LOOP$-AS ") != std::string::npos);
}

TEST_CASE("fancy until and when lambdas share the body's signature") {
    ScionCall sc = translate_loop(
        loop_of("(loop$ for x in l as y in l until (< k x) when (evenp y) collect x)", {S("L"), S("K")}));
    REQUIRE(sc.until.has_value());
    REQUIRE(sc.when.has_value());
    CHECK(sc.until->lambda->formals == sc.body.lambda->formals);
    CHECK(sc.when->lambda->formals == sc.body.lambda->formals);
}

TEST_CASE("lambda guards come from of-type and :guard") {
    ScionCall sc = translate_loop(loop_of("(loop$ for i of-type integer from 1 to 3 sum :guard (< 0 i) i)"));
    REQUIRE(sc.body.lambda->guard != nullptr);
    CHECK(pr(untranslate(*sc.body.lambda->guard)) == "(AND (INTEGERP I) (< 0 I))");
    ScionCall none = translate_loop(loop_of("(loop$ for i from 1 to 3 sum i)"));
    CHECK(none.body.lambda->guard == nullptr);
}

TEST_CASE("untranslate: atomic targets are shown unchanged") {
    ScionCall sc = translate_loop(loop_of("(loop$ for x in '(a b) collect x)"));
    CHECK(pr(untranslate(sc)) == "(COLLECT$ (LAMBDA$ (X) X) '(A B))");
}

TEST_CASE("property: both renderings rebuild an equal scion call") {
    LoopGen gen(1234);
    World w = load(kRandomWorld);
    for (int i = 0; i < 1500; ++i) {
        std::string text = gen.loop();
        LoopSpec spec = parse_loop(rd(text), LoopGen::outer(), w);
        ScionCall sc = translate_loop(spec);
        Classification c = classify(spec);
        INFO(text);
        CHECK(sc.fancy == !c.plain);
        if (sc.fancy) CHECK(sc.globals.size() == c.globals.size());
        Value sugar = untranslate(sc);
        Value raw = scion_to_sexpr(sc);
        INFO(pr(sugar));
        REQUIRE(scion_call_equal(sc, scion_call_from_sexpr(sugar, LoopGen::outer(), w)));
        REQUIRE(scion_call_equal(sc, scion_call_from_sexpr(raw, LoopGen::outer(), w)));
    }
}

TEST_CASE("property: distinct loops are told apart by evaluation") {
    // Pairs of specs whose IR differs should, on some environment, give
    // different values; equal IR must always give equal values.
    LoopGen gen(8080);
    World w = load(kRandomWorld);
    std::vector<std::pair<std::string, ScionCall>> specs;
    for (int i = 0; i < 120; ++i) {
        std::string text = gen.loop();
        specs.emplace_back(text, translate_loop(parse_loop(rd(text), LoopGen::outer(), w)));
    }
    std::vector<Environment> envs;
    for (int i = 0; i < 12; ++i) envs.push_back(gen.env());
    auto run = [&](const ScionCall& sc, Environment env) -> std::string {
        EvalContext ctx = EvalContext::top_level();
        try {
            return pr(eval_loop_reference(sc, env, w, ctx));
        } catch (const Error& e) {
            return std::string("error ") + std::string(error_kind_name(e.kind()));
        }
    };
    int distinguished = 0, same_ir = 0;
    for (std::size_t i = 0; i < specs.size(); ++i)
        for (std::size_t j = i + 1; j < specs.size(); ++j) {
            bool differs = false;
            for (const Environment& e : envs)
                if (run(specs[i].second, e) != run(specs[j].second, e)) {
                    differs = true;
                    break;
                }
            if (scion_call_equal(specs[i].second, specs[j].second)) {
                ++same_ir;
                CHECK_FALSE(differs);
            } else if (differs) {
                ++distinguished;
            }
        }
    CHECK(distinguished > 5000);
    MESSAGE("distinguished pairs: " << distinguished << ", identical IR pairs: " << same_ir);
}
