#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace loopd;
using namespace loopd::testkit;

namespace {

ErrorKind parse_error(std::string_view text, const SymbolSet& outer = {}) {
    try {
        loop_of(text, outer);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("parsed without error: " << text);
    return ErrorKind::EvaluationError;
}

std::vector<std::string> names(const std::vector<const Symbol*>& syms) {
    std::vector<std::string> out;
    for (const Symbol* s : syms) out.push_back(s->name);
    return out;
}

}  // namespace

TEST_CASE("parse: sum of squares") {
    LoopSpec s = loop_of("(LOOP$ FOR X IN '(1 2 3 4) SUM (* X X))");
    REQUIRE(s.iters.size() == 1);
    CHECK(s.iters[0].var == S("X"));
    CHECK_FALSE(s.iters[0].type.has_value());
    CHECK(s.iters[0].target.kind == TargetKind::In);
    CHECK(pr(term_to_sexpr(*s.iters[0].target.lst)) == "'(1 2 3 4)");
    CHECK(s.op == LoopOp::Sum);
    CHECK(pr(term_to_sexpr(*s.body)) == "(BINARY-* X X)");
    CHECK_FALSE(s.until.has_value());
    CHECK_FALSE(s.when.has_value());
}

TEST_CASE("parse: the five-clause loop") {
    LoopSpec s = loop_of(
        "(LOOP$ FOR I OF-TYPE INTEGER FROM 0 TO 1000000 BY 5 UNTIL (> I 30) WHEN (EVENP I) COLLECT (* I I))");
    REQUIRE(s.iters.size() == 1);
    const IterClause& ic = s.iters[0];
    REQUIRE(ic.type.has_value());
    CHECK(ic.type->kind == TypeSpec::Kind::Integer);
    CHECK(ic.target.kind == TargetKind::FromToBy);
    CHECK(ic.target.by_given);
    CHECK(pr(term_to_sexpr(*ic.target.lo)) == "'0");
    CHECK(pr(term_to_sexpr(*ic.target.hi)) == "'1000000");
    CHECK(pr(term_to_sexpr(*ic.target.by)) == "'5");
    REQUIRE(s.until.has_value());
    CHECK(pr(term_to_sexpr(*s.until->test)) == "(< '30 I)");
    REQUIRE(s.when.has_value());
    CHECK(pr(term_to_sexpr(*s.when->test)) == "(EVENP I)");
    CHECK(s.op == LoopOp::Collect);
    CHECK(pr(term_to_sexpr(*s.body)) == "(BINARY-* I I)");
}

TEST_CASE("parse: defaults and guards") {
    LoopSpec s = loop_of("(loop$ for i from lo to hi sum :guard (integerp i) (* 2 i))", {S("LO"), S("HI")});
    CHECK_FALSE(s.iters[0].target.by_given);
    CHECK(pr(term_to_sexpr(*s.iters[0].target.by)) == "'1");
    REQUIRE(s.body_guard != nullptr);
    CHECK(pr(term_to_sexpr(*s.body_guard)) == "(INTEGERP I)");

    LoopSpec u = loop_of("(loop$ for x in l until :guard (consp x) (car x) collect x)", {S("L")});
    REQUIRE(u.until.has_value());
    REQUIRE(u.until->guard != nullptr);
    CHECK(pr(term_to_sexpr(*u.until->guard)) == "(CONSP X)");

    LoopSpec t = loop_of("(loop$ for x of-type (integer 0 *) on l always t)", {S("L")});
    REQUIRE(t.iters[0].type.has_value());
    CHECK(t.iters[0].type->kind == TypeSpec::Kind::IntegerRange);
    CHECK(t.iters[0].target.kind == TargetKind::On);
    CHECK(pr(t.iters[0].type->to_sexpr()) == "(INTEGER 0 *)");
}

TEST_CASE("parse errors") {
    CHECK(parse_error("(LOOP$ FOR X IN L WHEN (EVENP X) ALWAYS X)", {S("L")}) == ErrorKind::WhenWithAlwaysOrThereis);
    CHECK(parse_error("(LOOP$ FOR X IN L AS X IN L SUM X)", {S("L")}) == ErrorKind::DuplicateIterVar);
    CHECK(parse_error("(LOOP$ FOR X IN L MAXIMIZE X)", {S("L")}) == ErrorKind::UnknownLoopOperator);
    CHECK(parse_error("(LOOP$ FOR X IN L SUM)", {S("L")}) == ErrorKind::MissingBody);
    CHECK(parse_error("(LOOP$ FOR X OF-TYPE STRING IN L SUM X)", {S("L")}) == ErrorKind::MalformedOfType);
    CHECK(parse_error("(LOOP$ FOR X ACROSS L SUM X)", {S("L")}) == ErrorKind::MalformedTarget);
    CHECK(parse_error("(LOOP$ FOR X IN L AS Y IN X SUM Y)", {S("L")}) == ErrorKind::MalformedTarget);
    CHECK(parse_error("(LOOP$ FOR X FROM 1 TO X SUM X)") == ErrorKind::MalformedTarget);
    CHECK(parse_error("(LOOP$ FOR I FROM 1 DOWNTO 0 SUM I)") == ErrorKind::MalformedTarget);
    CHECK(parse_error("(LOOP$ FOR X IN L SUM (* X Q))", {S("L")}) == ErrorKind::UnboundVariable);
    CHECK(parse_error("(LOOP$ FOR X IN L WHEN (EVENP X) UNTIL (ODDP X) SUM X)", {S("L")}) == ErrorKind::MalformedLoop);
    CHECK(parse_error("(LOOP$ FOR X IN L SUM X EXTRA)", {S("L")}) == ErrorKind::MalformedLoop);
}

TEST_CASE("free_vars") {
    auto fv = [](std::string_view text, const SymbolSet& bound) {
        return names(free_vars(*translate_term(rd(text), bound, World())));
    };
    CHECK(fv("(* x x)", {S("X")}) == std::vector<std::string>{"X"});
    CHECK(fv("(* m n x1 x2)", {S("M"), S("N"), S("X1"), S("X2")}) ==
          std::vector<std::string>{"M", "N", "X1", "X2"});
    CHECK(fv("5", {}).empty());
    CHECK(fv("(let ((a x)) (+ a y))", {S("X"), S("Y")}) == std::vector<std::string>{"X", "Y"});
}

TEST_CASE("classify") {
    CHECK(classify(loop_of("(loop$ for x in lst sum (* x x))", {S("LST")})).plain);

    Classification g = classify(
        loop_of("(loop$ for x1 in lst1 as x2 in lst2 sum (* m n x1 x2))", {S("M"), S("N"), S("LST1"), S("LST2")}));
    CHECK_FALSE(g.plain);
    CHECK(names(g.globals) == std::vector<std::string>{"M", "N"});

    Classification k = classify(loop_of("(loop$ for x in l collect (+ x k))", {S("L"), S("K")}));
    CHECK_FALSE(k.plain);
    CHECK(names(k.globals) == std::vector<std::string>{"K"});

    // Target variables are not globals: the target is evaluated outside the lambda.
    CHECK(classify(loop_of("(loop$ for i from lo to hi collect i)", {S("LO"), S("HI")})).plain);

    Classification u = classify(loop_of("(loop$ for x in l until (< k x) collect x)", {S("L"), S("K")}));
    CHECK_FALSE(u.plain);
    CHECK(names(u.globals) == std::vector<std::string>{"K"});

    // A body :GUARD lives in the lambda, so its variables count too.
    Classification gg = classify(loop_of("(loop$ for x in l collect :guard (< x k) x)", {S("L"), S("K")}));
    CHECK(names(gg.globals) == std::vector<std::string>{"K"});
}

TEST_CASE("type specs") {
    CHECK(parse_type_spec(rd("integer")).holds(Value::integer(-3)));
    CHECK_FALSE(parse_type_spec(rd("integer")).holds(Value::symbol("A")));
    CHECK(parse_type_spec(rd("rational")).holds(Value::integer(2)));
    CHECK(parse_type_spec(rd("cons")).holds(rd("(1)")));
    CHECK_FALSE(parse_type_spec(rd("cons")).holds(Value()));
    CHECK(parse_type_spec(rd("t")).holds(Value()));
    TypeSpec r = parse_type_spec(rd("(integer 0 12)"));
    CHECK(r.holds(Value::integer(0)));
    CHECK(r.holds(Value::integer(12)));
    CHECK_FALSE(r.holds(Value::integer(13)));
    CHECK_FALSE(r.holds(Value::integer(-1)));
    CHECK(parse_type_spec(rd("(integer * 3)")).holds(Value::integer(-1000)));
}

TEST_CASE("property: reprinting a spec reparses to an equal spec") {
    LoopGen gen(314159);
    World w = load(kRandomWorld);
    for (int i = 0; i < 1500; ++i) {
        std::string text = gen.loop();
        LoopSpec a = parse_loop(rd(text), LoopGen::outer(), w);
        Value printed = loop_to_sexpr(a);
        INFO(text);
        INFO(pr(printed));
        LoopSpec b = parse_loop(printed, LoopGen::outer(), w);
        REQUIRE(loop_spec_equal(a, b));
        CHECK(pr(loop_to_sexpr(b)) == pr(printed));
    }
}

TEST_CASE("property: plain specs never mention the globals variable") {
    LoopGen gen(27);
    World w = load(kRandomWorld);
    int plain = 0;
    for (int i = 0; i < 1500; ++i) {
        LoopSpec s = parse_loop(rd(gen.loop()), LoopGen::outer(), w);
        if (!classify(s).plain) continue;
        ++plain;
        std::string ir = pr(scion_to_sexpr(translate_loop(s)));
        CHECK(ir.find("LOOP$-GVARS") == std::string::npos);
        CHECK(ir.find("LOOP$-IVARS") == std::string::npos);
    }
    CHECK(plain > 100);
}
