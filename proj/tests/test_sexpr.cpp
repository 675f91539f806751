#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace loopd;
using namespace loopd::testkit;

TEST_CASE("read_sexpr: proper list of integers") {
    Value v = rd("(1 2 3 4)");
    REQUIRE(v.is_pair());
    std::vector<Value> xs = list_to_vector(v);
    REQUIRE(xs.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(xs[i].fixnum() == i + 1);
    CHECK(is_true_list(v));
}

TEST_CASE("read_sexpr: NIL is the empty list") {
    CHECK(rd("NIL").is_nil());
    CHECK(rd("()").is_nil());
    CHECK(rd("nil").is_nil());
}

TEST_CASE("read_sexpr: quote sugar around a lambda") {
    Value v = rd("'(lambda (x) (sq x))");
    CHECK(equal(v, list({Value::symbol("QUOTE"), rd("(LAMBDA (X) (SQ X))")})));
    CHECK(equal(v, rd("(QUOTE (LAMBDA (X) (SQ X)))")));
    CHECK(pr(v) == "'(LAMBDA (X) (SQ X))");
}

TEST_CASE("read_sexpr returns the position after the form") {
    ReadResult r = read_sexpr("  (a b) c", 0);
    CHECK(pr(r.value) == "(A B)");
    CHECK(r.end == 7);
    ReadResult r2 = read_sexpr("  (a b) c", r.end);
    CHECK(pr(r2.value) == "C");
}

TEST_CASE("comments and whitespace are skipped") {
    std::vector<Value> forms = read_all("; header\n(a ; inner\n b)\n  7 ; tail");
    REQUIRE(forms.size() == 2);
    CHECK(pr(forms[0]) == "(A B)");
    CHECK(pr(forms[1]) == "7");
}

TEST_CASE("print_sexpr canonical forms") {
    CHECK(pr(list({Value::integer(0), Value::integer(100), Value::integer(400), Value::integer(900)})) ==
          "(0 100 400 900)");
    CHECK(pr(Value()) == "NIL");
    CHECK(pr(cons(Value::integer(1), Value::integer(2))) == "(1 . 2)");
    CHECK(pr(rd("(a (b . c) \"s\\\"q\" -5)")) == "(A (B . C) \"s\\\"q\" -5)");
}

TEST_CASE("big integers read and print exactly") {
    const char* big = "123456789012345678901234567890";
    CHECK(pr(rd(big)) == big);
    CHECK(pr(rd("-4611686018427387905")) == "-4611686018427387905");
    CHECK(pr(rd("4611686018427387903")) == "4611686018427387903");
}

TEST_CASE("reader errors carry positions") {
    SUBCASE("unbalanced") {
        try {
            rd("(a (b c)");
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::UnbalancedParen);
            REQUIRE(e.pos().has_value());
            CHECK(e.pos()->line == 1);
        }
    }
    SUBCASE("stray close") {
        try {
            rd("\n  )");
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::UnbalancedParen);
            REQUIRE(e.pos().has_value());
            CHECK(e.pos()->line == 2);
            CHECK(e.pos()->column == 3);
        }
    }
    SUBCASE("rationals are rejected") {
        CHECK_THROWS_AS(rd("11/2"), Error);
        try {
            rd("11/2");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::BadToken);
        }
    }
    SUBCASE("floats are rejected") { CHECK_THROWS_AS(rd("1.5"), Error); }
}

namespace {

Value random_sexpr(std::mt19937_64& rng, int depth) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const int c = depth <= 0 ? pick(0, 3) : pick(0, 6);
    switch (c) {
    case 0: return Value::integer(pick(-1000, 1000));
    case 1: {
        static const char* names[] = {"A", "FOO", "LOOP$", "BINARY-+", "NEWV", "T", "NIL", "*X*", ":GUARD", "<="};
        return Value::symbol(names[pick(0, 9)]);
    }
    case 2: {
        std::string s;
        const int n = pick(0, 5);
        for (int i = 0; i < n; ++i) s.push_back("ab \"\\;()"[pick(0, 7)]);
        return Value::string(s);
    }
    case 3: {
        mpz_class z = 1;
        for (int i = 0; i < pick(1, 4); ++i) z *= 1000000007;
        if (pick(0, 1)) z = -z;
        return Value::integer(z);
    }
    case 4: return cons(random_sexpr(rng, depth - 1), random_sexpr(rng, depth - 1));
    default: {
        std::vector<Value> xs;
        const int n = pick(0, 5);
        for (int i = 0; i < n; ++i) xs.push_back(random_sexpr(rng, depth - 1));
        return list_from(xs);
    }
    }
}

}  // namespace

TEST_CASE("property: print then read is the identity") {
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 3000; ++i) {
        Value v = random_sexpr(rng, 5);
        std::string text = pr(v);
        Value back = rd(text);
        INFO(text);
        REQUIRE(equal(v, back));
        CHECK(pr(back) == text);
        CHECK(text.find('\n') == std::string::npos);
    }
}

TEST_CASE("property: every prefix either reads or fails with a position") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        std::string text = pr(random_sexpr(rng, 4));
        for (std::size_t n = 0; n <= text.size(); ++n) {
            std::string prefix = text.substr(0, n);
            try {
                Reader r(prefix);
                while (r.next()) {
                }
            } catch (const Error& e) {
                CHECK(e.pos().has_value());
                CHECK((e.kind() == ErrorKind::UnbalancedParen || e.kind() == ErrorKind::BadToken));
            }
        }
    }
}
