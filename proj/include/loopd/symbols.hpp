#pragma once

#include "loopd/value.hpp"

namespace loopd::sym {

#define LOOPD_SYMBOL(fn, text)                   \
    inline const Symbol* fn() {                  \
        static const Symbol* const s = intern(text); \
        return s;                                \
    }

LOOPD_SYMBOL(binary_plus, "BINARY-+")
LOOPD_SYMBOL(binary_times, "BINARY-*")
LOOPD_SYMBOL(unary_minus, "UNARY--")
LOOPD_SYMBOL(less, "<")
LOOPD_SYMBOL(not_, "NOT")
LOOPD_SYMBOL(if_, "IF")
LOOPD_SYMBOL(let, "LET")
LOOPD_SYMBOL(cons, "CONS")
LOOPD_SYMBOL(car, "CAR")
LOOPD_SYMBOL(cdr, "CDR")
LOOPD_SYMBOL(list, "LIST")
LOOPD_SYMBOL(and_, "AND")
LOOPD_SYMBOL(or_, "OR")
LOOPD_SYMBOL(plus, "+")
LOOPD_SYMBOL(times, "*")
LOOPD_SYMBOL(minus, "-")
LOOPD_SYMBOL(greater, ">")
LOOPD_SYMBOL(less_eq, "<=")
LOOPD_SYMBOL(greater_eq, ">=")
LOOPD_SYMBOL(lambda, "LAMBDA")
LOOPD_SYMBOL(lambda_dollar, "LAMBDA$")
LOOPD_SYMBOL(declare, "DECLARE")
LOOPD_SYMBOL(xargs, "XARGS")
LOOPD_SYMBOL(ignorable, "IGNORABLE")
LOOPD_SYMBOL(kw_guard, ":GUARD")
LOOPD_SYMBOL(kw_verify_guards, ":VERIFY-GUARDS")
LOOPD_SYMBOL(loop_dollar, "LOOP$")
LOOPD_SYMBOL(loop_gvars, "LOOP$-GVARS")
LOOPD_SYMBOL(loop_ivars, "LOOP$-IVARS")
LOOPD_SYMBOL(loop_as, "LOOP$-AS")
LOOPD_SYMBOL(from_to_by, "FROM-TO-BY")
LOOPD_SYMBOL(tails, "TAILS")
LOOPD_SYMBOL(integerp, "INTEGERP")
LOOPD_SYMBOL(rationalp, "RATIONALP")
LOOPD_SYMBOL(consp, "CONSP")
LOOPD_SYMBOL(true_listp, "TRUE-LISTP")
LOOPD_SYMBOL(len, "LEN")
LOOPD_SYMBOL(equal, "EQUAL")
LOOPD_SYMBOL(member_equal, "MEMBER-EQUAL")
LOOPD_SYMBOL(floor, "FLOOR")
LOOPD_SYMBOL(warrant, "WARRANT")
LOOPD_SYMBOL(defun, "DEFUN")
LOOPD_SYMBOL(defun_dollar, "DEFUN$")
LOOPD_SYMBOL(defwarrant, "DEFWARRANT")
LOOPD_SYMBOL(defconst, "DEFCONST")
LOOPD_SYMBOL(verify_guards, "VERIFY-GUARDS")
LOOPD_SYMBOL(top_level, "TOP-LEVEL")
LOOPD_SYMBOL(integer, "INTEGER")
LOOPD_SYMBOL(rational, "RATIONAL")
LOOPD_SYMBOL(star, "*")
LOOPD_SYMBOL(newv, "NEWV")
LOOPD_SYMBOL(implies, "IMPLIES")

#undef LOOPD_SYMBOL

}  // namespace loopd::sym
