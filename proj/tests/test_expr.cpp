#include <doctest.h>

#include "hjnet/expr.hpp"

using hjnet::Expr;

TEST_CASE("arithmetic and precedence") {
    Expr e = Expr::parse("1 + 2*3 - 4/2", {});
    CHECK(e.eval({}) == doctest::Approx(5.0));
    CHECK(Expr::parse("-(2+3)*2", {}).eval({}) == doctest::Approx(-10.0));
    CHECK(Expr::parse("2 - 3 - 4", {}).eval({}) == doctest::Approx(-5.0));
}

TEST_CASE("variables resolve to slots") {
    Expr e = Expr::parse("s*s/2 - t", {"s", "t"});
    CHECK(e.eval({3.0, 1.0}) == doctest::Approx(3.5));
    CHECK(e.depends_on("s"));
    CHECK(e.depends_on("t"));
    CHECK_FALSE(Expr::parse("1.5", {"s", "t"}).depends_on("t"));
}

TEST_CASE("functions") {
    CHECK(Expr::parse("sin(0) + cos(0)", {}).eval({}) == doctest::Approx(1.0));
    CHECK(Expr::parse("exp(1)", {}).eval({}) == doctest::Approx(2.718281828).epsilon(1e-9));
    CHECK(Expr::parse("min(2, 1+0.5)", {}).eval({}) == doctest::Approx(1.5));
    CHECK(Expr::parse("max(-1, -2)", {}).eval({}) == doctest::Approx(-1.0));
    CHECK(Expr::parse("cos(pi)", {}).eval({}) == doctest::Approx(-1.0));
}

TEST_CASE("errors") {
    CHECK_THROWS(Expr::parse("1 +", {}));
    CHECK_THROWS(Expr::parse("foo(2)", {}));
    CHECK_THROWS(Expr::parse("x + 1", {"s", "t"}));
    CHECK_THROWS(Expr::parse("min(1)", {}));
    CHECK_THROWS(Expr::parse("(1", {}));
}
