#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "fibertwist/expr.hpp"

using namespace fibertwist;

TEST_CASE("parses the twist formulas used in the experiments") {
    CHECK_NOTHROW(Expr::parse("3*z^2*cos(10*z)*log(z+1)"));
    CHECK_NOTHROW(Expr::parse("z"));
    CHECK_NOTHROW(Expr::parse("z*sin(100*z)*exp(3*z)"));
    CHECK_NOTHROW(Expr::parse("9*z^2*cos(100*z)*log(z+1)"));
}

TEST_CASE("evaluation basics") {
    CHECK(Expr::parse("3*z^2*cos(10*z)*log(z+1)").eval(0.0) == 0.0);
    CHECK(Expr::parse("z").eval(0.5) == 0.5);
    // 3 cos(10) log 2, value computed independently
    CHECK(Expr::parse("3*z^2*cos(10*z)*log(z+1)").eval(1.0) ==
          doctest::Approx(-1.7448001940023956).epsilon(1e-12));
}

TEST_CASE("precedence and associativity") {
    CHECK(Expr::parse("2+3*4").eval(0.0) == 14.0);
    CHECK(Expr::parse("2^3^2").eval(0.0) == 512.0); // right-associative
    CHECK(Expr::parse("2*3^2").eval(0.0) == 18.0);  // ^ binds tighter than *
    // unary binds before ^ in this grammar: (-2)^2
    CHECK(Expr::parse("-2^2").eval(0.0) == 4.0);
    CHECK(Expr::parse("6/3/2").eval(0.0) == 1.0); // left-associative
    CHECK(Expr::parse("1-2-3").eval(0.0) == -4.0);
}

TEST_CASE("integer powers of negative bases work") {
    CHECK(Expr::parse("z^3").eval(-2.0) == -8.0);
    CHECK(Expr::parse("z^-2").eval(2.0) == 0.25);
}

TEST_CASE("errors carry the right types") {
    CHECK_THROWS_AS(Expr::parse(""), SyntaxError);
    CHECK_THROWS_AS(Expr::parse("z+"), SyntaxError);
    CHECK_THROWS_AS(Expr::parse("(z"), SyntaxError);
    CHECK_THROWS_AS(Expr::parse("1 2"), SyntaxError);
    CHECK_THROWS_AS(Expr::parse("tan(z)"), UnknownFunctionError);
    CHECK_THROWS_AS(Expr::parse("z*y"), UnknownVariableError);
    CHECK_THROWS_AS(Expr::parse("log(z)").eval(0.0), DomainError);
    CHECK_THROWS_AS(Expr::parse("log(z)").eval(-1.0), DomainError);
    CHECK_THROWS_AS(Expr::parse("z^0.5").eval(-1.0), DomainError);
    CHECK_THROWS_AS(Expr::parse("1/z").eval(0.0), DomainError); // non-finite
}

TEST_CASE("syntax errors report the byte offset") {
    try {
        Expr::parse("1+2*#");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset == 4);
    }
}

TEST_CASE("round trip against hand-built evaluations") {
    using F = std::function<double(double)>;
    const std::vector<std::pair<const char*, F>> battery = {
        {"3*z^2*cos(10*z)*log(z+1)",
         [](double z) { return 3 * z * z * std::cos(10 * z) * std::log(z + 1); }},
        {"z*sin(100*z)*log(z+1)",
         [](double z) { return z * std::sin(100 * z) * std::log(z + 1); }},
        {"9*z^2*cos(100*z)*log(z+1)",
         [](double z) { return 9 * z * z * std::cos(100 * z) * std::log(z + 1); }},
        {"z*sin(100*z)*exp(3*z)",
         [](double z) { return z * std::sin(100 * z) * std::exp(3 * z); }},
        {"z", [](double z) { return z; }},
        {"z^2", [](double z) { return z * z; }},
        {"(1+z)*(1-z)", [](double z) { return (1 + z) * (1 - z); }},
        {"exp(-z)*sin(z)/(z+2)",
         [](double z) { return std::exp(-z) * std::sin(z) / (z + 2); }},
        {"-z^3+2*z-0.5", [](double z) { return -(z * z * z) + 2 * z - 0.5; }},
        {"cos(z)^2+sin(z)^2",
         [](double z) {
             return std::cos(z) * std::cos(z) + std::sin(z) * std::sin(z);
         }},
    };
    for (const auto& [text, fn] : battery) {
        const Expr e = Expr::parse(text);
        for (int i = 0; i < 100; ++i) {
            const double z = 0.015 + i * 0.0157;
            const double want = fn(z);
            const double got = e.eval(z);
            CHECK(std::fabs(got - want) <=
                  1e-12 * std::max(1.0, std::fabs(want)));
        }
    }
}
