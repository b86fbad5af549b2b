#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fibertwist/io.hpp"
#include "fibertwist/model.hpp"

using namespace fibertwist;

TEST_CASE("apply_B matches the model matrix") {
    const Vec4 r = apply_B({0, 1, 0, 0}, 0.5);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);
    CHECK(r[2] == doctest::Approx(-0.25));
    CHECK(r[3] == doctest::Approx(-0.75));
    const Vec4 z = apply_B({0, 0, 0, 0}, 0.8);
    CHECK(max_abs(z) == 0.0);
}

TEST_CASE("B is antisymmetric: u.(Bv) + (Bu).v = 0") {
    // fixed pseudo-random battery
    double seed = 0.1234;
    auto next = [&seed]() {
        seed = std::fmod(seed * 997.0 + 0.173, 1.0);
        return 2.0 * seed - 1.0;
    };
    for (double c : {0.1, 0.5, 0.9, 0.99}) {
        for (int k = 0; k < 50; ++k) {
            const Vec4 u = {next(), next(), next(), next()};
            const Vec4 v = {next(), next(), next(), next()};
            CHECK(std::fabs(dot(u, apply_B(v, c)) + dot(apply_B(u, c), v)) <=
                  1e-14);
        }
        const Vec4 w = {1, 1, 1, 1};
        CHECK(std::fabs(dot(w, apply_B(w, c))) <= 1e-15);
    }
}

TEST_CASE("apply_A is the diagonal speed matrix") {
    const Vec4 r = apply_A({1, 1, 1, 1}, 0.5);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == -1.0);
    CHECK(r[2] == 0.5);
    CHECK(r[3] == -0.5);
    CHECK(max_abs(apply_A({0, 0, 0, 0}, 0.3)) == 0.0);
    const Vec4 s = apply_A({2, 0, 0, 3}, 0.9);
    CHECK(s[0] == 2.0);
    CHECK(s[3] == doctest::Approx(-2.7));
}

TEST_CASE("characteristic boundary values") {
    auto cb = char_boundary_values(1.0, 0.5);
    CHECK(cb.m1 == 0.0);
    CHECK(cb.m3 == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
    CHECK(cb.m4 == doctest::Approx(-1.5).epsilon(1e-15));
    auto cb0 = char_boundary_values(0.0, 0.7);
    CHECK(cb0.m3 == 0.0);
    CHECK(cb0.m4 == 0.0);
    auto cb6 = char_boundary_values(-6.0, 0.5);
    CHECK(cb6.m3 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cb6.m4 == doctest::Approx(9.0).epsilon(1e-15));
}

TEST_CASE("diagonal data satisfies the characteristic ratio identity") {
    for (double c : {0.2, 0.5, 0.8}) {
        const double ratio = (c - 1) * (c - 1) / ((c + 1) * (c + 1));
        for (double b : {-3.0, 0.0, 0.7, 12.0}) {
            auto cb = char_boundary_values(b, c);
            CHECK(std::fabs(cb.m3 - ratio * cb.m4) <= 1e-14 * (1 + std::fabs(cb.m4)));
        }
        // linearity
        auto a = char_boundary_values(2.0, c);
        auto b2 = char_boundary_values(1.0, c);
        CHECK(a.m3 == doctest::Approx(2 * b2.m3));
        CHECK(a.m4 == doctest::Approx(2 * b2.m4));
    }
}

TEST_CASE("model constants") {
    ModelParams p{0.5, 1.5707963267948966};
    CHECK(p.Y() == doctest::Approx(2 * 0.5 * p.Z / 1.5).epsilon(1e-16));
    CHECK(p.Y() < p.Z);
    CHECK(p.eps_star() == doctest::Approx(1.0 / 81.0).epsilon(1e-15));
    // Y(c) increases to Z as c -> 1
    double prev = 0.0;
    for (double c : {0.5, 0.9, 0.99, 0.999}) {
        ModelParams q{c, 1.0};
        CHECK(q.Y() > prev);
        CHECK(q.Y() < q.Z);
        prev = q.Y();
    }
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-3));
    CHECK_THROWS_AS((ModelParams{1.5, 1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((ModelParams{0.5, -1.0}.validate()), ConfigError);
}

TEST_CASE("grid geometry") {
    Grid g(ModelParams{0.5, 2.0}, 8);
    CHECK(g.h() == doctest::Approx(0.25));
    CHECK(g.in_triangle(3, 3));
    CHECK(g.in_triangle(3, 13));
    CHECK_FALSE(g.in_triangle(3, 14));
    CHECK_FALSE(g.in_triangle(3, 2));
    CHECK(g.level_width(5) == 5);
    CHECK(g.level_width(12) == 4);
    // c = 0.5: sideways column tops at 2N - 2k, last column at 2Nc/(1+c)
    CHECK(g.sideways_jmax(3) == 10);
    CHECK(g.max_diag_col() == 5); // floor(16/3)
}

TEST_CASE("field variable transform") {
    // right-moving plane wave in the fast channel maps to M2 only
    Vec4 m = transform_E_to_M(1, -1, 0, 0, 0, 0, 0.0, 1.0, 0.5);
    CHECK(m[0] == 0.0);
    CHECK(m[1] == 1.0);
    CHECK(m[2] == 0.0);
    CHECK(m[3] == 0.0);

    CHECK(max_abs(transform_E_to_M(0, 0, 0, 0, 0, 0, 1.0, 1.0, 0.5)) == 0.0);

    // direct substitution with twist coupling both channels
    m = transform_E_to_M(1, 0, 0, 0, 1, 1, 1.0, 1.0, 0.5);
    CHECK(m[0] == 0.0);
    CHECK(m[1] == 0.0);
    CHECK(m[2] == doctest::Approx(0.5));
    CHECK(m[3] == doctest::Approx(0.5));
}

TEST_CASE("transform decouples the channels when beta = 0") {
    double seed = 0.77;
    auto next = [&seed]() {
        seed = std::fmod(seed * 997.0 + 0.173, 1.0);
        return 2.0 * seed - 1.0;
    };
    for (int k = 0; k < 20; ++k) {
        const double E1z = next(), E1t = next(), E2z = next(), E2t = next();
        const double E1 = next(), E2 = next();
        const double c1 = 1.0, c2 = 0.5;
        const Vec4 both = transform_E_to_M(E1z, E1t, E2z, E2t, E1, E2, 0, c1, c2);
        const Vec4 only1 = transform_E_to_M(E1z, E1t, 0, 0, E1, 0, 0, c1, c2);
        const Vec4 only2 = transform_E_to_M(0, 0, E2z, E2t, 0, E2, 0, c1, c2);
        CHECK(both[0] == only1[0]);
        CHECK(both[1] == only1[1]);
        CHECK(both[2] == only2[2]);
        CHECK(both[3] == only2[3]);
    }
}

TEST_CASE("validate_beta warns on inadmissible profiles") {
    Grid g(ModelParams{0.5, 1.5707963267948966}, 32);
    auto warned = [](const std::vector<std::string>& ws, const char* what) {
        for (const auto& w : ws)
            if (w.find(what) != std::string::npos) return true;
        return false;
    };
    auto wz = validate_beta(sample_on_grid(Expr::parse("z"), g));
    CHECK(warned(wz, "beta'(0)"));
    CHECK_FALSE(warned(wz, "beta(0) !="));

    auto wex = validate_beta(
        sample_on_grid(Expr::parse("3*z^2*cos(10*z)*log(z+1)"), g));
    CHECK(wex.empty());

    auto w0 = validate_beta(sample_on_grid(Expr::parse("0"), g));
    CHECK(w0.empty());

    auto wc = validate_beta(sample_on_grid(Expr::parse("z+1"), g));
    CHECK(warned(wc, "beta(0)"));
}
