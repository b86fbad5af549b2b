#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fibertwist/io.hpp"
#include "fibertwist/sideways.hpp"

using namespace fibertwist;

namespace {

const ModelParams kParams{0.5, 1.5707963267948966};

double field_diff(const WaveField& a, const WaveField& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        d = std::max(d, max_abs(a.values[k] - b.values[k]));
    return d;
}

SidewaysData zero_data(const Grid& g) {
    SidewaysData d;
    d.X = 0.0;
    d.step = g.h();
    d.a.assign(g.levels(), Vec4{0, 0, 0, 0});
    return d;
}

} // namespace

TEST_CASE("matching conditions") {
    Grid g(kParams, 32);
    SUBCASE("zero data passes trivially") {
        auto rep = check_matching(zero_data(g), 0.37, 0.5, 1e-12);
        CHECK(rep.r0 == 0.0);
        CHECK(rep.r1 == 0.0);
        CHECK(rep.pass);
    }
    SUBCASE("constant slow component violates the zeroth condition") {
        SidewaysData d = zero_data(g);
        for (auto& a : d.a) a = {0, 0, 1, 0};
        auto rep = check_matching(d, 0.0, 0.5, 1e-6);
        CHECK(rep.r0 == doctest::Approx(2.25));
        CHECK_FALSE(rep.pass);
    }
    SUBCASE("forward data satisfies both conditions to O(h)") {
        // calibrated: residual r1 ~ 0.08 h at 2^5 and shrinks
        for (int N : {32, 64}) {
            Grid gn(kParams, N);
            auto beta = sample_on_grid(
                Expr::parse("3*z^2*cos(10*z)*log(z+1)"), gn);
            auto tr = forward_trace(gn, beta);
            auto rep = check_matching(data_from_trace(tr), beta.samples[0],
                                      0.5, 0.2 * gn.h());
            CHECK(rep.pass);
        }
    }
    SUBCASE("too-short data is rejected") {
        SidewaysData d = zero_data(g);
        d.a.resize(2);
        CHECK_THROWS_AS(check_matching(d, 0.0, 0.5, 1.0), GeometryError);
    }
}

TEST_CASE("zero data gives the zero field for any coefficient") {
    Grid g(kParams, 32);
    auto beta = sample_on_grid(Expr::parse("z^2*sin(3*z)"), g)
                    .slice(0, g.max_diag_col());
    auto f = solve_sideways(g, beta, zero_data(g));
    CHECK(f.max_abs() == 0.0);
}

TEST_CASE("slow left-mover is transported exactly at c = 1/2") {
    // beta = 0, data (0,0,g(t),0): h3(z,t) = g(t + z/c); the feet are
    // on-grid at this speed so the transport has no interpolation error
    Grid g(kParams, 64);
    SidewaysData d = zero_data(g);
    auto gt = [](double t) { return std::sin(1.7 * t) + 0.3 * t; };
    for (int j = 0; j < g.levels(); ++j) d.a[j] = {0, 0, gt(g.t(j)), 0};
    CoefficientProfile zero;
    zero.z0 = 0.0;
    zero.step = g.h();
    zero.samples.assign(g.max_diag_col() + 1, 0.0);
    auto f = solve_sideways(g, zero, d);
    for (int k = 0; k <= g.max_diag_col(); ++k)
        for (int j = k; j <= g.sideways_jmax(k); ++j) {
            const double want = gt(g.t(j) + g.z(k) / 0.5);
            CHECK(std::fabs(f.at(k, j)[2] - want) <= 1e-12 * (1 + std::fabs(want)));
        }
}

TEST_CASE("solve is linear in the data") {
    Grid g(kParams, 32);
    auto beta = sample_on_grid(Expr::parse("z^2*sin(3*z)"), g)
                    .slice(0, g.max_diag_col());
    SidewaysData d1 = zero_data(g), d2 = zero_data(g), sum = zero_data(g);
    double seed = 0.31;
    auto next = [&seed]() {
        seed = std::fmod(seed * 997.0 + 0.173, 1.0);
        return 2.0 * seed - 1.0;
    };
    for (std::size_t j = 0; j < d1.a.size(); ++j) {
        d1.a[j] = {next(), next(), next(), next()};
        d2.a[j] = {next(), next(), next(), next()};
        sum.a[j] = d1.a[j] + d2.a[j];
    }
    auto f1 = solve_sideways(g, beta, d1);
    auto f2 = solve_sideways(g, beta, d2);
    auto fs = solve_sideways(g, beta, sum);
    double scale = 1.0 + fs.max_abs();
    for (std::size_t k = 0; k < fs.values.size(); ++k)
        CHECK(max_abs(fs.values[k] - (f1.values[k] + f2.values[k])) <=
              1e-12 * scale);
}

TEST_CASE("diagonal closure enforces the reflection ratio exactly") {
    Grid g(kParams, 64);
    auto full = sample_on_grid(Expr::parse("3*z^2*cos(10*z)*log(z+1)"), g);
    auto tr = forward_trace(g, full);
    auto beta = full.slice(0, g.max_diag_col());
    auto f = solve_sideways(g, beta, data_from_trace(tr));
    for (int k = 1; k <= g.max_diag_col(); ++k)
        CHECK(std::fabs(f.at(k, k)[2] - f.at(k, k)[3] / 9.0) <=
              1e-12 * (1.0 + std::fabs(f.at(k, k)[3])));
}

TEST_CASE("sideways solve reproduces the forward field from its traces") {
    // both discretize the same continuum solution; calibrated C = 2
    Grid g(kParams, 64);
    auto full = sample_on_grid(Expr::parse("3*z^2*cos(10*z)*log(z+1)"), g);
    auto sol = solve_forward(g, full);
    auto beta = full.slice(0, g.max_diag_col());
    auto f = solve_sideways(g, beta, data_from_trace(sol.trace));
    double d = 0.0;
    for (int k = 0; k <= g.max_diag_col(); ++k)
        for (int j = k; j <= g.sideways_jmax(k); ++j)
            d = std::max(d, max_abs(f.at(k, j) - sol.field.at(k, j)));
    CHECK(d <= 2.0 * g.h());
}

TEST_CASE("sideways marcher agrees with its Picard oracle") {
    auto run = [](double c, int N) {
        Grid g(ModelParams{c, kParams.Z}, N);
        auto full = sample_on_grid(Expr::parse("z^2*sin(3*z)"), g);
        auto tr = forward_trace(g, full);
        auto beta = full.slice(0, g.max_diag_col());
        auto data = data_from_trace(tr);
        auto cn = solve_sideways(g, beta, data);
        auto pi = picard_sideways(g, beta, data, 1e-12, 400);
        return field_diff(cn, pi);
    };
    SUBCASE("on-grid characteristics: both routes coincide to roundoff") {
        CHECK(run(0.5, 32) <= 1e-10);
    }
    SUBCASE("off-grid characteristics: O(h) agreement that refines") {
        const double d1 = run(0.6, 32);
        const double d2 = run(0.6, 64);
        CHECK(d1 <= 2.5 * (kParams.Z / 32));
        CHECK(d2 <= 2.5 * (kParams.Z / 64));
        CHECK(d2 <= d1 / 1.5);
    }
}

TEST_CASE("picard_sideways converges in one pass on zero data") {
    Grid g(kParams, 16);
    CoefficientProfile beta;
    beta.z0 = 0.0;
    beta.step = g.h();
    beta.samples.assign(g.max_diag_col() + 1, 0.4);
    PicardStats st;
    auto f = picard_sideways(g, beta, zero_data(g), 1e-12, 10, &st);
    CHECK(st.iterations == 1);
    CHECK(f.max_abs() == 0.0);
}

TEST_CASE("advance_data hands the last column to the next segment") {
    Grid g(kParams, 32);
    auto full = sample_on_grid(Expr::parse("3*z^2*cos(10*z)*log(z+1)"), g);
    auto sol = solve_forward(g, full);
    auto beta = full.slice(0, g.max_diag_col());
    auto f = solve_sideways(g, beta, data_from_trace(sol.trace));
    auto adv = advance_data(f);
    const int k1 = g.max_diag_col();
    CHECK(adv.X == doctest::Approx(g.z(k1)));
    CHECK(adv.size() == static_cast<std::size_t>(g.sideways_jmax(k1) - k1 + 1));

    SUBCASE("zero field advances to zero data") {
        auto fz = solve_sideways(g, beta, zero_data(g));
        for (const auto& a : advance_data(fz).a) CHECK(max_abs(a) == 0.0);
    }
    SUBCASE("re-solving a single column returns the same data") {
        auto one = beta.slice(2, 2);
        SidewaysData col2;
        col2.X = g.z(2);
        col2.step = g.h();
        for (int j = 2; j <= g.sideways_jmax(2); ++j)
            col2.a.push_back(f.at(2, j));
        auto again = solve_sideways(g, one, col2);
        auto back = advance_data(again);
        for (std::size_t j = 0; j < col2.a.size(); ++j)
            CHECK(max_abs(back.a[j] - col2.a[j]) == 0.0);
    }
    SUBCASE("advanced column matches the forward field") {
        // calibrated at two levels: 3.7 h at 2^5, 0.6 h at 2^6 (the last
        // column carries the accumulated march error)
        double d = 0.0;
        for (std::size_t j = 0; j < adv.a.size(); ++j)
            d = std::max(d,
                         max_abs(adv.a[j] - sol.field.at(k1, k1 + int(j))));
        CHECK(d <= 5.0 * g.h());

        Grid g2(kParams, 64);
        auto full2 = sample_on_grid(
            Expr::parse("3*z^2*cos(10*z)*log(z+1)"), g2);
        auto sol2 = solve_forward(g2, full2);
        auto f2 = solve_sideways(g2, full2.slice(0, g2.max_diag_col()),
                                 data_from_trace(sol2.trace));
        auto adv2 = advance_data(f2);
        const int k2 = g2.max_diag_col();
        double d2 = 0.0;
        for (std::size_t j = 0; j < adv2.a.size(); ++j)
            d2 = std::max(
                d2, max_abs(adv2.a[j] - sol2.field.at(k2, k2 + int(j))));
        CHECK(d2 <= d / 1.5);
    }
}

TEST_CASE("input validation") {
    Grid g(kParams, 32);
    auto beta = sample_on_grid(Expr::parse("z"), g).slice(0, g.max_diag_col());
    SUBCASE("short data segment") {
        SidewaysData d = zero_data(g);
        d.a.resize(10);
        CHECK_THROWS_AS(solve_sideways(g, beta, d), GeometryError);
    }
    SUBCASE("segment past the sensing depth") {
        auto wide = sample_on_grid(Expr::parse("z"), g); // N+1 > max col + 1
        CHECK_THROWS_AS(solve_sideways(g, wide, zero_data(g)), GeometryError);
    }
    SUBCASE("beta not aligned with the data column") {
        auto off = beta;
        off.z0 = 0.5 * g.h();
        CHECK_THROWS_AS(solve_sideways(g, off, zero_data(g)),
                        DimensionMismatchError);
    }
}

TEST_CASE("sideways picard reports non-convergence at the iteration cap") {
    Grid g(kParams, 32);
    auto full = sample_on_grid(Expr::parse("3*z^2*cos(10*z)*log(z+1)"), g);
    auto tr = forward_trace(g, full);
    auto beta = full.slice(0, g.max_diag_col());
    CHECK_THROWS_AS(picard_sideways(g, beta, data_from_trace(tr), 1e-13, 2),
                    NoConvergenceError);
}

TEST_CASE("slow speeds below 1/2 exercise the interior diagonal crossing") {
    // at c < 1/2 the slow right-mover's backward characteristic can exit
    // through t = z between columns away from the diagonal node; both
    // independent routes must still track the forward solution
    Grid g(ModelParams{0.35, kParams.Z}, 32);
    auto full = sample_on_grid(Expr::parse("z^2*sin(3*z)"), g);
    auto sol = solve_forward(g, full);
    auto beta = full.slice(0, g.max_diag_col());
    auto data = data_from_trace(sol.trace);
    auto hs = solve_sideways(g, beta, data);
    double d = 0.0;
    for (int k = 0; k <= g.max_diag_col(); ++k)
        for (int j = k; j <= g.sideways_jmax(k); ++j)
            d = std::max(d, max_abs(hs.at(k, j) - sol.field.at(k, j)));
    CHECK(d <= 0.5 * g.h()); // calibrated: 0.05 h at 2^5, 0.03 h at 2^6
    auto hp = picard_sideways(g, beta, data, 1e-12, 400);
    CHECK(field_diff(hs, hp) <= 0.5 * g.h());
}
