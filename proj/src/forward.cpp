#include "fibertwist/forward.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "kernels.hpp"

namespace fibertwist {

using detail::BBlocks;
using detail::interp_beta;
using detail::interp_row;
using detail::solve_node;

void require_grid_profile(const Grid& grid, const CoefficientProfile& beta) {
    const double h = grid.h();
    if (beta.samples.size() < static_cast<std::size_t>(grid.N) + 1)
        throw DimensionMismatchError(
            "beta has " + std::to_string(beta.samples.size()) +
            " samples, need at least " + std::to_string(grid.N + 1));
    if (std::fabs(beta.step - h) > 1e-12 * h || std::fabs(beta.z0) > 1e-12 * h)
        throw DimensionMismatchError("beta is not sampled on [0,Z] at the "
                                     "grid spacing");
}

namespace {

// Advances the forward march from t-level j-1 to t-level j. prev/prev2 hold
// nodes i = 0..width(j-1) and 0..width(j-2); cur receives i = 0..width(j).
// diag_m2 holds m2 at the diagonal nodes completed so far. Near the two
// corners of the triangle the previous level is too short to interpolate,
// so the slow left-mover either integrates from its diagonal crossing or
// takes a two-level step.
void advance_level(const Grid& g, const std::vector<double>& beta, int j,
                   const std::vector<Vec4>& prev2, const std::vector<Vec4>& prev,
                   std::vector<Vec4>& cur, std::vector<double>& diag_m2,
                   const SolverOptions& opt) {
    const double c = g.params.c;
    const double h = g.h();
    const BBlocks B(c);
    const int w = g.level_width(j);
    const int wp = g.level_width(j - 1);
    cur.assign(w + 1, Vec4{0, 0, 0, 0});

    // Diagonal node first: m1, m3, m4 are characteristic data; m2 is
    // integrated along the diagonal (its own characteristic) from the
    // previous diagonal node.
    if (j <= g.N) {
        const auto cb = char_boundary_values(beta[j], c);
        const Vec4& F = prev[j - 1];
        const double gF = beta[j - 1] * (B.p10 * F[2] + B.p11 * F[3]);
        const double base = F[1] + 0.5 * h * gF;
        const double m2 =
            base + 0.5 * h * beta[j] * (B.p10 * cb.m3 + B.p11 * cb.m4);
        cur[j] = {cb.m1, m2, cb.m3, cb.m4};
        diag_m2[j] = m2;
    }

    auto beta_at = [&](double x) {
        return detail::interp_beta_ord(beta, x, opt.interp);
    };
    // Values on the t = z diagonal at fractional column x: m1, m3, m4 are
    // characteristic data, m2 is interpolated between completed diagonal
    // nodes.
    auto diagonal_value = [&](double x) -> Vec4 {
        const double bstar = beta_at(x);
        const auto cb = char_boundary_values(bstar, c);
        int k = static_cast<int>(std::floor(x));
        if (k > j - 1) k = j - 1;
        if (k < 0) k = 0;
        const double th = x - k;
        const double m2 = (1.0 - th) * diag_m2[k] + th * diag_m2[k + 1];
        return {cb.m1, m2, cb.m3, cb.m4};
    };
    // CN step from the diagonal crossing of component q's characteristic
    auto from_diagonal = [&](int q, double xs, double tP, double betaP,
                             Vec4& base, Vec4& kappa) {
        const Vec4 D = diagonal_value(xs);
        const double dt = (tP - xs) * h;
        base[q] = D[q] + 0.5 * dt * beta_at(xs) * B.mul(D)[q];
        kappa[q] = 0.5 * dt * betaP;
    };

    for (int i = std::min(w, j - 1); i >= 0; --i) {
        Vec4 base{0, 0, 0, 0}, kappa{0, 0, 0, 0};
        const double bp = beta[i];

        // m1: characteristic foot at z = (i+1) h, or on the diagonal when
        // the foot would land outside the previous level.
        if (i + 1 <= wp) {
            const Vec4& F = prev[i + 1];
            base[0] = F[0] + 0.5 * h * beta[i + 1] * B.mul(F)[0];
            kappa[0] = 0.5 * h * bp;
        } else { // i == j-1: crossing at z* = (i+j) h / 2
            from_diagonal(0, 0.5 * (i + j), j, bp, base, kappa);
        }

        // m2: foot at z = (i-1) h; imposed zero on z = 0.
        if (i >= 1) {
            const Vec4& F = prev[i - 1];
            base[1] = F[1] + 0.5 * h * beta[i - 1] * B.mul(F)[1];
            kappa[1] = 0.5 * h * bp;
        }

        // m3: foot at z = (i+c) h.
        {
            const double x = i + c;
            if (x > wp + 1e-12 || (wp < 2 && j <= 2)) {
                // foot outside the previous level (i == j-1), or the level
                // is too short near the origin: step from the diagonal
                from_diagonal(2, (i + c * j) / (1.0 + c), j, bp, base, kappa);
            } else if (wp < 2) {
                // apex corner: two-level step, foot on level j-2
                const Vec4 F = interp_row(prev2, i + 2.0 * c, opt.interp);
                base[2] = F[2] + h * beta_at(i + 2.0 * c) * B.mul(F)[2];
                kappa[2] = h * bp;
            } else {
                const Vec4 F = interp_row(prev, x, opt.interp);
                base[2] = F[2] + 0.5 * h * beta_at(x) * B.mul(F)[2];
                kappa[2] = 0.5 * h * bp;
            }
        }

        // m4: foot at z = (i-c) h; imposed zero on z = 0.
        if (i >= 1) {
            const double x = i - c;
            const Vec4 F = interp_row(prev, x, opt.interp);
            base[3] = F[3] + 0.5 * h * beta_at(x) * B.mul(F)[3];
            kappa[3] = 0.5 * h * bp;
        }

        cur[i] = solve_node(B, base, kappa, opt);
        if (i == 0) cur[0][1] = cur[0][3] = 0.0;
    }
}

void march(const Grid& g, const CoefficientProfile& beta,
           const SolverOptions& opt,
           const std::function<void(int, const std::vector<Vec4>&)>& sink) {
    require_grid_profile(g, beta);
    const double c = g.params.c;

    std::vector<Vec4> prev2, prev, cur;
    std::vector<double> diag_m2(g.N + 1, 0.0);
    const auto cb0 = char_boundary_values(beta.samples[0], c);
    prev.assign(1, Vec4{cb0.m1, 0.0, cb0.m3, 0.0}); // corner: m2 = m4 = 0
    sink(0, prev);

    for (int j = 1; j <= 2 * g.N; ++j) {
        advance_level(g, beta.samples, j, prev2, prev, cur, diag_m2, opt);
        for (const auto& v : cur)
            if (!all_finite(v))
                throw NonFiniteFieldError(
                    "forward march blew up at t-level " + std::to_string(j));
        sink(j, cur);
        prev2.swap(prev);
        prev.swap(cur);
    }
}

} // namespace

ForwardSolution solve_forward(const Grid& grid, const CoefficientProfile& beta,
                              const SolverOptions& opt) {
    ForwardSolution sol;
    sol.field = WaveField(grid, Subdomain::forward_triangle(grid));
    sol.trace.step = grid.h();
    sol.trace.m1.resize(grid.levels());
    sol.trace.m3.resize(grid.levels());
    march(grid, beta, opt, [&](int j, const std::vector<Vec4>& level) {
        for (int i = 0; i < static_cast<int>(level.size()); ++i)
            sol.field.at(i, j) = level[i];
        sol.trace.m1[j] = level[0][0];
        sol.trace.m3[j] = level[0][2];
    });
    return sol;
}

BoundaryTrace forward_trace(const Grid& grid, const CoefficientProfile& beta,
                            const SolverOptions& opt) {
    BoundaryTrace trace;
    trace.step = grid.h();
    trace.m1.resize(grid.levels());
    trace.m3.resize(grid.levels());
    march(grid, beta, opt, [&](int j, const std::vector<Vec4>& level) {
        trace.m1[j] = level[0][0];
        trace.m3[j] = level[0][2];
    });
    return trace;
}

BoundaryTrace extract_traces(const ForwardSolution& sol) {
    BoundaryTrace trace;
    trace.step = sol.field.grid.h();
    const int levels = sol.field.grid.levels();
    trace.m1.resize(levels);
    trace.m3.resize(levels);
    for (int j = 0; j < levels; ++j) {
        trace.m1[j] = sol.field.at(0, j)[0];
        trace.m3[j] = sol.field.at(0, j)[2];
    }
    return trace;
}

namespace {

// One Picard pass of the forward integral equations: for every node and
// component, integrate beta B v along the backward characteristic to its
// exit point (diagonal or z = 0 axis) and add the boundary term there.
struct PicardWorkspace {
    const Grid& g;
    const std::vector<double>& beta;
    WaveField R; // beta(z) B v at every node

    explicit PicardWorkspace(const Grid& grid, const std::vector<double>& b)
        : g(grid), beta(b), R(grid, Subdomain::forward_triangle(grid)) {}

    void refresh(const WaveField& v) {
        const BBlocks B(g.params.c);
        for (int i = 0; i <= g.N; ++i)
            for (int j = i; j <= 2 * g.N - i; ++j)
                R.at(i, j) = beta[i] * B.mul(v.at(i, j));
    }

    // r_comp at fractional column y on integer level s (linear in z)
    double r_level(double y, int s, int comp) const {
        const int w = g.level_width(s);
        if (w == 0) return R.at(0, s)[comp];
        int i0 = static_cast<int>(std::floor(y));
        if (i0 < 0) i0 = 0;
        if (i0 > w - 1) i0 = w - 1;
        const double th = y - i0;
        return (1.0 - th) * R.at(i0, s)[comp] + th * R.at(i0 + 1, s)[comp];
    }
    // r_comp on the diagonal at fractional position x (linear along t = z)
    double r_diag(double x, int comp) const {
        int k = static_cast<int>(std::floor(x));
        if (k < 0) k = 0;
        if (k > g.N - 1) k = g.N - 1;
        const double th = x - k;
        return (1.0 - th) * R.at(k, k)[comp] + th * R.at(k + 1, k + 1)[comp];
    }
    // r_comp on the z = 0 axis at fractional level s
    double r_axis(double s, int comp) const {
        int k = static_cast<int>(std::floor(s));
        if (k < 0) k = 0;
        if (k > 2 * g.N - 1) k = 2 * g.N - 1;
        const double th = s - k;
        return (1.0 - th) * R.at(0, k)[comp] + th * R.at(0, k + 1)[comp];
    }

    // Trapezoid of r_comp(s) along the characteristic s -> (y(s), s) from
    // s_exit up to level j; f_exit supplies the integrand at the exit point.
    double integrate(int j, double s_exit, int comp,
                     const std::function<double(double)>& y_of_s,
                     double f_exit) const {
        const double h = g.h();
        const int jlow = static_cast<int>(std::ceil(s_exit - 1e-9));
        double acc = 0.0;
        double f_hi = r_level(y_of_s(j), j, comp);
        for (int s = j; s > jlow; --s) {
            const double f_lo = r_level(y_of_s(s - 1), s - 1, comp);
            acc += 0.5 * h * (f_hi + f_lo);
            f_hi = f_lo;
        }
        if (jlow > s_exit + 1e-12)
            acc += 0.5 * (jlow - s_exit) * h * (f_hi + f_exit);
        return acc;
    }
};

} // namespace

WaveField picard_forward(const Grid& grid, const CoefficientProfile& beta,
                         double tol, int max_iter, PicardStats* stats) {
    require_grid_profile(grid, beta);
    if (!(tol > 0.0)) throw ConfigError("picard tolerance must be positive");
    const double c = grid.params.c;
    const double m3c = (c - 1.0) / (2.0 * (c + 1.0));
    const double m4c = (c + 1.0) / (2.0 * (c - 1.0));

    WaveField v(grid, Subdomain::forward_triangle(grid));
    WaveField next = v;
    PicardWorkspace ws(grid, beta.samples);

    double diff = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        ws.refresh(v);
        for (int i = 0; i <= grid.N; ++i) {
            for (int j = i; j <= 2 * grid.N - i; ++j) {
                Vec4 out;
                // m1: exit on the diagonal at s = (i+j)/2, data m1 = 0
                {
                    const double se = 0.5 * (i + j);
                    out[0] = ws.integrate(
                        j, se, 0, [&](double s) { return i + j - s; },
                        ws.r_diag(se, 0));
                }
                // m2: exit on z = 0 at s = j - i, data m2 = 0
                {
                    const double se = j - i;
                    out[1] = ws.integrate(
                        j, se, 1, [&](double s) { return i - j + s; },
                        ws.r_axis(se, 1));
                }
                // m3: exit on the diagonal at s = (i + c j)/(1+c)
                {
                    const double se = (i + c * j) / (1.0 + c);
                    out[2] = m3c * interp_beta(beta.samples, se) +
                             ws.integrate(
                                 j, se, 2,
                                 [&](double s) { return i + c * (j - s); },
                                 ws.r_diag(se, 2));
                }
                // m4: exit on the diagonal (z >= ct) or on z = 0 (z < ct)
                {
                    if (i >= c * j - 1e-12) {
                        const double se = (i - c * j) / (1.0 - c);
                        out[3] = m4c * interp_beta(beta.samples, se) +
                                 ws.integrate(
                                     j, se, 3,
                                     [&](double s) { return i - c * (j - s); },
                                     ws.r_diag(se, 3));
                    } else {
                        const double se = j - i / c;
                        out[3] = ws.integrate(
                            j, se, 3, [&](double s) { return i - c * (j - s); },
                            ws.r_axis(se, 3));
                    }
                }
                next.at(i, j) = out;
            }
        }
        diff = 0.0;
        for (std::size_t k = 0; k < v.values.size(); ++k)
            diff = std::max(diff, max_abs(next.values[k] - v.values[k]));
        v.values.swap(next.values);
        if (!v.finite())
            throw NonFiniteFieldError("picard_forward iterate is non-finite");
        if (diff <= tol) {
            if (stats) *stats = {it, diff};
            return v;
        }
    }
    throw NoConvergenceError("picard_forward did not converge in " +
                                 std::to_string(max_iter) +
                                 " iterations (last diff " +
                                 std::to_string(diff) + ")",
                             {diff});
}

} // namespace fibertwist
