#include "fibertwist/sideways.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "kernels.hpp"

namespace fibertwist {

using detail::BBlocks;
using detail::interp_beta;
using detail::interp_row;
using detail::solve_node;

SidewaysData data_from_trace(const BoundaryTrace& trace) {
    SidewaysData d;
    d.X = 0.0;
    d.step = trace.step;
    d.a.resize(trace.size());
    for (std::size_t j = 0; j < trace.size(); ++j)
        d.a[j] = {trace.m1[j], 0.0, trace.m3[j], 0.0};
    return d;
}

SidewaysData data_from_field_column(const WaveField& field, int k) {
    const Grid& g = field.grid;
    SidewaysData d;
    d.X = g.z(k);
    d.step = g.h();
    const int jtop = std::min(field.dom.j_hi[k - field.dom.i0],
                              g.sideways_jmax(k));
    for (int j = k; j <= jtop; ++j) d.a.push_back(field.at(k, j));
    return d;
}

MatchingReport check_matching(const SidewaysData& data, double beta_at_X,
                              double c, double tol) {
    if (data.size() < 3)
        throw GeometryError("matching check needs at least 3 samples");
    const double opc2 = (c + 1.0) * (c + 1.0);
    const double omc2 = (1.0 - c) * (1.0 - c);
    const Vec4& a0 = data.a[0];

    MatchingReport rep;
    rep.tol = tol;
    rep.r0 = opc2 * a0[2] - omc2 * a0[3];

    // one-sided 3-point derivatives at the corner
    const double h = data.step;
    const double da3 =
        (-3.0 * data.a[0][2] + 4.0 * data.a[1][2] - data.a[2][2]) / (2.0 * h);
    const double da4 =
        (-3.0 * data.a[0][3] + 4.0 * data.a[1][3] - data.a[2][3]) / (2.0 * h);
    const Vec4 Ba = apply_B(a0, c);
    rep.r1 = opc2 * ((1.0 + c) * da3 - beta_at_X * Ba[2]) -
             (c - 1.0) * (c - 1.0) * ((c - 1.0) * da4 + beta_at_X * Ba[3]);
    rep.pass = std::max(std::fabs(rep.r0), std::fabs(rep.r1)) <= tol;
    return rep;
}

namespace {

struct ColumnRange {
    int k0, k1; // column indices covered by the solve
};

ColumnRange validate_sideways_inputs(const Grid& g,
                                     const CoefficientProfile& beta,
                                     const SidewaysData& data) {
    const double h = g.h();
    if (beta.samples.empty())
        throw DimensionMismatchError("empty coefficient segment");
    if (std::fabs(beta.step - h) > 1e-12 * h)
        throw DimensionMismatchError("beta step does not match the grid");
    const int k0 = static_cast<int>(std::lround(beta.z0 / h));
    if (std::fabs(beta.z0 - k0 * h) > 1e-9 * h)
        throw DimensionMismatchError("beta segment does not start on a node");
    if (std::fabs(data.X - beta.z0) > 1e-9 * h)
        throw DimensionMismatchError("data column does not match the segment");
    const int k1 = k0 + static_cast<int>(beta.samples.size()) - 1;
    if (k1 > g.max_diag_col())
        throw GeometryError("segment extends past the sensing depth Y");
    const std::size_t need =
        static_cast<std::size_t>(g.sideways_jmax(k0) - k0 + 1);
    if (data.size() < need)
        throw GeometryError("data segment too short: " +
                            std::to_string(data.size()) + " samples, need " +
                            std::to_string(need));
    return {k0, k1};
}

// Advances one column, k -> k+1. prev holds nodes t-index j = k..jmax(k);
// cur receives j = k+1..jmax(k+1). The new diagonal node is done first:
// h1, h2, h3 come down their characteristics, h4 is set by the ratio
// condition.
void advance_column(const Grid& g, const std::vector<double>& beta, int kloc,
                    int k, const std::vector<Vec4>& prev,
                    std::vector<Vec4>& cur, const SolverOptions& opt) {
    const double c = g.params.c;
    const double h = g.h();
    const double ratio = (1.0 + c) * (1.0 + c) / ((1.0 - c) * (1.0 - c));
    const BBlocks B(c);
    const int jlo_p = k;
    const int jlo = k + 1;
    const int jtop = g.sideways_jmax(k + 1);
    cur.assign(jtop - jlo + 1, Vec4{0, 0, 0, 0});

    const double bF = beta[kloc];     // beta at the old column
    const double bP = beta[kloc + 1]; // beta at the new column

    // characteristic direction factors: dh_i/dz = s_i * beta * (B h)_i
    const double sdir[4] = {-1.0, 1.0, -1.0 / c, 1.0 / c};

    auto foot = [&](double tj_idx) -> double { return tj_idx - jlo_p; };

    // interpolated value on the t = z diagonal between the old and new
    // diagonal nodes, at fractional column x in [k, k+1]
    auto diagonal_value = [&](double x) -> Vec4 {
        const double th = x - k;
        return (1.0 - th) * prev[0] + th * cur[0];
    };

    for (int j = jlo; j <= jtop; ++j) {
        Vec4 base{0, 0, 0, 0}, kappa{0, 0, 0, 0};
        const bool diag = (j == jlo);

        // feet on the previous column, in t-index units
        const double ft[4] = {j + 1.0, j - 1.0, j + 1.0 / c, j - 1.0 / c};
        for (int q = 0; q < 4; ++q) {
            if (diag && q == 3) continue; // closed by the ratio condition
            if (ft[q] >= jlo_p - 1e-12) {
                const Vec4 F = interp_row(prev, foot(ft[q]), opt.interp);
                base[q] = F[q] + 0.5 * h * sdir[q] * bF * B.mul(F)[q];
                kappa[q] = 0.5 * h * sdir[q] * bP;
            } else {
                // slow right-mover whose backward characteristic exits
                // through the diagonal between the two columns
                const double xs = (k + 1 - c * j) / (1.0 - c);
                const Vec4 D = diagonal_value(xs);
                const double dz = (k + 1 - xs) * h;
                const double bD = detail::interp_beta_ord(beta, xs - k + kloc, opt.interp);
                base[q] = D[q] + 0.5 * dz * sdir[q] * bD * B.mul(D)[q];
                kappa[q] = 0.5 * dz * sdir[q] * bP;
            }
        }

        if (!diag) {
            cur[j - jlo] = solve_node(B, base, kappa, opt);
            continue;
        }

        // diagonal node: sweep h1, h2, h3 with h4 = ratio * h3 re-imposed;
        // fall back to the scalar elimination if the sweep stalls
        Vec4 m{base[0], base[1], base[2], ratio * base[2]};
        bool done = false;
        const double scale = 1.0 + max_abs(base);
        for (int s = 0; s < opt.max_node_sweeps; ++s) {
            const Vec4 Bm = B.mul(m);
            Vec4 next = {base[0] + kappa[0] * Bm[0],
                         base[1] + kappa[1] * Bm[1],
                         base[2] + kappa[2] * Bm[2], 0.0};
            next[3] = ratio * next[2];
            const double d = max_abs(next - m);
            m = next;
            if (d <= opt.node_tol * scale) {
                done = true;
                break;
            }
            if (!all_finite(m)) break;
        }
        if (!done) {
            // x = h3 solves a scalar equation after eliminating h1, h2
            const double e0 = B.p00 + B.p01 * ratio;
            const double e1 = B.p10 + B.p11 * ratio;
            const double coef =
                kappa[2] * (B.q00 * kappa[0] * e0 + B.q01 * kappa[1] * e1);
            const double rhs =
                base[2] + kappa[2] * (B.q00 * base[0] + B.q01 * base[1]);
            const double x = rhs / (1.0 - coef);
            m[2] = x;
            m[3] = ratio * x;
            m[0] = base[0] + kappa[0] * e0 * x;
            m[1] = base[1] + kappa[1] * e1 * x;
        }
        cur[0] = m;
    }
}

void march_sideways(
    const Grid& g, const CoefficientProfile& beta, const SidewaysData& data,
    const SolverOptions& opt,
    const std::function<void(int, const std::vector<Vec4>&)>& sink) {
    const auto range = validate_sideways_inputs(g, beta, data);

    std::vector<Vec4> prev, cur;
    const std::size_t n0 =
        static_cast<std::size_t>(g.sideways_jmax(range.k0) - range.k0 + 1);
    prev.assign(data.a.begin(), data.a.begin() + n0);
    sink(range.k0, prev);

    for (int k = range.k0; k < range.k1; ++k) {
        advance_column(g, beta.samples, k - range.k0, k, prev, cur, opt);
        for (const auto& v : cur)
            if (!all_finite(v))
                throw NonFiniteFieldError(
                    "sideways march blew up at column " + std::to_string(k + 1));
        sink(k + 1, cur);
        prev.swap(cur);
    }
}

} // namespace

WaveField solve_sideways(const Grid& grid, const CoefficientProfile& beta,
                         const SidewaysData& data, const SolverOptions& opt) {
    const double h = grid.h();
    const int k0 = static_cast<int>(std::lround(beta.z0 / h));
    const int k1 = k0 + static_cast<int>(beta.samples.size()) - 1;
    WaveField field(grid, Subdomain::sideways_region(grid, k0, k1));
    march_sideways(grid, beta, data, opt,
                   [&](int k, const std::vector<Vec4>& col) {
                       for (int j = 0; j < static_cast<int>(col.size()); ++j)
                           field.at(k, k + j) = col[j];
                   });
    return field;
}

std::vector<double> sideways_diag_h3(const Grid& grid,
                                     const CoefficientProfile& beta,
                                     const SidewaysData& data,
                                     const SolverOptions& opt) {
    std::vector<double> h3;
    h3.reserve(beta.samples.size());
    march_sideways(grid, beta, data, opt,
                   [&](int, const std::vector<Vec4>& col) {
                       h3.push_back(col[0][2]);
                   });
    return h3;
}

SidewaysData advance_data(const WaveField& field) {
    return data_from_field_column(field, field.dom.i1());
}

namespace {

// Picard pass over the sideways integral equations; integrals run in the
// z-direction from the data column (or the diagonal) to the node.
struct SidePicard {
    const Grid& g;
    const CoefficientProfile& beta;
    int k0, k1;
    WaveField R;

    SidePicard(const Grid& grid, const CoefficientProfile& b, int k0_, int k1_)
        : g(grid), beta(b), k0(k0_), k1(k1_),
          R(grid, Subdomain::sideways_region(grid, k0_, k1_)) {}

    void refresh(const WaveField& v) {
        const BBlocks B(g.params.c);
        for (int k = k0; k <= k1; ++k)
            for (int j = k; j <= g.sideways_jmax(k); ++j)
                R.at(k, j) = beta.samples[k - k0] * B.mul(v.at(k, j));
    }

    // r_comp at integer column y, fractional t-index tau (linear in t)
    double r_col(int y, double tau, int comp) const {
        const int lo = y, hi = g.sideways_jmax(y);
        if (hi == lo) return R.at(y, lo)[comp];
        int j0 = static_cast<int>(std::floor(tau));
        if (j0 < lo) j0 = lo;
        if (j0 > hi - 1) j0 = hi - 1;
        const double th = tau - j0;
        return (1.0 - th) * R.at(y, j0)[comp] + th * R.at(y, j0 + 1)[comp];
    }
    // r_comp on the diagonal at fractional column x
    double r_diag(double x, int comp) const {
        int k = static_cast<int>(std::floor(x));
        if (k < k0) k = k0;
        if (k > k1 - 1) k = k1 - 1;
        const double th = x - k;
        return (1.0 - th) * R.at(k, k)[comp] + th * R.at(k + 1, k + 1)[comp];
    }

    // trapezoid of r_comp along y -> (y, t(y)) from y_exit to column i
    double integrate(int i, double y_exit, int comp,
                     const std::function<double(double)>& t_of_y,
                     double f_exit) const {
        const double h = g.h();
        const int ylow = static_cast<int>(std::ceil(y_exit - 1e-9));
        double acc = 0.0;
        double f_hi = r_col(i, t_of_y(i), comp);
        for (int y = i; y > ylow; --y) {
            const double f_lo = r_col(y - 1, t_of_y(y - 1), comp);
            acc += 0.5 * h * (f_hi + f_lo);
            f_hi = f_lo;
        }
        if (ylow > y_exit + 1e-12)
            acc += 0.5 * (ylow - y_exit) * h * (f_hi + f_exit);
        return acc;
    }
};

} // namespace

WaveField picard_sideways(const Grid& grid, const CoefficientProfile& beta,
                          const SidewaysData& data, double tol, int max_iter,
                          PicardStats* stats) {
    const auto range = validate_sideways_inputs(grid, beta, data);
    if (!(tol > 0.0)) throw ConfigError("picard tolerance must be positive");
    const int k0 = range.k0, k1 = range.k1;
    const double c = grid.params.c;
    const double refl = (1.0 + c) * (1.0 + c) / ((1.0 - c) * (1.0 - c));

    // data sample at fractional t-index (clamped linear interpolation)
    auto a_at = [&](double tau, int comp) -> double {
        const int n = static_cast<int>(data.size());
        if (n == 1) return data.a[0][comp];
        double x = tau - k0;
        int j0 = static_cast<int>(std::floor(x));
        if (j0 < 0) j0 = 0;
        if (j0 > n - 2) j0 = n - 2;
        const double th = x - j0;
        return (1.0 - th) * data.a[j0][comp] + th * data.a[j0 + 1][comp];
    };

    WaveField v(grid, Subdomain::sideways_region(grid, k0, k1));
    WaveField next = v;
    SidePicard ws(grid, beta, k0, k1);

    // h3 at a diagonal point (x, x): slow left-mover integrated back to the
    // data column along t(y) = x + (x - y)/c
    auto h3_diag = [&](double x) -> double {
        const double h = grid.h();
        double acc = 0.0;
        double f_hi = ws.r_diag(x, 2);
        double ycur = x;
        int y = static_cast<int>(std::floor(x - 1e-12)); // first node below x
        for (; y >= k0; --y) {
            const double f_lo = ws.r_col(y, x + (x - y) / c, 2);
            acc += 0.5 * (ycur - y) * h * (f_hi + f_lo);
            f_hi = f_lo;
            ycur = y;
        }
        return a_at(x + (x - k0) / c, 2) - (1.0 / c) * acc;
    };

    double diff = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        ws.refresh(v);
        for (int i = k0; i <= k1; ++i) {
            for (int j = i; j <= grid.sideways_jmax(i); ++j) {
                Vec4 out;
                // h1: fast left-mover, t(y) = i + j - y, data at y = k0
                out[0] = a_at(i + j - k0, 0) -
                         ws.integrate(
                             i, k0, 0, [&](double y) { return i + j - y; },
                             ws.r_col(k0, i + j - k0, 0));
                // h2: fast right-mover, t(y) = y + j - i
                out[1] = a_at(k0 + j - i, 1) +
                         ws.integrate(
                             i, k0, 1, [&](double y) { return y + j - i; },
                             ws.r_col(k0, k0 + j - i, 1));
                // h3: slow left-mover, t(y) = j + (i - y)/c
                out[2] = a_at(j + (i - k0) / c, 2) -
                         (1.0 / c) *
                             ws.integrate(
                                 i, k0, 2,
                                 [&](double y) { return j + (i - y) / c; },
                                 ws.r_col(k0, j + (i - k0) / c, 2));
                // h4: slow right-mover; reflect through the diagonal when
                // the backward characteristic leaves through t = z
                {
                    const double xh = (i - c * j) / (1.0 - c);
                    auto t_of_y = [&](double y) { return j + (y - i) / c; };
                    if (xh > k0 + 1e-12) {
                        out[3] = refl * h3_diag(xh) +
                                 (1.0 / c) * ws.integrate(i, xh, 3, t_of_y,
                                                          ws.r_diag(xh, 3));
                    } else {
                        out[3] = a_at(j - (i - k0) / c, 3) +
                                 (1.0 / c) *
                                     ws.integrate(i, k0, 3, t_of_y,
                                                  ws.r_col(k0, j - (i - k0) / c,
                                                           3));
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
            throw NonFiniteFieldError("picard_sideways iterate is non-finite");
        if (diff <= tol) {
            if (stats) *stats = {it, diff};
            return v;
        }
    }
    throw NoConvergenceError("picard_sideways did not converge in " +
                                 std::to_string(max_iter) +
                                 " iterations (last diff " +
                                 std::to_string(diff) + ")",
                             {diff});
}

} // namespace fibertwist
