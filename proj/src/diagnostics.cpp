#include "fibertwist/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fibertwist {

double energy_J(const WaveField& field, int z_index, double epsilon) {
    const Grid& g = field.grid;
    const int k = z_index;
    if (k < field.dom.i0 || k > field.dom.i1())
        throw GeometryError("column " + std::to_string(k) +
                            " is outside the field domain");
    const int lo = std::max(field.dom.j_lo[k - field.dom.i0], k);
    const int hi =
        std::min(field.dom.j_hi[k - field.dom.i0], g.sideways_jmax(k));
    const double c = g.params.c;
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) {
        const Vec4& p = field.at(k, j);
        const double w = (j == lo || j == hi) ? 0.5 : 1.0;
        s += w * (p[0] * p[0] + p[1] * p[1] + c * p[2] * p[2] +
                  c * epsilon * p[3] * p[3]);
    }
    return s * g.h();
}

EnergyProfile energy_profile(const WaveField& field, double epsilon) {
    EnergyProfile ep;
    ep.epsilon = epsilon;
    const int kmax = std::min(field.dom.i1(), field.grid.max_diag_col());
    for (int k = field.dom.i0; k <= kmax; ++k) {
        ep.cols.push_back(k);
        ep.J.push_back(energy_J(field, k, epsilon));
    }
    return ep;
}

EnergyReport check_energy_inequality(const WaveField& field,
                                     const CoefficientProfile& beta,
                                     const ModelParams& params,
                                     double c_margin, double hypothesis_tol) {
    const double c = params.c;
    const double eps = params.eps_star();
    const double ratio = (c - 1.0) * (c - 1.0) / ((c + 1.0) * (c + 1.0));

    // hypothesis: the diagonal ratio p3 = ratio p4 on every diagonal node
    // strictly inside the field (the first column carries raw data)
    const double scale = 1.0 + field.max_abs();
    for (int k = field.dom.i0 + 1; k <= field.dom.i1(); ++k) {
        if (!field.has(k, k)) continue;
        const Vec4& p = field.at(k, k);
        if (std::fabs(p[2] - ratio * p[3]) > hypothesis_tol * scale)
            throw HypothesisViolatedError(
                "diagonal ratio violated at column " + std::to_string(k));
    }

    const EnergyProfile ep = energy_profile(field, eps);
    EnergyReport rep;
    rep.log_bound =
        4.0 * std::sqrt(params.Y() * beta.l2()) / (c * eps);
    const double log_margin = std::log1p(c_margin * field.grid.h());
    const double J0 = ep.J.empty() ? 0.0 : ep.J.front();
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    rep.pass = true;
    for (std::size_t q = 0; q < ep.J.size(); ++q) {
        if (ep.J[q] <= 0.0) continue; // zero energy always passes
        if (J0 <= 0.0) {
            rep.pass = false; // growth out of nothing
            rep.worst_margin = std::numeric_limits<double>::infinity();
            rep.worst_col = ep.cols[q];
            break;
        }
        const double margin = std::log(ep.J[q]) - std::log(J0) - rep.log_bound;
        if (margin > rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_col = ep.cols[q];
        }
        if (margin > log_margin) rep.pass = false;
    }
    return rep;
}

double check_divergence_identity(const WaveField& u, const WaveField& v,
                                 const CoefficientProfile& beta) {
    if (u.dom.i0 != v.dom.i0 || u.dom.j_lo != v.dom.j_lo ||
        u.dom.j_hi != v.dom.j_hi)
        throw DimensionMismatchError("fields live on different subdomains");
    const Grid& g = u.grid;
    const double c = g.params.c;
    const double h = g.h();

    auto beta_at = [&](int i) {
        const double x = (g.z(i) - beta.z0) / beta.step;
        const long k = std::lround(x);
        return beta.samples.at(static_cast<std::size_t>(k));
    };
    auto Lop = [&](const WaveField& w, int i, int j) -> Vec4 {
        const Vec4 dt = (1.0 / (2.0 * h)) * (w.at(i, j + 1) - w.at(i, j - 1));
        const Vec4 dz = (1.0 / (2.0 * h)) * (w.at(i + 1, j) - w.at(i - 1, j));
        const Vec4 Bm = apply_B(w.at(i, j), c);
        const double b = beta_at(i);
        return {dt[0] - dz[0] - b * Bm[0], dt[1] + dz[1] - b * Bm[1],
                dt[2] - c * dz[2] - b * Bm[2], dt[3] + c * dz[3] - b * Bm[3]};
    };

    double worst = 0.0;
    for (int i = u.dom.i0 + 1; i < u.dom.i1(); ++i) {
        const int lo = u.dom.j_lo[i - u.dom.i0];
        const int hi = u.dom.j_hi[i - u.dom.i0];
        for (int j = lo + 1; j < hi; ++j) {
            // all four neighbours must exist
            if (!u.has(i - 1, j) || !u.has(i + 1, j) || !u.has(i, j - 1) ||
                !u.has(i, j + 1))
                continue;
            const Vec4 Lv = Lop(v, i, j), Lu = Lop(u, i, j);
            const double lhs = dot(u.at(i, j), Lv) + dot(Lu, v.at(i, j));
            const double ddt = (dot(u.at(i, j + 1), v.at(i, j + 1)) -
                                dot(u.at(i, j - 1), v.at(i, j - 1))) /
                               (2.0 * h);
            const double ddz =
                (dot(u.at(i + 1, j), apply_A(v.at(i + 1, j), c)) -
                 dot(u.at(i - 1, j), apply_A(v.at(i - 1, j), c))) /
                (2.0 * h);
            worst = std::max(worst, std::fabs(lhs - (ddt - ddz)));
        }
    }
    return worst;
}

namespace {

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    // least-squares slope of log(y) vs log(x)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

LinearizationReport check_linearization(const Expr& phi, const Grid& grid,
                                        std::span<const double> scales) {
    LinearizationReport rep;
    const double c = grid.params.c;
    const double lincoef = (c - 1.0) / (2.0 * (c + 1.0));
    const double h = grid.h();

    std::vector<double> phi_nodes(grid.N + 1);
    bool all_zero = true;
    for (int i = 0; i <= grid.N; ++i) {
        phi_nodes[i] = phi.eval(grid.z(i));
        if (phi_nodes[i] != 0.0) all_zero = false;
    }

    SolverOptions opt;
    opt.interp = InterpOrder::Cubic;

    for (double eta : scales) {
        if (!(eta > 0.0)) throw ConfigError("scales must be positive");
        CoefficientProfile beta;
        beta.z0 = 0.0;
        beta.step = h;
        beta.samples.resize(grid.N + 1);
        for (int i = 0; i <= grid.N; ++i)
            beta.samples[i] = eta * phi_nodes[i];
        const BoundaryTrace tr = forward_trace(grid, beta, opt);

        double dev = 0.0, m1m = 0.0;
        for (int j = 0; j < grid.levels(); ++j) {
            const double t = grid.t(j);
            const double lin = lincoef * eta * phi.eval(c * t / (1.0 + c));
            dev = std::max(dev, std::fabs(tr.m3[j] - lin));
            m1m = std::max(m1m, std::fabs(tr.m1[j]));
        }
        rep.scales.push_back(eta);
        rep.dev.push_back(dev);
        rep.m1_max.push_back(m1m);
    }

    if (all_zero) {
        rep.exact_zero = true;
        return rep;
    }
    rep.slope = fit_slope(rep.scales, rep.dev);
    rep.slope_m1 = fit_slope(rep.scales, rep.m1_max);
    return rep;
}

double check_stability_ratio(const CoefficientProfile& beta1,
                             const CoefficientProfile& beta2,
                             const Grid& grid) {
    require_grid_profile(grid, beta1);
    require_grid_profile(grid, beta2);
    const int kmax = grid.max_diag_col();
    double num = 0.0;
    for (int k = 0; k <= kmax; ++k) {
        const double d = beta1.samples[k] - beta2.samples[k];
        num += d * d;
    }
    num *= grid.h();

    const BoundaryTrace t1 = forward_trace(grid, beta1);
    const BoundaryTrace t2 = forward_trace(grid, beta2);
    double den = 0.0;
    for (int j = 0; j < grid.levels(); ++j) {
        const double d1 = t1.m1[j] - t2.m1[j];
        const double d3 = t1.m3[j] - t2.m3[j];
        den += d1 * d1 + d3 * d3;
    }
    den *= grid.h();

    if (num < 1e-20) return 0.0;
    if (den < 1e-28)
        throw DegenerateDenominatorError(
            "traces coincide although the coefficients differ; this would "
            "contradict injectivity of the forward map");
    return num / den;
}

BoundaryBalance boundary_energy_balance(const WaveField& field) {
    const Grid& g = field.grid;
    const double c = g.params.c;
    const double h = g.h();
    BoundaryBalance bb;

    // diagonal edge t = z, k = 0..N
    for (int k = 0; k <= g.N; ++k) {
        const Vec4& m = field.at(k, k);
        const double w = (k == 0 || k == g.N) ? 0.5 : 1.0;
        bb.oe += w * (2.0 * m[0] * m[0] + (1.0 + c) * m[2] * m[2] +
                      (1.0 - c) * m[3] * m[3]);
    }
    bb.oe *= h;

    // upper characteristic edge t = 2Z - z, t from Z to 2Z
    for (int j = g.N; j <= 2 * g.N; ++j) {
        const Vec4& m = field.at(2 * g.N - j, j);
        const double w = (j == g.N || j == 2 * g.N) ? 0.5 : 1.0;
        bb.eb += w * (2.0 * m[1] * m[1] + (1.0 - c) * m[2] * m[2] +
                      (1.0 + c) * m[3] * m[3]);
    }
    bb.eb *= h;

    // z = 0 edge, t from 0 to 2Z
    for (int j = 0; j <= 2 * g.N; ++j) {
        const Vec4& m = field.at(0, j);
        const double w = (j == 0 || j == 2 * g.N) ? 0.5 : 1.0;
        bb.ob += w * (m[0] * m[0] + c * m[2] * m[2]);
    }
    bb.ob *= h;

    bb.residual = std::fabs(bb.oe - bb.eb - bb.ob);
    bb.total = bb.oe + bb.eb + bb.ob;
    return bb;
}

} // namespace fibertwist
