#include "fibertwist/invert.hpp"

#include <cmath>
#include <limits>

namespace fibertwist {

namespace {

double l2_distance(const CoefficientProfile& a, const CoefficientProfile& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        const double d = a.samples[k] - b.samples[k];
        s += d * d;
    }
    return std::sqrt(a.step * s);
}

} // namespace

SegmentConstants segment_constants(const SidewaysData& data, double K,
                                   const ModelParams& params) {
    const double c = params.c;
    const double eps = params.eps_star();
    const double Y = params.Y();

    SegmentConstants sc;
    // trapezoid rule for the weighted data energy
    for (std::size_t j = 0; j < data.size(); ++j) {
        const Vec4& a = data.a[j];
        const double w = (j == 0 || j + 1 == data.size()) ? 0.5 : 1.0;
        sc.J_X += w * (a[0] * a[0] + a[1] * a[1] + c * a[2] * a[2] +
                       c * eps * a[3] * a[3]);
    }
    sc.J_X *= data.step;

    const double opc = 1.0 + c, omc = 1.0 - c;
    sc.K_X = 8.0 * opc * opc / (omc * omc) * sc.J_X;

    const double span = std::max(0.0, Y - data.X);
    if (sc.K_X > 0.0) {
        sc.delta = std::min(span, c * c * eps * eps / (256.0 * sc.K_X));
        sc.lambda = c * eps * omc * omc / (64.0 * opc * opc * sc.J_X) *
                    std::exp(-4.0 * std::sqrt(sc.K_X * sc.delta) / (c * eps));
    } else {
        // zero data: beta vanishes on the segment, take the whole remainder
        sc.delta = span;
        sc.lambda = std::numeric_limits<double>::infinity();
    }
    sc.sigma = 0.5;
    sc.delta_star = c * c * omc * omc * eps * eps / (2048.0 * opc * opc) *
                    std::exp(-4.0 * std::sqrt(std::max(0.0, K) * Y) / (c * eps));
    return sc;
}

CoefficientProfile q_map(const CoefficientProfile& beta_guess,
                         const SidewaysData& data, const Grid& grid,
                         const SolverOptions& opt) {
    const double c = grid.params.c;
    const double scale = 2.0 * (c + 1.0) / (c - 1.0);
    const std::vector<double> h3 =
        sideways_diag_h3(grid, beta_guess, data, opt);
    CoefficientProfile out;
    out.z0 = beta_guess.z0;
    out.step = beta_guess.step;
    out.samples.resize(h3.size());
    for (std::size_t k = 0; k < h3.size(); ++k)
        out.samples[k] = scale * h3[k] + 0.0; // avoid -0 for zero data
    return out;
}

namespace {

FixedPointResult fixed_point_impl(const CoefficientProfile& beta0,
                                  const SidewaysData& data, const Grid& grid,
                                  double tol, int max_iter,
                                  const FixedPointOptions& opt) {
    if (!(tol > 0.0)) throw ConfigError("fixed-point tolerance must be positive");
    FixedPointResult res;
    CoefficientProfile beta = beta0;
    for (int it = 1; it <= max_iter; ++it) {
        CoefficientProfile next;
        try {
            next = q_map(beta, data, grid, opt.solver);
        } catch (const NonFiniteFieldError&) {
            // a divergent iterate blew up the solve: report non-convergence
            res.beta = beta;
            res.iterations = it;
            res.converged = false;
            return res;
        }
        if (opt.clip_K) {
            const double n2 = next.l2() * next.l2();
            if (n2 > *opt.clip_K && n2 > 0.0) {
                const double s = std::sqrt(*opt.clip_K / n2);
                for (double& v : next.samples) v *= s;
            }
        }
        const double d = l2_distance(next, beta);
        res.history.push_back(d);
        const double ref = std::max(1.0, beta.l2());
        beta = next;
        if (d <= tol * ref) {
            res.beta = beta;
            res.iterations = it;
            res.converged = true;
            return res;
        }
    }
    res.beta = beta;
    res.iterations = max_iter;
    res.converged = false;
    return res;
}

} // namespace

FixedPointResult fixed_point(const CoefficientProfile& beta0,
                             const SidewaysData& data, const Grid& grid,
                             double tol, int max_iter,
                             const FixedPointOptions& opt) {
    FixedPointResult res =
        fixed_point_impl(beta0, data, grid, tol, max_iter, opt);
    if (!res.converged)
        throw NoConvergenceError(
            "fixed-point iteration did not converge in " +
                std::to_string(res.iterations) + " iterations",
            res.history);
    return res;
}

ErrorMetrics error_metrics(const CoefficientProfile& beta_exact,
                           const CoefficientProfile& beta_app,
                           const Grid& grid) {
    if (beta_exact.size() != beta_app.size())
        throw DimensionMismatchError("profiles have different sample counts");
    ErrorMetrics em;
    double s = 0.0;
    bool any_support = false;
    // Nodes where beta vanishes are excluded from the relative max error.
    // Analytic zeros that land on grid nodes evaluate to O(ulp) instead of
    // exactly 0, so "beta != 0" is realized with a relative cutoff.
    const double cutoff = 1e-12 * beta_exact.max_abs();
    for (std::size_t k = 0; k < beta_exact.size(); ++k) {
        const double e = beta_exact.samples[k];
        const double d = e - beta_app.samples[k];
        if (k > 0) s += d * d; // the L2 sum starts at the first interior node
        if (std::fabs(e) > cutoff) {
            any_support = true;
            em.Einf = std::max(em.Einf, std::fabs(d / e));
        }
    }
    em.E2 = std::sqrt(grid.h() * s);
    if (!any_support)
        throw EmptySupportError("relative max error undefined: exact profile "
                                "vanishes at every node");
    return em;
}

namespace {

CoefficientProfile zero_profile(const Grid& grid, int k0, int k1) {
    CoefficientProfile p;
    p.z0 = grid.z(k0);
    p.step = grid.h();
    p.samples.assign(k1 - k0 + 1, 0.0);
    return p;
}

CoefficientProfile initial_guess(const ReconstructOptions& opt,
                                 const Grid& grid, int k0, int k1) {
    if (!opt.beta0) return zero_profile(grid, k0, k1);
    const CoefficientProfile& b0 = *opt.beta0;
    const double h = grid.h();
    if (std::fabs(b0.step - h) > 1e-12 * h || std::fabs(b0.z0) > 1e-9 * h ||
        b0.size() < static_cast<std::size_t>(k1) + 1)
        throw DimensionMismatchError(
            "initial guess must be sampled on [0,>=Y] at the grid spacing");
    return b0.slice(k0, k1);
}

} // namespace

ReconstructionReport reconstruct(const BoundaryTrace& trace, double K,
                                 const Grid& grid,
                                 const ReconstructOptions& opt) {
    if (trace.size() != static_cast<std::size_t>(grid.levels()))
        throw DimensionMismatchError(
            "trace length " + std::to_string(trace.size()) +
            " does not match grid (" + std::to_string(grid.levels()) + ")");
    if (opt.mode == ReconstructMode::TheoryStepped && K < 0.0)
        throw ConfigError("theory-stepped mode needs a bound K >= 0");

    const int kmax = grid.max_diag_col();
    ReconstructionReport rep;
    rep.mode = opt.mode;

    if (opt.mode == ReconstructMode::GlobalIteration) {
        const SidewaysData data = data_from_trace(trace);
        const CoefficientProfile guess = initial_guess(opt, grid, 0, kmax);
        FixedPointOptions fpo;
        fpo.solver = opt.solver;
        FixedPointResult fr =
            fixed_point_impl(guess, data, grid, opt.tol, opt.max_iter, fpo);
        rep.beta_app = fr.beta;
        rep.iterations.push_back(fr.iterations);
        rep.history = fr.history;
        rep.converged = fr.converged;
        if (!fr.converged)
            rep.failure = "global fixed-point iteration did not converge in " +
                          std::to_string(fr.iterations) + " iterations";
    } else {
        SidewaysData data = data_from_trace(trace);
        rep.beta_app = zero_profile(grid, 0, kmax);
        rep.converged = true;
        int k = 0;
        while (k < kmax) {
            SegmentConstants sc = segment_constants(data, K, grid.params);
            rep.segments.push_back(sc);
            int ncells = static_cast<int>(std::floor(sc.delta / grid.h()));
            ncells = std::max(1, std::min(ncells, kmax - k));
            const int k1 = k + ncells;

            CoefficientProfile guess = initial_guess(opt, grid, k, k1);
            FixedPointOptions fpo;
            fpo.solver = opt.solver;
            fpo.clip_K = sc.K_X > 0.0 ? std::optional<double>(sc.K_X)
                                      : std::nullopt;
            FixedPointResult fr = fixed_point_impl(guess, data, grid, opt.tol,
                                                   opt.max_iter, fpo);
            rep.iterations.push_back(fr.iterations);
            rep.history.insert(rep.history.end(), fr.history.begin(),
                               fr.history.end());
            for (int i = k; i <= k1; ++i)
                rep.beta_app.samples[i] = fr.beta.samples[i - k];
            if (!fr.converged) {
                rep.converged = false;
                rep.failure = "segment [" + std::to_string(grid.z(k)) + ", " +
                              std::to_string(grid.z(k1)) +
                              "] did not converge";
                break;
            }
            WaveField field =
                solve_sideways(grid, fr.beta, data, opt.solver);
            data = advance_data(field);
            k = k1;
        }
    }

    if (rep.converged && opt.ground_truth) {
        const CoefficientProfile truth = opt.ground_truth->slice(0, kmax);
        rep.errors = error_metrics(truth, rep.beta_app, grid);
    }
    return rep;
}

} // namespace fibertwist
