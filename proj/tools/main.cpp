// Command-line surface: simulate, reconstruct, verify, transform.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fibertwist/diagnostics.hpp"
#include "fibertwist/forward.hpp"
#include "fibertwist/invert.hpp"
#include "fibertwist/io.hpp"
#include "fibertwist/model.hpp"
#include "fibertwist/sideways.hpp"

namespace fs = std::filesystem;
using namespace fibertwist;

namespace {

struct RunConfig {
    double c = 0.5;
    double Z = 1.5707963267948966; // pi/2
    int N = 32;
    std::string beta;      // expression or profile-csv path
    std::string beta0 = "z";
    double K = 1.0;
    double tol = 1e-8;
    int max_iter = 200;
    std::string mode = "global"; // global | stepped
    bool refine_data = true;
    std::string interp = "cubic"; // linear | cubic
    std::string out = ".";
};

Grid make_grid(const RunConfig& cfg) {
    ModelParams params{cfg.c, cfg.Z};
    params.validate(); // rejects c outside (0,1) before any solve
    return Grid(params, cfg.N);
}

SolverOptions make_solver(const RunConfig& cfg) {
    SolverOptions opt;
    if (cfg.interp == "cubic")
        opt.interp = InterpOrder::Cubic;
    else if (cfg.interp != "linear")
        throw ConfigError("interp must be 'linear' or 'cubic'");
    return opt;
}

// beta / beta0 inputs are either an expression in z or a profile CSV path
CoefficientProfile load_profile(const std::string& text, const Grid& grid,
                                bool allow_file = true) {
    if (allow_file && fs::exists(text)) return read_profile_csv(text);
    return sample_on_grid(Expr::parse(text), grid);
}

BoundaryTrace make_data(const RunConfig& cfg, const Grid& grid,
                        const SolverOptions& opt) {
    if (!cfg.refine_data)
        return forward_trace(grid, load_profile(cfg.beta, grid), opt);
    if (fs::exists(cfg.beta))
        throw ConfigError("refine-data needs an expression beta; got a file");
    const Grid fine(grid.params, 2 * grid.N);
    const Expr e = Expr::parse(cfg.beta);
    const BoundaryTrace ft = forward_trace(fine, sample_on_grid(e, fine), opt);
    BoundaryTrace tr;
    tr.step = grid.h();
    for (int j = 0; j < grid.levels(); ++j) {
        tr.m1.push_back(ft.m1[2 * j]);
        tr.m3.push_back(ft.m3[2 * j]);
    }
    return tr;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out);
    return (fs::path(cfg.out) / name).string();
}

int cmd_simulate(const RunConfig& cfg, bool dump_field) {
    const Grid grid = make_grid(cfg);
    const SolverOptions opt = make_solver(cfg);
    if (cfg.beta.empty()) throw ConfigError("simulate needs --beta");

    const BoundaryTrace trace = make_data(cfg, grid, opt);
    write_trace_csv(out_path(cfg, "trace.csv"), trace);

    const CoefficientProfile beta = load_profile(cfg.beta, grid);
    for (const auto& w : validate_beta(beta))
        std::cout << "warning: " << w << "\n";
    const ForwardSolution sol = solve_forward(grid, beta, opt);
    if (dump_field) write_field_csv(out_path(cfg, "field.csv"), sol.field);

    std::cout << "grid: c=" << cfg.c << " Z=" << cfg.Z << " N=" << cfg.N
              << " h=" << grid.h() << "\n"
              << "max|m| = " << sol.field.max_abs() << "\n"
              << "J(m,0) = " << energy_J(sol.field, 0, grid.params.eps_star())
              << "\n"
              << "wrote " << out_path(cfg, "trace.csv")
              << (dump_field ? " and field.csv" : "") << "\n";
    return 0;
}

int cmd_reconstruct(const RunConfig& cfg, const std::string& trace_file) {
    const Grid grid = make_grid(cfg);
    const BoundaryTrace trace = read_trace_csv(trace_file);
    if (trace.size() != static_cast<std::size_t>(grid.levels()))
        throw ConfigError("trace length " + std::to_string(trace.size()) +
                          " does not match N=" + std::to_string(cfg.N) +
                          " (need " + std::to_string(grid.levels()) + ")");

    ReconstructOptions opt;
    opt.tol = cfg.tol;
    opt.max_iter = cfg.max_iter;
    opt.solver = make_solver(cfg);
    if (cfg.mode == "stepped")
        opt.mode = ReconstructMode::TheoryStepped;
    else if (cfg.mode != "global")
        throw ConfigError("mode must be 'global' or 'stepped'");
    opt.beta0 = load_profile(cfg.beta0, grid);
    if (!cfg.beta.empty()) opt.ground_truth = load_profile(cfg.beta, grid);

    const ReconstructionReport rep = reconstruct(trace, cfg.K, grid, opt);

    write_profile_csv(out_path(cfg, "beta_app.csv"), rep.beta_app);
    {
        std::ofstream f(out_path(cfg, "report.txt"));
        f << "mode: " << cfg.mode << "\n";
        f << "converged: " << (rep.converged ? "yes" : "no") << "\n";
        if (!rep.converged) f << "failure: " << rep.failure << "\n";
        f << "iterations:";
        for (int it : rep.iterations) f << ' ' << it;
        f << "\nhistory:";
        for (double d : rep.history) f << ' ' << format17(d);
        f << "\n";
        if (rep.errors)
            f << "E2: " << format17(rep.errors->E2)
              << "\nEinf: " << format17(rep.errors->Einf) << "\n";
    }

    std::vector<double> zs(rep.beta_app.size());
    for (std::size_t k = 0; k < zs.size(); ++k)
        zs[k] = rep.beta_app.z0 + k * rep.beta_app.step;
    std::vector<std::string> names;
    std::vector<std::vector<double>> ys;
    if (opt.ground_truth) {
        names.push_back("beta_exact");
        ys.push_back(std::vector<double>(
            opt.ground_truth->samples.begin(),
            opt.ground_truth->samples.begin() + zs.size()));
    }
    names.push_back("beta_app");
    ys.push_back(rep.beta_app.samples);
    write_columns_csv(out_path(cfg, "plot.csv"), names, zs, ys);
    write_svg_plot(out_path(cfg, "plot.svg"), "reconstructed twist", names, zs,
                   ys);

    std::cout << (rep.converged ? "converged" : "did not converge")
              << ", iterations:";
    for (int it : rep.iterations) std::cout << ' ' << it;
    std::cout << "\n";
    if (rep.errors)
        std::cout << "E2 = " << rep.errors->E2 << ", Einf = " << rep.errors->Einf
                  << "\n";
    return rep.converged ? 0 : 2;
}

struct CheckList {
    int failed = 0;
    void check(const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
        if (!detail.empty()) std::cout << "  (" << detail << ")";
        std::cout << "\n";
        if (!ok) ++failed;
    }
};

double field_diff(const WaveField& a, const WaveField& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        d = std::max(d, max_abs(a.values[k] - b.values[k]));
    return d;
}

int cmd_verify(const RunConfig& cfg) {
    const Grid grid = make_grid(cfg);
    const Grid fine(grid.params, 2 * grid.N);
    const SolverOptions opt = make_solver(cfg);
    CheckList cl;
    char buf[160];

    const char* battery[] = {"3*z^2*cos(10*z)*log(z+1)", "z^2", "z^2*sin(3*z)"};

    // zero coefficient -> bitwise zero field and trace
    {
        CoefficientProfile zero = sample_on_grid(Expr::parse("0"), grid);
        const ForwardSolution sol = solve_forward(grid, zero, opt);
        bool ok = sol.field.max_abs() == 0.0;
        for (double v : sol.trace.m1) ok = ok && v == 0.0;
        for (double v : sol.trace.m3) ok = ok && v == 0.0;
        cl.check("zero coefficient gives bitwise-zero field", ok, "");
    }

    // forward solver vs Picard oracle, refining
    for (const char* btxt : battery) {
        const Expr e = Expr::parse(btxt);
        const WaveField p1 =
            picard_forward(grid, sample_on_grid(e, grid), 1e-12, 300);
        const ForwardSolution s1 = solve_forward(grid, sample_on_grid(e, grid), opt);
        const double d1 = field_diff(s1.field, p1);
        const WaveField p2 =
            picard_forward(fine, sample_on_grid(e, fine), 1e-12, 300);
        const ForwardSolution s2 = solve_forward(fine, sample_on_grid(e, fine), opt);
        const double d2 = field_diff(s2.field, p2);
        std::snprintf(buf, sizeof(buf), "diff %.3g -> %.3g", d1, d2);
        cl.check(std::string("forward oracle agreement shrinks: ") + btxt,
                 d2 <= d1 / 1.4 || d2 < 1e-10, buf);
    }

    // sideways solver vs Picard oracle on trace data (example battery)
    for (const char* btxt : battery) {
        const Expr e = Expr::parse(btxt);
        auto run = [&](const Grid& g) {
            const CoefficientProfile full = sample_on_grid(e, g);
            const BoundaryTrace tr = forward_trace(g, full, opt);
            const SidewaysData data = data_from_trace(tr);
            const CoefficientProfile seg = full.slice(0, g.max_diag_col());
            const WaveField hs = solve_sideways(g, seg, data, opt);
            const WaveField hp = picard_sideways(g, seg, data, 1e-12, 300);
            return field_diff(hs, hp);
        };
        const double d1 = run(grid), d2 = run(fine);
        std::snprintf(buf, sizeof(buf), "diff %.3g -> %.3g", d1, d2);
        cl.check(std::string("sideways oracle agreement shrinks: ") + btxt,
                 d2 <= d1 / 1.4 || d2 < 1e-10, buf);
    }

    // boundary energy balance, O(h) residual
    {
        const Expr e = Expr::parse(battery[1]);
        const auto b1 =
            boundary_energy_balance(solve_forward(grid, sample_on_grid(e, grid), opt).field);
        const auto b2 =
            boundary_energy_balance(solve_forward(fine, sample_on_grid(e, fine), opt).field);
        std::snprintf(buf, sizeof(buf), "residual %.3g -> %.3g", b1.residual,
                      b2.residual);
        cl.check("boundary energy balance residual shrinks",
                 b2.residual <= b1.residual / 1.4, buf);
    }

    // divergence identity, O(h) residual
    {
        const Expr e = Expr::parse(battery[0]);
        const auto f1 = solve_forward(grid, sample_on_grid(e, grid), opt);
        const auto f2 = solve_forward(fine, sample_on_grid(e, fine), opt);
        const double r1 =
            check_divergence_identity(f1.field, f1.field, sample_on_grid(e, grid));
        const double r2 =
            check_divergence_identity(f2.field, f2.field, sample_on_grid(e, fine));
        std::snprintf(buf, sizeof(buf), "residual %.3g -> %.3g", r1, r2);
        cl.check("divergence identity residual shrinks", r2 <= r1 / 1.4, buf);
    }

    // sideways energy inequality
    {
        const Expr e = Expr::parse(battery[0]);
        const CoefficientProfile full = sample_on_grid(e, grid);
        const BoundaryTrace tr = forward_trace(grid, full, opt);
        const CoefficientProfile seg = full.slice(0, grid.max_diag_col());
        const WaveField hs =
            solve_sideways(grid, seg, data_from_trace(tr), opt);
        const auto er = check_energy_inequality(hs, seg, grid.params);
        std::snprintf(buf, sizeof(buf), "worst margin %.3g", er.worst_margin);
        cl.check("sideways energy inequality holds", er.pass, buf);
    }

    // diagonal closure ratio
    {
        const Expr e = Expr::parse(battery[0]);
        const CoefficientProfile full = sample_on_grid(e, grid);
        const BoundaryTrace tr = forward_trace(grid, full, opt);
        const CoefficientProfile seg = full.slice(0, grid.max_diag_col());
        const WaveField hs =
            solve_sideways(grid, seg, data_from_trace(tr), opt);
        const double ratio = (cfg.c - 1.0) * (cfg.c - 1.0) /
                             ((cfg.c + 1.0) * (cfg.c + 1.0));
        double worst = 0.0;
        for (int k = 1; k <= grid.max_diag_col(); ++k)
            worst = std::max(worst,
                             std::fabs(hs.at(k, k)[2] - ratio * hs.at(k, k)[3]));
        std::snprintf(buf, sizeof(buf), "worst %.3g", worst);
        cl.check("diagonal closure ratio at machine precision", worst <= 1e-12,
                 buf);
    }

    // matching conditions on forward data
    {
        const Expr e = Expr::parse(battery[0]);
        const CoefficientProfile full = sample_on_grid(e, grid);
        const BoundaryTrace tr = forward_trace(grid, full, opt);
        const auto rep = check_matching(data_from_trace(tr), full.samples[0],
                                        cfg.c, 10.0 * grid.h());
        std::snprintf(buf, sizeof(buf), "r0=%.3g r1=%.3g", rep.r0, rep.r1);
        cl.check("matching conditions hold on forward data", rep.pass, buf);
    }

    // linearization order
    {
        const std::vector<double> scales{1e-2, 1e-3, 1e-4};
        const auto rep = check_linearization(Expr::parse("z^2"), grid, scales);
        std::snprintf(buf, sizeof(buf), "slope %.3f, m1 slope %.3f", rep.slope,
                      rep.slope_m1);
        cl.check("linearization order >= 1.8",
                 rep.slope >= 1.8 && rep.slope_m1 >= 1.8, buf);
    }

    // zero trace reconstructs the zero twist
    {
        BoundaryTrace tr;
        tr.step = grid.h();
        tr.m1.assign(grid.levels(), 0.0);
        tr.m3.assign(grid.levels(), 0.0);
        ReconstructOptions ro;
        ro.beta0 = sample_on_grid(Expr::parse("z"), grid);
        const auto rep = reconstruct(tr, cfg.K, grid, ro);
        cl.check("zero trace reconstructs zero twist",
                 rep.converged && rep.beta_app.max_abs() == 0.0, "");
    }

    // round-trip reconstruction with contraction history
    {
        RunConfig c2 = cfg;
        c2.beta = battery[0];
        const BoundaryTrace tr = make_data(c2, grid, opt);
        ReconstructOptions ro;
        ro.beta0 = sample_on_grid(Expr::parse("z"), grid);
        ro.ground_truth = load_profile(c2.beta, grid);
        const auto rep = reconstruct(tr, cfg.K, grid, ro);
        bool contracting = true;
        for (std::size_t n = 3; n < rep.history.size(); ++n)
            contracting =
                contracting && rep.history[n] <= 0.9 * rep.history[n - 1];
        std::snprintf(buf, sizeof(buf), "iterations %d, E2 %.3g",
                      rep.iterations.empty() ? 0 : rep.iterations[0],
                      rep.errors ? rep.errors->E2 : -1.0);
        cl.check("round-trip reconstruction converges and contracts",
                 rep.converged && contracting, buf);
    }

    // CSV round trip is bit exact
    {
        const Expr e = Expr::parse(battery[0]);
        const BoundaryTrace tr = forward_trace(grid, sample_on_grid(e, grid), opt);
        const std::string path = out_path(cfg, "verify_trace.csv");
        write_trace_csv(path, tr);
        const BoundaryTrace rd = read_trace_csv(path);
        bool ok = rd.size() == tr.size();
        for (std::size_t j = 0; ok && j < tr.size(); ++j)
            ok = rd.m1[j] == tr.m1[j] && rd.m3[j] == tr.m3[j];
        cl.check("trace CSV round trip is bit exact", ok, path);
    }

    // determinism
    {
        const Expr e = Expr::parse(battery[0]);
        const ForwardSolution a = solve_forward(grid, sample_on_grid(e, grid), opt);
        const ForwardSolution b = solve_forward(grid, sample_on_grid(e, grid), opt);
        cl.check("repeated solves are bit identical",
                 field_diff(a.field, b.field) == 0.0, "");
    }

    std::cout << (cl.failed == 0 ? "all checks passed"
                                 : std::to_string(cl.failed) + " check(s) failed")
              << "\n";
    return cl.failed == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"twisted birefringent fiber: forward simulation and twist "
                 "reconstruction from single-ended reflection data"};
    app.set_config("--config", "", "key=value configuration file");
    app.add_option("--c", cfg.c, "slow wave speed, 0 < c < 1");
    app.add_option("--Z", cfg.Z, "domain depth (observation time 2Z)");
    app.add_option("--N", cfg.N, "subdivisions of [0, Z]");
    app.add_option("--beta", cfg.beta, "twist: expression in z or profile CSV");
    app.add_option("--beta0", cfg.beta0, "initial guess expression");
    app.add_option("--K", cfg.K, "a priori bound on ||beta||^2 on [0,Y]");
    app.add_option("--tol", cfg.tol, "fixed-point stopping tolerance");
    app.add_option("--max-iter", cfg.max_iter, "fixed-point iteration cap");
    app.add_option("--mode", cfg.mode, "reconstruction mode: global|stepped");
    app.add_flag("--refine-data,!--no-refine-data", cfg.refine_data,
                 "generate data on a 2x finer grid and restrict");
    app.add_option("--interp", cfg.interp,
                   "characteristic foot interpolation: linear|cubic");
    app.add_option("--out", cfg.out, "output directory");

    bool dump_field = false;
    auto* sim = app.add_subcommand("simulate", "solve the forward problem and "
                                               "write the reflection trace");
    sim->add_flag("--field", dump_field, "also dump the full field");
    sim->fallthrough();

    std::string trace_file;
    auto* rec = app.add_subcommand(
        "reconstruct", "recover the twist on [0, Y] from a trace file");
    rec->add_option("trace", trace_file, "trace CSV from simulate")->required();
    rec->fallthrough();

    auto* ver = app.add_subcommand("verify", "run the verification battery");
    ver->fallthrough();

    double tv[9] = {0, 0, 0, 0, 0, 0, 0, 1, 1};
    auto* tra = app.add_subcommand(
        "transform", "map field variables (E1, E2 derivatives) to M1..M4");
    tra->add_option("--E1z", tv[0])->required();
    tra->add_option("--E1t", tv[1])->required();
    tra->add_option("--E2z", tv[2])->required();
    tra->add_option("--E2t", tv[3])->required();
    tra->add_option("--E1", tv[4])->required();
    tra->add_option("--E2", tv[5])->required();
    tra->add_option("--beta-value", tv[6])->required();
    tra->add_option("--c1", tv[7], "fast channel speed (> 0)");
    tra->add_option("--c2", tv[8], "slow channel speed (> 0)");
    tra->fallthrough();

    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*sim) return cmd_simulate(cfg, dump_field);
        if (*rec) return cmd_reconstruct(cfg, trace_file);
        if (*ver) return cmd_verify(cfg);
        if (*tra) {
            if (!(tv[7] > 0.0) || !(tv[8] > 0.0))
                throw ConfigError("channel speeds must be positive");
            const Vec4 M = transform_E_to_M(tv[0], tv[1], tv[2], tv[3], tv[4],
                                            tv[5], tv[6], tv[7], tv[8]);
            std::cout << format17(M[0]) << ',' << format17(M[1]) << ','
                      << format17(M[2]) << ',' << format17(M[3]) << "\n";
            return 0;
        }
    } catch (const NoConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NonFiniteFieldError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
