#pragma once
#include <span>
#include <vector>

#include "fibertwist/expr.hpp"
#include "fibertwist/forward.hpp"
#include "fibertwist/model.hpp"
#include "fibertwist/wavefield.hpp"

namespace fibertwist {

// Weighted line energy J(p, z) = int (p1^2 + p2^2 + c p3^2 + c eps p4^2) dt
// along the vertical segment of column z_index, restricted to the admissible
// range z <= t <= 2Z - z/c. Trapezoid rule.
double energy_J(const WaveField& field, int z_index, double epsilon);

struct EnergyProfile {
    std::vector<int> cols;
    std::vector<double> J;
    double epsilon = 0.0;
};
EnergyProfile energy_profile(const WaveField& field, double epsilon);

struct EnergyReport {
    double log_bound = 0.0;    // log of the Gronwall factor
    double worst_margin = 0.0; // max over columns of log J(z) - log J(0) - log_bound
    int worst_col = 0;
    bool pass = false;
};

// Discrete form of the sideways energy inequality: J(p,z) must stay below
// exp(4 sqrt(Y ||beta||)/(c eps)) J(p,0) (1 + c_margin h). The field must
// satisfy the diagonal ratio hypothesis.
EnergyReport check_energy_inequality(const WaveField& field,
                                     const CoefficientProfile& beta,
                                     const ModelParams& params,
                                     double c_margin = 10.0,
                                     double hypothesis_tol = 1e-8);

// Max-abs residual of the divergence identity
// u.(Lv) + (Lu).v = (u.v)_t - (u.A v)_z over interior nodes, centered
// differences on both sides.
double check_divergence_identity(const WaveField& u, const WaveField& v,
                                 const CoefficientProfile& beta);

struct LinearizationReport {
    std::vector<double> scales;
    std::vector<double> dev;     // max deviation of m3(0,.) from the
                                 // first-order response
    std::vector<double> m1_max;  // max |m1(0,.)|, zero at first order
    double slope = 0.0;          // log-log fit of dev vs eta
    double slope_m1 = 0.0;
    bool exact_zero = false;     // phi vanished identically
};

// Order check of the small-coefficient response: beta = eta phi should give
// a first-order trace with O(eta^2) remainder. The forward solves use cubic
// foot interpolation so transport error does not mask the remainder.
LinearizationReport check_linearization(const Expr& phi, const Grid& grid,
                                        std::span<const double> scales);

// ||beta1 - beta2||^2_{L2[0,Y]} / (||dm1||^2 + ||dm3||^2)_{L2[0,2Z]} for the
// corresponding forward traces.
double check_stability_ratio(const CoefficientProfile& beta1,
                             const CoefficientProfile& beta2,
                             const Grid& grid);

struct BoundaryBalance {
    double oe = 0.0;       // diagonal edge integral
    double eb = 0.0;       // upper characteristic edge integral
    double ob = 0.0;       // z = 0 edge integral
    double residual = 0.0; // |oe - eb - ob|
    double total = 0.0;    // oe + eb + ob
};

// Discrete boundary energy balance of the forward solution over the
// triangle: energy entering through the diagonal equals what leaves through
// the top characteristic and the z = 0 edge.
BoundaryBalance boundary_energy_balance(const WaveField& field);

} // namespace fibertwist
