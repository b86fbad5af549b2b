#pragma once
#include "fibertwist/model.hpp"
#include "fibertwist/wavefield.hpp"

namespace fibertwist {

enum class InterpOrder { Linear, Cubic };

struct SolverOptions {
    // Cubic foot interpolation by default: linear interpolation acts as
    // numerical diffusion and wipes out the rapidly oscillating twist
    // profiles this solver exists to handle.
    InterpOrder interp = InterpOrder::Cubic;
    double node_tol = 1e-12; // node-local fixed-point sweep tolerance
    int max_node_sweeps = 50;
};

struct ForwardSolution {
    WaveField field;
    BoundaryTrace trace;
};

// March the characteristic boundary value problem over the triangle
// D = {0 <= z <= t <= 2Z - z} in t-levels. Each component is advanced by the
// trapezoidal rule along its own characteristic with interpolation at the
// characteristic foot on the previous level.
ForwardSolution solve_forward(const Grid& grid, const CoefficientProfile& beta,
                              const SolverOptions& opt = {});

// Same march, but keeps only two rolling t-levels and returns the z = 0
// reflection traces. Used for data generation on fine grids.
BoundaryTrace forward_trace(const Grid& grid, const CoefficientProfile& beta,
                            const SolverOptions& opt = {});

struct PicardStats {
    int iterations = 0;
    double final_diff = 0.0;
};

// Independent oracle: Picard iteration on the characteristic integral
// equations of the forward problem, trapezoid quadrature along each
// characteristic, linear interpolation at off-grid points. Shares no
// stepping code with solve_forward.
WaveField picard_forward(const Grid& grid, const CoefficientProfile& beta,
                         double tol, int max_iter,
                         PicardStats* stats = nullptr);

// Copies the z = 0 rows of m1 and m3 out of a computed solution.
BoundaryTrace extract_traces(const ForwardSolution& sol);

// Checks that beta is sampled on [0, Z] at the grid spacing.
void require_grid_profile(const Grid& grid, const CoefficientProfile& beta);

} // namespace fibertwist
