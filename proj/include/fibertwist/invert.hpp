#pragma once
#include <optional>
#include <string>
#include <vector>

#include "fibertwist/model.hpp"
#include "fibertwist/sideways.hpp"

namespace fibertwist {

// Constants of the local contraction argument for one data segment.
struct SegmentConstants {
    double J_X = 0.0;       // weighted data energy, trapezoid rule
    double K_X = 0.0;       // L2 ball radius bound, 8(1+c)^2/(1-c)^2 J_X
    double delta = 0.0;     // admissible segment length
    double lambda = 0.0;    // auxiliary constant of the contraction proof
    double sigma = 0.5;     // contraction factor target
    double delta_star = 0.0; // X-independent global step size
};

SegmentConstants segment_constants(const SidewaysData& data, double K,
                                   const ModelParams& params);

// One application of the contraction map: solve the sideways problem with
// the guessed coefficient and rescale its diagonal h3 trace.
CoefficientProfile q_map(const CoefficientProfile& beta_guess,
                         const SidewaysData& data, const Grid& grid,
                         const SolverOptions& opt = {});

struct FixedPointOptions {
    SolverOptions solver;
    // clip iterates to the L2 ball ||beta||^2 <= clip_K (theory-stepped mode)
    std::optional<double> clip_K;
};

struct FixedPointResult {
    CoefficientProfile beta;
    std::vector<double> history; // successive-iterate L2 distances
    int iterations = 0;
    bool converged = false;
};

// Iterate beta <- Q(beta) until the relative L2 successive difference drops
// below tol. Throws NoConvergenceError (history attached) at max_iter; a
// blow-up inside Q is reported the same way.
FixedPointResult fixed_point(const CoefficientProfile& beta0,
                             const SidewaysData& data, const Grid& grid,
                             double tol, int max_iter,
                             const FixedPointOptions& opt = {});

enum class ReconstructMode { GlobalIteration, TheoryStepped };

struct ReconstructOptions {
    ReconstructMode mode = ReconstructMode::GlobalIteration;
    double tol = 1e-8;
    int max_iter = 200;
    std::optional<CoefficientProfile> beta0;        // default: zero guess
    std::optional<CoefficientProfile> ground_truth; // enables E2/Einf
    SolverOptions solver;
};

struct ErrorMetrics {
    double E2 = 0.0;
    double Einf = 0.0;
};

struct ReconstructionReport {
    CoefficientProfile beta_app; // on [0, Y] grid nodes
    std::vector<int> iterations; // per segment (one entry in global mode)
    std::vector<double> history; // concatenated successive distances
    std::vector<SegmentConstants> segments; // theory-stepped mode only
    bool converged = false;
    std::string failure; // set when converged is false
    ReconstructMode mode = ReconstructMode::GlobalIteration;
    std::optional<ErrorMetrics> errors;
};

// Recover the twist on [0, Y] from the reflection traces. K is the a priori
// bound on ||beta||^2_{L2[0,Y]} (used by the theory-stepped constants).
ReconstructionReport reconstruct(const BoundaryTrace& trace, double K,
                                 const Grid& grid,
                                 const ReconstructOptions& opt = {});

// The L2 and relative max error metrics between profiles on the same nodes.
ErrorMetrics error_metrics(const CoefficientProfile& beta_exact,
                           const CoefficientProfile& beta_app,
                           const Grid& grid);

} // namespace fibertwist
