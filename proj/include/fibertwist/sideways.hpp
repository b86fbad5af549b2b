#pragma once
#include <vector>

#include "fibertwist/forward.hpp"
#include "fibertwist/model.hpp"
#include "fibertwist/wavefield.hpp"

namespace fibertwist {

// Full Cauchy data on a vertical segment z = X, t in [X, (2cZ - X)/c],
// sampled at the grid spacing.
struct SidewaysData {
    double X = 0.0;
    double step = 0.0;
    std::vector<Vec4> a;

    std::size_t size() const { return a.size(); }
    double t(std::size_t j) const { return X + step * j; }
};

// Build sideways data (m1, 0, m3, 0) from a reflection trace at z = 0.
SidewaysData data_from_trace(const BoundaryTrace& trace);

// Copy column k of a field into a data segment (testing helper).
SidewaysData data_from_field_column(const WaveField& field, int k);

struct MatchingReport {
    double r0 = 0.0; // zeroth-order corner condition
    double r1 = 0.0; // first-order corner condition
    double tol = 0.0;
    bool pass = false;
};

// Corner compatibility conditions between the data segment and the
// characteristic line t = z; derivatives use a one-sided second-order
// stencil.
MatchingReport check_matching(const SidewaysData& data, double beta_at_X,
                              double c, double tol);

// March the sideways problem rightward in z from the data column across
// columns round(X/h) .. round(X/h) + (beta.size()-1). At each new column's
// diagonal node, h4 is closed by the characteristic ratio condition.
WaveField solve_sideways(const Grid& grid, const CoefficientProfile& beta,
                         const SidewaysData& data,
                         const SolverOptions& opt = {});

// Same march, keeping only the rolling column; returns h3 on the diagonal
// nodes of the covered columns (used by the reconstruction map).
std::vector<double> sideways_diag_h3(const Grid& grid,
                                     const CoefficientProfile& beta,
                                     const SidewaysData& data,
                                     const SolverOptions& opt = {});

// Independent oracle: Picard iteration on the sideways characteristic
// integral equations, including the two-case rule for h4 with reflection
// through the diagonal.
WaveField picard_sideways(const Grid& grid, const CoefficientProfile& beta,
                          const SidewaysData& data, double tol, int max_iter,
                          PicardStats* stats = nullptr);

// The final column of a computed sideways field, as data for the next
// segment.
SidewaysData advance_data(const WaveField& field);

} // namespace fibertwist
