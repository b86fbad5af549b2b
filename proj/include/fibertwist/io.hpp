#pragma once
#include <string>
#include <vector>

#include "fibertwist/expr.hpp"
#include "fibertwist/model.hpp"
#include "fibertwist/wavefield.hpp"

namespace fibertwist {

// Shortest decimal form that round-trips a double exactly (17 significant
// digits).
std::string format17(double v);

// Sample an expression at uniform nodes z0 + k*step, k = 0..count-1.
CoefficientProfile sample_profile(const Expr& e, double z0, double step,
                                  std::size_t count);
// Sample on [0, Z] at the grid spacing (N+1 nodes).
CoefficientProfile sample_on_grid(const Expr& e, const Grid& grid);

// Trace files: header "t,m1,m3", one row per sample.
void write_trace_csv(const std::string& path, const BoundaryTrace& trace);
BoundaryTrace read_trace_csv(const std::string& path);

// Profile files: header "z,beta".
void write_profile_csv(const std::string& path,
                       const CoefficientProfile& profile);
CoefficientProfile read_profile_csv(const std::string& path);

// Field dump: header "z,t,m1,m2,m3,m4", rows in t-level order.
void write_field_csv(const std::string& path, const WaveField& field);

// Comparison table "z,<name1>,<name2>,..." backing a plot.
void write_columns_csv(const std::string& path,
                       const std::vector<std::string>& names,
                       const std::vector<double>& x,
                       const std::vector<std::vector<double>>& ys);

// Self-contained SVG line plot of one or more series over x.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<std::string>& names,
                    const std::vector<double>& x,
                    const std::vector<std::vector<double>>& ys);

} // namespace fibertwist
