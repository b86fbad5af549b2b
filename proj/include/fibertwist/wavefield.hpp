#pragma once
#include <cstddef>
#include <vector>

#include "fibertwist/model.hpp"

namespace fibertwist {

// Column-oriented index set: nodes (i, j) with i in [i0, i0+ncols) and
// j in [j_lo[i-i0], j_hi[i-i0]].
struct Subdomain {
    int i0 = 0;
    std::vector<int> j_lo, j_hi;
    std::vector<std::size_t> col_offset; // prefix sums into the value array

    static Subdomain forward_triangle(const Grid& g);
    // columns k0..k1 of {z <= t <= 2Z - z/c}
    static Subdomain sideways_region(const Grid& g, int k0, int k1);

    int cols() const { return static_cast<int>(j_lo.size()); }
    int i1() const { return i0 + cols() - 1; }
    bool contains(int i, int j) const {
        int k = i - i0;
        return k >= 0 && k < cols() && j >= j_lo[k] && j <= j_hi[k];
    }
    std::size_t index(int i, int j) const {
        int k = i - i0;
        return col_offset[k] + static_cast<std::size_t>(j - j_lo[k]);
    }
    std::size_t total() const {
        return col_offset.empty() ? 0 : col_offset.back();
    }

    void finish(); // fills col_offset (cols()+1 entries) from j_lo/j_hi
};

// 4-component solution values on a subdomain of the grid.
struct WaveField {
    Grid grid;
    Subdomain dom;
    std::vector<Vec4> values;

    WaveField() = default;
    WaveField(Grid g, Subdomain d)
        : grid(g), dom(std::move(d)), values(dom.total(), Vec4{0, 0, 0, 0}) {}

    Vec4& at(int i, int j) { return values[dom.index(i, j)]; }
    const Vec4& at(int i, int j) const { return values[dom.index(i, j)]; }
    bool has(int i, int j) const { return dom.contains(i, j); }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, fibertwist::max_abs(v));
        return m;
    }
    bool finite() const {
        for (const auto& v : values)
            if (!all_finite(v)) return false;
        return true;
    }
};

} // namespace fibertwist
