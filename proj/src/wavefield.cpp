#include "fibertwist/wavefield.hpp"

namespace fibertwist {

void Subdomain::finish() {
    // col_offset has cols()+1 entries; the last one is the node count.
    col_offset.assign(j_lo.size() + 1, 0);
    for (std::size_t k = 0; k < j_lo.size(); ++k)
        col_offset[k + 1] =
            col_offset[k] + static_cast<std::size_t>(j_hi[k] - j_lo[k] + 1);
}

Subdomain Subdomain::forward_triangle(const Grid& g) {
    Subdomain d;
    d.i0 = 0;
    d.j_lo.resize(g.N + 1);
    d.j_hi.resize(g.N + 1);
    for (int i = 0; i <= g.N; ++i) {
        d.j_lo[i] = i;
        d.j_hi[i] = 2 * g.N - i;
    }
    d.finish();
    return d;
}

Subdomain Subdomain::sideways_region(const Grid& g, int k0, int k1) {
    Subdomain d;
    d.i0 = k0;
    d.j_lo.resize(k1 - k0 + 1);
    d.j_hi.resize(k1 - k0 + 1);
    for (int k = k0; k <= k1; ++k) {
        d.j_lo[k - k0] = k;
        d.j_hi[k - k0] = g.sideways_jmax(k);
    }
    d.finish();
    return d;
}

} // namespace fibertwist
