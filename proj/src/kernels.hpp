#pragma once
// Internal kernels shared by the forward and sideways marchers.
#include <cmath>
#include <vector>

#include "fibertwist/forward.hpp"
#include "fibertwist/model.hpp"

namespace fibertwist::detail {

// Entries of B split into its 2x2 off-diagonal blocks:
// (Bv)_0 = p00 v2 + p01 v3, (Bv)_1 = p10 v2 + p11 v3,
// (Bv)_2 = q00 v0 + q01 v1, (Bv)_3 = q10 v0 + q11 v1.
struct BBlocks {
    double p00, p01, p10, p11, q00, q01, q10, q11;
    explicit BBlocks(double c)
        : p00(-0.5 * (1.0 + c)), p01(0.5 * (c - 1.0)), p10(0.5 * (1.0 - c)),
          p11(0.5 * (1.0 + c)), q00(0.5 * (1.0 + c)), q01(0.5 * (c - 1.0)),
          q10(0.5 * (1.0 - c)), q11(-0.5 * (1.0 + c)) {}

    Vec4 mul(const Vec4& v) const {
        return {p00 * v[2] + p01 * v[3], p10 * v[2] + p11 * v[3],
                q00 * v[0] + q01 * v[1], q10 * v[0] + q11 * v[1]};
    }
};

// Solves the node-local implicit system m = base + diag(kappa) * (B m).
// Fixed-point sweeps first (the usual regime: |kappa| small); if they stall,
// falls back to the exact 2x2 block elimination, which exists for any kappa.
inline Vec4 solve_node(const BBlocks& B, const Vec4& base, const Vec4& kappa,
                       const SolverOptions& opt) {
    Vec4 m = base;
    double scale = 1.0 + max_abs(base);
    for (int s = 0; s < opt.max_node_sweeps; ++s) {
        Vec4 Bm = B.mul(m);
        Vec4 next = {base[0] + kappa[0] * Bm[0], base[1] + kappa[1] * Bm[1],
                     base[2] + kappa[2] * Bm[2], base[3] + kappa[3] * Bm[3]};
        double d = max_abs(next - m);
        m = next;
        if (d <= opt.node_tol * scale) return m;
        if (!all_finite(m)) break;
    }
    // Exact solve: eliminate m0, m1, solve the 2x2 system in (m2, m3).
    const double a00 = 1.0 - kappa[2] * (B.q00 * kappa[0] * B.p00 +
                                         B.q01 * kappa[1] * B.p10);
    const double a01 = -kappa[2] * (B.q00 * kappa[0] * B.p01 +
                                    B.q01 * kappa[1] * B.p11);
    const double a10 = -kappa[3] * (B.q10 * kappa[0] * B.p00 +
                                    B.q11 * kappa[1] * B.p10);
    const double a11 = 1.0 - kappa[3] * (B.q10 * kappa[0] * B.p01 +
                                         B.q11 * kappa[1] * B.p11);
    const double r0 = base[2] + kappa[2] * (B.q00 * base[0] + B.q01 * base[1]);
    const double r1 = base[3] + kappa[3] * (B.q10 * base[0] + B.q11 * base[1]);
    const double det = a00 * a11 - a01 * a10;
    const double m2 = (r0 * a11 - a01 * r1) / det;
    const double m3 = (a00 * r1 - r0 * a10) / det;
    const double m0 = base[0] + kappa[0] * (B.p00 * m2 + B.p01 * m3);
    const double m1 = base[1] + kappa[1] * (B.p10 * m2 + B.p11 * m3);
    return {m0, m1, m2, m3};
}

// Interpolate a row of node values at fractional index x; nodes are
// row[0..n-1]. Linear by default, 4-point Lagrange when requested (stencil
// clamped at the ends).
inline Vec4 interp_row(const std::vector<Vec4>& row, double x,
                       InterpOrder order) {
    const int n = static_cast<int>(row.size());
    if (n == 1) return row[0];
    int i0 = static_cast<int>(std::floor(x));
    if (i0 < 0) i0 = 0;
    if (i0 > n - 2) i0 = n - 2;
    if (order == InterpOrder::Linear || n < 3) {
        const double th = x - i0;
        return (1.0 - th) * row[i0] + th * row[i0 + 1];
    }
    const int pts = n >= 4 ? 4 : 3; // quadratic on 3-node rows
    int s = i0 - 1;
    if (s < 0) s = 0;
    if (s > n - pts) s = n - pts;
    Vec4 out{0, 0, 0, 0};
    for (int a = 0; a < pts; ++a) {
        double num = 1.0, den = 1.0;
        for (int b = 0; b < pts; ++b) {
            if (a == b) continue;
            num *= x - (s + b);
            den *= static_cast<double>(a - b);
        }
        out = out + (num / den) * row[s + a];
    }
    return out;
}

// Linear interpolation of coefficient samples at fractional index x.
inline double interp_beta(const std::vector<double>& s, double x) {
    const int n = static_cast<int>(s.size());
    if (n == 1) return s[0];
    int i0 = static_cast<int>(std::floor(x));
    if (i0 < 0) i0 = 0;
    if (i0 > n - 2) i0 = n - 2;
    const double th = x - i0;
    return (1.0 - th) * s[i0] + th * s[i0 + 1];
}

// 4-point Lagrange interpolation of coefficient samples (stencil clamped).
inline double interp_beta_cubic(const std::vector<double>& s, double x) {
    const int n = static_cast<int>(s.size());
    if (n < 4) return interp_beta(s, x);
    int st = static_cast<int>(std::floor(x)) - 1;
    if (st < 0) st = 0;
    if (st > n - 4) st = n - 4;
    double out = 0.0;
    for (int a = 0; a < 4; ++a) {
        double num = 1.0, den = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            num *= x - (st + b);
            den *= static_cast<double>(a - b);
        }
        out += s[st + a] * num / den;
    }
    return out;
}

inline double interp_beta_ord(const std::vector<double>& s, double x,
                              InterpOrder order) {
    return order == InterpOrder::Cubic ? interp_beta_cubic(s, x)
                                       : interp_beta(s, x);
}

} // namespace fibertwist::detail
