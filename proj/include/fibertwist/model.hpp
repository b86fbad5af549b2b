#pragma once
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "fibertwist/errors.hpp"

namespace fibertwist {

using Vec4 = std::array<double, 4>;

inline Vec4 operator+(const Vec4& a, const Vec4& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
inline Vec4 operator-(const Vec4& a, const Vec4& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}
inline Vec4 operator*(double s, const Vec4& a) {
    return {s * a[0], s * a[1], s * a[2], s * a[3]};
}
inline double dot(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}
inline double max_abs(const Vec4& a) {
    return std::max(std::max(std::fabs(a[0]), std::fabs(a[1])),
                    std::max(std::fabs(a[2]), std::fabs(a[3])));
}
inline bool all_finite(const Vec4& a) {
    return std::isfinite(a[0]) && std::isfinite(a[1]) &&
           std::isfinite(a[2]) && std::isfinite(a[3]);
}

// Model constants for the two-speed system: slow speed c in (0,1), fast
// speed 1, observation window [0, 2Z].
struct ModelParams {
    double c = 0.5;
    double Z = 1.0;

    // Sensing depth: the deepest point whose slow echo returns by t = 2Z.
    double Y() const { return 2.0 * c * Z / (1.0 + c); }

    // Largest admissible weight on the slow right-mover in the sideways
    // energy, c(1-c)^3/(1+c)^4.
    double eps_star() const {
        const double om = 1.0 - c, op = 1.0 + c;
        return c * om * om * om / (op * op * op * op);
    }

    void validate() const {
        if (!(c > 0.0 && c < 1.0))
            throw ConfigError("slow speed c must satisfy 0 < c < 1, got " +
                              std::to_string(c));
        if (!(Z > 0.0))
            throw ConfigError("domain depth Z must be positive, got " +
                              std::to_string(Z));
    }
};

// Uniform grid on the triangle D = {0 <= z <= t <= 2Z - z} with equal z- and
// t-steps h = Z/N. Node (i,j) <-> (i*h, j*h), valid iff i <= j <= 2N - i.
struct Grid {
    ModelParams params;
    int N = 0;

    Grid() = default;
    Grid(ModelParams p, int n) : params(p), N(n) {
        params.validate();
        if (N <= 0) throw ConfigError("grid subdivisions N must be positive");
    }

    double h() const { return params.Z / N; }
    double z(int i) const { return i * h(); }
    double t(int j) const { return j * h(); }
    int levels() const { return 2 * N + 1; } // t-levels j = 0..2N

    bool in_triangle(int i, int j) const {
        return i >= 0 && j >= i && j <= 2 * N - i;
    }
    // widest column index present on t-level j
    int level_width(int j) const { return std::min(j, 2 * N - j); }

    // top t-index of the sideways column at z = k*h (t <= 2Z - z/c)
    int sideways_jmax(int k) const {
        return static_cast<int>(std::floor(2.0 * N - k / params.c + 1e-9));
    }
    // last column of the sideways region (z <= Y)
    int max_diag_col() const {
        return static_cast<int>(
            std::floor(2.0 * N * params.c / (1.0 + params.c) + 1e-9));
    }
};

// Twist coefficient sampled at uniform nodes z0 + k*step.
struct CoefficientProfile {
    double z0 = 0.0;
    double step = 0.0;
    std::vector<double> samples;
    std::string source; // expression text when built from one, else empty

    double z1() const {
        return samples.empty() ? z0 : z0 + step * (samples.size() - 1);
    }
    std::size_t size() const { return samples.size(); }
    double operator[](std::size_t k) const { return samples[k]; }

    double max_abs() const {
        double m = 0.0;
        for (double v : samples) m = std::max(m, std::fabs(v));
        return m;
    }
    // Riemann-sum L2 norm, sqrt(step * sum samples^2), the same
    // normalization as the E2 error metric.
    double l2() const {
        double s = 0.0;
        for (double v : samples) s += v * v;
        return std::sqrt(step * s);
    }
    CoefficientProfile slice(std::size_t k0, std::size_t k1) const {
        CoefficientProfile out;
        out.z0 = z0 + step * k0;
        out.step = step;
        out.samples.assign(samples.begin() + k0, samples.begin() + k1 + 1);
        out.source = source;
        return out;
    }
};

// Reflection data at z = 0: samples of m1(0,t), m3(0,t) for t in [0, 2Z].
struct BoundaryTrace {
    double step = 0.0;
    std::vector<double> m1, m3;

    std::size_t size() const { return m1.size(); }
    double t(std::size_t j) const { return step * j; }
};

// (1/2) B v with B as in the model, including the printed 1/2 factor.
inline Vec4 apply_B(const Vec4& v, double c) {
    return {0.5 * (-(1.0 + c) * v[2] + (-1.0 + c) * v[3]),
            0.5 * ((1.0 - c) * v[2] + (1.0 + c) * v[3]),
            0.5 * ((1.0 + c) * v[0] + (-1.0 + c) * v[1]),
            0.5 * ((1.0 - c) * v[0] + (-1.0 - c) * v[1])};
}

// A v with A = diag(1, -1, c, -c).
inline Vec4 apply_A(const Vec4& v, double c) {
    return {v[0], -v[1], c * v[2], -c * v[3]};
}

// Characteristic data on t = z: (m1, m3, m4) as functions of beta(z).
struct CharBoundaryValues {
    double m1, m3, m4;
};
inline CharBoundaryValues char_boundary_values(double beta_at_z, double c) {
    // the + 0.0 keeps beta = 0 from producing negative zeros
    return {0.0,
            (c - 1.0) / (2.0 * (c + 1.0)) * beta_at_z + 0.0,
            (c + 1.0) / (2.0 * (c - 1.0)) * beta_at_z + 0.0};
}

// Pointwise transform from the second-order field variables (E1, E2 and
// their derivatives) to the right/left moving components M1..M4.
inline Vec4 transform_E_to_M(double E1z, double E1t, double E2z, double E2t,
                             double E1, double E2, double beta, double c1,
                             double c2) {
    return {0.5 * (E1z - beta * E2 + E1t / c1),
            0.5 * (E1z - beta * E2 - E1t / c1),
            0.5 * (E2z + beta * E1 + E2t / c2),
            0.5 * (E2z + beta * E1 - E2t / c2)};
}

// Admissibility warnings for a twist profile: the model assumes beta(0) = 0
// and beta'(0) = 0, but initial guesses are allowed to violate both, so this
// never fails.
std::vector<std::string> validate_beta(const CoefficientProfile& profile);

} // namespace fibertwist
