#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "impstrip/error.hpp"
#include "impstrip/special.hpp"

namespace impstrip {

enum class Parity { antisymmetric, symmetric };

inline const char* to_string(Parity p) { return p == Parity::antisymmetric ? "antisymmetric" : "symmetric"; }

struct ProblemConfig {
    cd k0{2.0, 0.05};
    double a = 1.0;
    cd eta{1.0, -1.0};
    double theta_in = kPi / 3.0;  // radians

    // extended_incidence admits theta_in in [0, pi] (mirror convention).
    void validate(bool extended_incidence = false) const {
        if (!std::isfinite(k0.real()) || !std::isfinite(k0.imag()) || k0.real() <= 0.0)
            throw Error(ErrorKind::config, "k0 must be finite with Re(k0) > 0");
        if (k0.imag() < 0.0) throw Error(ErrorKind::config, "Im(k0) must be >= 0 (limiting absorption)");
        if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorKind::config, "half-length a must be positive");
        if (!std::isfinite(eta.real()) || !std::isfinite(eta.imag()))
            throw Error(ErrorKind::config, "eta must be finite");
        if (eta.imag() > 0.0)
            throw Error(ErrorKind::config,
                        "Im(eta) > 0 violates the energy dissipation condition, which requires Im(eta) <= 0");
        const double hi = extended_incidence ? kPi : 0.5 * kPi;
        if (!(theta_in >= 0.0 && theta_in <= hi + 1e-15))
            throw Error(ErrorKind::config, extended_incidence ? "theta_in must lie in [0, pi]"
                                                              : "theta_in must lie in [0, pi/2]");
    }
};

enum class BranchMode { real_axis_principal, continued_to_upper, continued_to_lower, second_sheet };

struct BranchContext {
    BranchMode mode = BranchMode::real_axis_principal;
};

inline constexpr BranchContext kPrincipal{BranchMode::real_axis_principal};

// sqrt(k0^2 - k^2). Principal mode is the physical sheet (Im >= 0, cuts G1/G2
// where k0^2 - k^2 >= 0). The continued modes give the left-shore values on
// G2 (upper) or G1 (lower), i.e. the continuation from k = 0 across the cut.
inline cd xi(cd k, BranchContext ctx, const ProblemConfig& cfg) {
    const cd k0 = cfg.k0;
    if (k == k0 || k == -k0) return 0.0;
    switch (ctx.mode) {
        case BranchMode::real_axis_principal:
            if (k == 0.0) return k0;
            return kI * std::sqrt(k * k - k0 * k0);
        case BranchMode::second_sheet:
            if (k == 0.0) return -k0;
            return -kI * std::sqrt(k * k - k0 * k0);
        case BranchMode::continued_to_upper:
        case BranchMode::continued_to_lower:
            return std::sqrt(k0 * k0 - k * k);
    }
    return 0.0;
}

inline cd xi(cd k, const ProblemConfig& cfg) { return xi(k, kPrincipal, cfg); }

inline cd k_star(const ProblemConfig& cfg) { return cfg.k0 * std::cos(cfg.theta_in); }

inline cd incident_field(const ProblemConfig& cfg, Parity parity, double x, double y) {
    const cd ks = k_star(cfg);
    const cd ky = cfg.k0 * std::sin(cfg.theta_in) * y;
    const cd carrier = std::exp(-kI * ks * x);
    if (parity == Parity::symmetric) return std::cos(ky) * carrier;
    return -kI * std::sin(ky) * carrier;
}

// (i/4) H_0^(1)(k0 r).
inline cd green_kernel(cd k0, double r) {
    if (!(r > 0.0)) throw Error(ErrorKind::domain, "green_kernel: r must be positive");
    return 0.25 * kI * special::hankel1_0(k0 * r);
}

// d/dy' G at source (t, 0), target (x, y): (i k0 y / 4r) H_1(k0 r).
inline cd green_kernel_dy(cd k0, double x_minus_t, double y) {
    const double r = std::hypot(x_minus_t, y);
    if (!(r > 0.0)) throw Error(ErrorKind::domain, "green_kernel_dy: coincident points");
    if (y == 0.0) return 0.0;
    return 0.25 * kI * k0 * y / r * special::hankel1_1(k0 * r);
}

inline cd green_kernel_dy(cd k0, double x_minus_t) { return green_kernel_dy(k0, x_minus_t, 0.0); }

// On-axis d^2G/dy dy' = (i k0 / 4r) H_1(k0 r).
inline cd green_kernel_dyy(cd k0, double x_minus_t) {
    const double r = std::abs(x_minus_t);
    if (!(r > 0.0)) throw Error(ErrorKind::domain, "green_kernel_dyy: x_minus_t must be nonzero");
    return 0.25 * kI * k0 / r * special::hankel1_1(k0 * r);
}

namespace kernel {

struct LogSplit {
    cd a;  // coefficient of ln r
    cd b;  // smooth remainder
};

inline constexpr double kSeriesRadius = 4.0;

// green_kernel_dyy - 1/(2 pi r^2) = A ln r + B, A and B entire in r^2.
inline LogSplit hypersingular_split(cd k0, double r) {
    const cd z = k0 * r;
    if (std::abs(z) < kSeriesRadius) {
        const cd h2 = 0.25 * z * z;
        cd term = 1.0, s1 = 0.0, s2 = 0.0;
        double psi_sum = 1.0 - 2.0 * kEulerGamma;  // psi(1) + psi(2)
        for (int k = 0; k < 60; ++k) {
            if (k > 0) {
                term *= -h2 / (static_cast<double>(k) * (k + 1));
                psi_sum += 1.0 / k + 1.0 / (k + 1);
            }
            s1 += term;
            s2 += psi_sum * term;
            if (std::abs(term) * (1.0 + std::abs(psi_sum)) < 1e-18) break;
        }
        const cd k02 = k0 * k0;
        const cd a = -k02 * s1 / (4.0 * kPi);
        const cd b = kI * k02 * s1 / 8.0 + a * std::log(0.5 * k0) + k02 * s2 / (8.0 * kPi);
        return {a, b};
    }
    const auto j = special::bessel_j_array(1, z);
    const cd a = -k0 / (2.0 * kPi * r) * j[1];
    const cd full = green_kernel_dyy(k0, r) - 1.0 / (2.0 * kPi * r * r);
    return {a, full - a * std::log(r)};
}

// green_kernel = A ln r + B.
inline LogSplit single_split(cd k0, double r) {
    const cd z = k0 * r;
    if (std::abs(z) < kSeriesRadius) {
        const cd h2 = 0.25 * z * z;
        cd term = 1.0, j0 = 1.0, s = 0.0;
        double harmonic = 0.0;
        for (int k = 1; k < 60; ++k) {
            term *= -h2 / (static_cast<double>(k) * k);
            harmonic += 1.0 / k;
            j0 += term;
            s += harmonic * term;
            if (std::abs(term) * (1.0 + harmonic) < 1e-18) break;
        }
        const cd a = -j0 / (2.0 * kPi);
        const cd b = 0.25 * kI * j0 - j0 * (std::log(0.5 * k0) + kEulerGamma) / (2.0 * kPi) + s / (2.0 * kPi);
        return {a, b};
    }
    const auto j = special::bessel_j_array(0, z);
    const cd a = -j[0] / (2.0 * kPi);
    return {a, green_kernel(k0, r) - a * std::log(r)};
}

}  // namespace kernel
}  // namespace impstrip
