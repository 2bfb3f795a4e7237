#pragma once

// Bessel and Hankel functions of complex argument, only the orders the strip
// kernels need. J_n by Miller backward recurrence, Y_0/Y_1 by Neumann series
// below kHankelSwitch, large-argument Hankel expansion above.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace impstrip {

using cd = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kEulerGamma = std::numbers::egamma;
inline constexpr cd kI{0.0, 1.0};

namespace special {

inline constexpr double kHankelSwitch = 17.0;

namespace detail {

inline int miller_start(int nmax, double az) {
    int m0 = std::max(nmax, static_cast<int>(std::ceil(az)));
    int start = m0 + 30 + static_cast<int>(4.0 * std::sqrt(static_cast<double>(m0)));
    return start + (start & 1);
}

}  // namespace detail

// J_0 .. J_nmax at z.
inline std::vector<cd> bessel_j_array(int nmax, cd z) {
    std::vector<cd> out(static_cast<std::size_t>(nmax) + 1, cd{0.0});
    if (std::abs(z) == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const int start = detail::miller_start(nmax, std::abs(z));
    std::vector<cd> f(static_cast<std::size_t>(start) + 2, cd{0.0});
    f[start] = 1e-30;
    const cd two_over_z = 2.0 / z;
    for (int n = start; n >= 1; --n) {
        f[n - 1] = static_cast<double>(n) * two_over_z * f[n] - f[n + 1];
        if (std::abs(f[n - 1]) > 1e200) {
            for (int j = n - 1; j <= start; ++j) f[j] *= 1e-200;
        }
    }
    // e^{-iz} = J0 + 2 sum (-i)^n J_n for Im z >= 0, e^{iz} with i^n otherwise;
    // the choice keeps the sum free of cancellation.
    const bool upper = z.imag() >= 0.0;
    const cd unit = upper ? cd{0.0, -1.0} : cd{0.0, 1.0};
    cd phase = 1.0, sum = f[0];
    for (int n = 1; n <= start; ++n) {
        phase *= unit;
        sum += 2.0 * phase * f[n];
    }
    const cd target = upper ? std::exp(-kI * z) : std::exp(kI * z);
    const cd scale = target / sum;
    for (int n = 0; n <= nmax; ++n) out[n] = f[n] * scale;
    return out;
}

inline cd bessel_j(int n, cd z) { return bessel_j_array(n, z)[n]; }

inline cd hankel_asymptotic(int nu, cd z) {
    const double mu = 4.0 * nu * nu;
    cd term = 1.0, sum = 1.0;
    double prev = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= kI * (mu - odd * odd) / (8.0 * k * z);
        const double mag = std::abs(term);
        if (mag > prev) break;
        sum += term;
        prev = mag;
        if (mag < 1e-17 * std::abs(sum)) break;
    }
    const cd omega = z - (0.5 * nu + 0.25) * kPi;
    return std::sqrt(2.0 / (kPi * z)) * std::exp(kI * omega) * sum;
}

struct Hankel01 {
    cd h0;
    cd h1;
};

// H_0^(1)(z) and H_1^(1)(z), z != 0, Re z >= 0.
inline Hankel01 hankel01(cd z) {
    if (std::abs(z) > kHankelSwitch) return {hankel_asymptotic(0, z), hankel_asymptotic(1, z)};
    const int start = detail::miller_start(2, std::abs(z));
    const auto j = bessel_j_array(start, z);
    const cd lg = std::log(0.5 * z) + kEulerGamma;
    cd s0 = 0.0, s1 = 0.0;
    double sign = -1.0;
    for (int k = 1; 2 * k + 1 <= start; ++k) {
        s0 += sign * j[2 * k] / static_cast<double>(k);
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / static_cast<double>(k);
        sign = -sign;
    }
    const cd y0 = (2.0 / kPi) * (lg * j[0] - 2.0 * s0);
    const cd y1 = -2.0 / (kPi * z) * j[0] + (2.0 / kPi) * (lg * j[1] + s1);
    return {j[0] + kI * y0, j[1] + kI * y1};
}

inline cd hankel1_0(cd z) { return std::abs(z) > kHankelSwitch ? hankel_asymptotic(0, z) : hankel01(z).h0; }
inline cd hankel1_1(cd z) { return std::abs(z) > kHankelSwitch ? hankel_asymptotic(1, z) : hankel01(z).h1; }

// Spherical j_0 .. j_lmax at z.
inline std::vector<cd> spherical_j_array(int lmax, cd z) {
    std::vector<cd> out(static_cast<std::size_t>(lmax) + 1, cd{0.0});
    if (std::abs(z) == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const int start = detail::miller_start(std::max(lmax, 1), std::abs(z));
    std::vector<cd> f(static_cast<std::size_t>(start) + 2, cd{0.0});
    f[start] = 1e-30;
    for (int l = start; l >= 1; --l) {
        f[l - 1] = (2.0 * l + 1.0) / z * f[l] - f[l + 1];
        if (std::abs(f[l - 1]) > 1e200) {
            for (int j = l - 1; j <= start; ++j) f[j] *= 1e-200;
        }
    }
    cd scale;
    if (std::abs(z) < 1.0) {
        scale = (std::sin(z) / z) / f[0];
    } else {
        const cd j0 = std::sin(z) / z;
        const cd j1 = (j0 - std::cos(z)) / z;
        scale = std::abs(j0) >= std::abs(j1) ? j0 / f[0] : j1 / f[1];
    }
    for (int l = 0; l <= lmax; ++l) out[l] = f[l] * scale;
    return out;
}

struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

// Gauss-Legendre rule on [-1, 1].
inline GaussRule gauss_legendre(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = w;
        r.w[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

}  // namespace special
}  // namespace impstrip
