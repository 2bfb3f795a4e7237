#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "impstrip/special.hpp"

namespace impstrip::cheb {

// T_0 .. T_{n-1} at x (any real x).
inline std::vector<double> t_values(int n, double x) {
    std::vector<double> t(static_cast<std::size_t>(std::max(n, 2)));
    t[0] = 1.0;
    t[1] = x;
    for (int k = 2; k < n; ++k) t[k] = 2.0 * x * t[k - 1] - t[k - 2];
    t.resize(n);
    return t;
}

// U_0 .. U_{n-1} at x.
inline std::vector<double> u_values(int n, double x) {
    std::vector<double> u(static_cast<std::size_t>(std::max(n, 2)));
    u[0] = 1.0;
    u[1] = 2.0 * x;
    for (int k = 2; k < n; ++k) u[k] = 2.0 * x * u[k - 1] - u[k - 2];
    u.resize(n);
    return u;
}

// int_{-1}^{1} sqrt(1-s^2) U_l(s) ln|xi - s| ds, l = 0..n-1, |xi| <= 1.
inline std::vector<double> log_moments_u(int n, double xi) {
    const auto t = t_values(n + 2, xi);
    std::vector<double> out(n);
    out[0] = 0.5 * kPi * (-std::log(2.0) + 0.5 * t[2]);
    for (int m = 1; m < n; ++m) out[m] = 0.5 * kPi * (t[m + 2] / (m + 2) - t[m] / m);
    return out;
}

inline double t_integral(int m) { return m == 1 ? 0.0 : (1.0 + (m % 2 == 0 ? 1.0 : -1.0)) / (1.0 - double(m) * m); }

// int_{-1}^{1} T_l(s) ln|xi - s| ds, l = 0..n-1, |xi| < 1 (forward recurrence,
// unstable outside the interval).
inline std::vector<double> log_moments_t(int n, double xi) {
    const auto t = t_values(n + 2, xi);
    std::vector<double> d(static_cast<std::size_t>(n) + 2);
    d[0] = 0.0;
    d[1] = -2.0;
    for (int m = 1; m <= n; ++m) d[m + 1] = 2.0 * xi * d[m] - d[m - 1] - 2.0 * t_integral(m);
    const double lp = std::log(std::abs(1.0 - xi));
    const double lm = std::log(std::abs(1.0 + xi));
    const double lr = lm - lp;
    std::vector<double> g(static_cast<std::size_t>(n) + 1);
    for (int l = 0; l <= n; ++l) {
        const double p = t[l + 1] * lr + d[l + 1];
        const double sgn = (l % 2 == 0) ? -1.0 : 1.0;  // (-1)^{l+1}
        g[l] = (lp - sgn * lm + p) / (l + 1);
    }
    std::vector<double> f(n);
    f[0] = g[0];
    if (n > 1) f[1] = 0.5 * g[1];
    for (int l = 2; l < n; ++l) f[l] = 0.5 * (g[l] - g[l - 2]);
    return f;
}

// Inverse Joukowski map: w = z - sqrt(z^2 - 1) with |w| <= 1, cut on [-1, 1].
inline cd joukowski_inner(cd z) {
    const cd s = std::sqrt(z - 1.0) * std::sqrt(z + 1.0);
    const cd plus = z + s;
    return std::abs(plus) >= 1.0 ? 1.0 / plus : plus;
}

}  // namespace impstrip::cheb
