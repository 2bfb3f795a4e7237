#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "impstrip/chebyshev.hpp"
#include "impstrip/core.hpp"
#include "impstrip/quadrature.hpp"

namespace impstrip {

// antisymmetric: mu(x) = sqrt(a^2 - x^2) sum b_n U_n(x/a)
// symmetric:     sigma(x) = sum c_n T_n(x/a)
struct Density {
    Parity parity = Parity::antisymmetric;
    std::vector<cd> coeffs;
    double a = 1.0;

    int size() const { return static_cast<int>(coeffs.size()); }

    // mu or sigma at x = a cos(theta).
    cd at_theta(double theta) const {
        const double c = std::cos(theta);
        cd acc = 0.0;
        if (parity == Parity::antisymmetric) {
            // sin((n+1) theta) by the three-term recurrence
            double s_prev = 0.0, s = std::sin(theta);
            for (const cd& b : coeffs) {
                acc += b * s;
                const double next = 2.0 * c * s - s_prev;
                s_prev = s;
                s = next;
            }
            return a * acc;
        }
        double t_prev = c, t = 1.0;  // T_{-1} = T_1
        for (const cd& b : coeffs) {
            acc += b * t;
            const double next = 2.0 * c * t - t_prev;
            t_prev = t;
            t = next;
        }
        return acc;
    }

    // sum b_n U_n(s) (antisym) or sum c_n T_n(s) (sym), |s| <= 1.
    cd polynomial(double s) const {
        cd acc = 0.0;
        if (parity == Parity::antisymmetric) {
            double p_prev = 0.0, p = 1.0;
            for (const cd& b : coeffs) {
                acc += b * p;
                const double next = 2.0 * s * p - p_prev;
                p_prev = p;
                p = next;
            }
        } else {
            double p_prev = s, p = 1.0;
            for (const cd& b : coeffs) {
                acc += b * p;
                const double next = 2.0 * s * p - p_prev;
                p_prev = p;
                p = next;
            }
        }
        return acc;
    }

    cd value(double x) const {
        const double s = x / a;
        if (std::abs(s) >= 1.0) return parity == Parity::antisymmetric ? cd{0.0} : polynomial(std::clamp(s, -1.0, 1.0));
        if (parity == Parity::antisymmetric) return a * std::sqrt(1.0 - s * s) * polynomial(s);
        return polynomial(s);
    }

    Density mirrored() const {
        Density d = *this;
        for (std::size_t n = 1; n < d.coeffs.size(); n += 2) d.coeffs[n] = -d.coeffs[n];
        return d;
    }
};

struct SolveDiagnostics {
    int N = 0;
    double bc_residual = 0.0;
    double tail_decay = 0.0;
    double condition_estimate = 1.0;
    bool converged = true;
};

struct SolveOptions {
    // Edge log terms make the coefficients decay algebraically, so 1e-10 is
    // out of reach at any practical N.
    double tail_threshold = 1e-4;
    double rcond_min = 1e-14;
    int n_check = 64;
    bool throw_on_unconverged = false;
};

struct SolveResult {
    Density density;
    SolveDiagnostics diagnostics;
};

double boundary_residual(const Density& d, const ProblemConfig& cfg, int n_check);

namespace detail {

inline double tail_decay(const std::vector<cd>& c) {
    double mx = 0.0;
    for (const cd& v : c) mx = std::max(mx, std::abs(v));
    if (mx == 0.0) return 0.0;
    const int n = static_cast<int>(c.size());
    const int tail = std::max(1, (n + 9) / 10);
    double tmax = 0.0;
    for (int i = n - tail; i < n; ++i) tmax = std::max(tmax, std::abs(c[i]));
    return tmax / mx;
}

inline int inner_nodes(int N) { return 2 * N + 32; }

// Gauss-Chebyshev (second kind) nodes and weights, weight sqrt(1 - s^2).
struct UNodes {
    std::vector<double> s, w;
    explicit UNodes(int m) : s(m), w(m) {
        for (int j = 0; j < m; ++j) {
            const double th = (j + 1) * kPi / (m + 1);
            s[j] = std::cos(th);
            w[j] = kPi / (m + 1) * std::sin(th) * std::sin(th);
        }
    }
};

// Chebyshev (first kind) interpolation nodes.
struct TNodes {
    std::vector<double> s, coef, wsm;
    Eigen::MatrixXd tm;  // tm(l, j) = T_l(s_j)
    explicit TNodes(int m) : s(m), coef(m, 2.0 / m), wsm(m, 0.0), tm(m, m) {
        coef[0] = 1.0 / m;
        for (int j = 0; j < m; ++j) {
            s[j] = std::cos((j + 0.5) * kPi / m);
            const auto t = cheb::t_values(m, s[j]);
            for (int l = 0; l < m; ++l) {
                tm(l, j) = t[l];
                wsm[j] += cheb::t_integral(l) * coef[l] * t[l];
            }
        }
    }
};

inline cd eval_split(const kernel::LogSplit& s, double r) { return r > 0.0 ? s.a * std::log(r) + s.b : s.b; }

inline void check_solve(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, const SolveOptions& opt,
                        SolveDiagnostics& diag) {
    const double rc = lu.rcond();
    diag.condition_estimate = rc > 0.0 ? 1.0 / rc : INFINITY;
    if (!(rc >= opt.rcond_min))
        throw Error(ErrorKind::singular_system, "Galerkin system is numerically singular");
}

inline void finish(SolveResult& res, const ProblemConfig& cfg, const SolveOptions& opt) {
    auto& d = res.diagnostics;
    d.N = res.density.size();
    d.tail_decay = tail_decay(res.density.coeffs);
    d.bc_residual = boundary_residual(res.density, cfg, opt.n_check);
    d.converged = d.tail_decay <= opt.tail_threshold;
    if (!d.converged && opt.throw_on_unconverged)
        throw Error(ErrorKind::unconverged, "density coefficients did not decay below the tail threshold");
}

inline ProblemConfig mirrored_config(const ProblemConfig& cfg) {
    ProblemConfig m = cfg;
    m.theta_in = kPi - cfg.theta_in;
    return m;
}

}  // namespace detail

inline SolveResult solve_antisymmetric(const ProblemConfig& cfg, int N, const SolveOptions& opt = {}) {
    cfg.validate(true);
    if (N < 4) throw Error(ErrorKind::config, "basis size N must be >= 4");
    if (cfg.theta_in > 0.5 * kPi) {
        SolveResult r = solve_antisymmetric(detail::mirrored_config(cfg), N, opt);
        r.density = r.density.mirrored();
        detail::finish(r, cfg, opt);
        return r;
    }
    const double a = cfg.a;
    const cd k0 = cfg.k0;
    const int M = detail::inner_nodes(N);
    const detail::UNodes q(M);

    Eigen::MatrixXd um(M, M), lm(M, M);
    for (int j = 0; j < M; ++j) {
        const auto u = cheb::u_values(M, q.s[j]);
        const auto l = cheb::log_moments_u(M, q.s[j]);
        for (int n = 0; n < M; ++n) {
            um(n, j) = u[n];
            lm(n, j) = l[n];
        }
    }
    Eigen::MatrixXd lam = lm.transpose() * um;  // (i, j)
    for (int j = 0; j < M; ++j) lam.col(j) *= q.w[j] * 2.0 / kPi;

    Eigen::MatrixXcd ker(M, M);
    const double lna = std::log(a);
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            const auto sp = kernel::hypersingular_split(k0, a * std::abs(q.s[i] - q.s[j]));
            ker(i, j) = q.w[j] * (sp.a * lna + sp.b) + lam(i, j) * sp.a;
        }
    }
    Eigen::MatrixXd un = um.topRows(N);
    Eigen::MatrixXd unw = un;
    for (int j = 0; j < M; ++j) unw.col(j) *= q.w[j];
    Eigen::MatrixXcd A = std::pow(a, 4) * (unw.cast<cd>() * (ker * un.transpose().cast<cd>()));

    const auto g = special::gauss_legendre(2 * N + 4);
    Eigen::MatrixXd ug(N, g.x.size()), ugw(N, g.x.size());
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        const auto u = cheb::u_values(N, g.x[i]);
        for (int n = 0; n < N; ++n) {
            ug(n, i) = u[n];
            ugw(n, i) = u[n] * g.w[i] * (1.0 - g.x[i] * g.x[i]);
        }
    }
    const Eigen::MatrixXd mass = std::pow(a, 3) * ugw * ug.transpose();
    A -= 0.5 * cfg.eta * mass.cast<cd>();
    for (int n = 0; n < N; ++n) A(n, n) -= kPi * a * a * (n + 1) / 4.0;

    const cd ks = k_star(cfg);
    const cd amp = kI * k0 * std::sin(cfg.theta_in);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(N);
    for (int j = 0; j < M; ++j) {
        const cd f = amp * std::exp(-kI * ks * a * q.s[j]);
        for (int n = 0; n < N; ++n) rhs(n) += unw(n, j) * f;
    }
    rhs *= a * a;

    SolveResult res;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    detail::check_solve(lu, opt, res.diagnostics);
    const Eigen::VectorXcd b = lu.solve(rhs);
    res.density.parity = Parity::antisymmetric;
    res.density.a = a;
    res.density.coeffs.assign(b.data(), b.data() + N);
    detail::finish(res, cfg, opt);
    return res;
}

inline SolveResult solve_symmetric(const ProblemConfig& cfg, int N, const SolveOptions& opt = {}) {
    cfg.validate(true);
    if (N < 4) throw Error(ErrorKind::config, "basis size N must be >= 4");
    SolveResult res;
    res.density.parity = Parity::symmetric;
    res.density.a = cfg.a;
    if (cfg.eta == 0.0) {
        res.density.coeffs.assign(N, cd{0.0});
        detail::finish(res, cfg, opt);
        return res;
    }
    if (cfg.theta_in > 0.5 * kPi) {
        SolveResult r = solve_symmetric(detail::mirrored_config(cfg), N, opt);
        r.density = r.density.mirrored();
        detail::finish(r, cfg, opt);
        return r;
    }
    const double a = cfg.a;
    const cd k0 = cfg.k0;
    const int M = detail::inner_nodes(N);
    const int Q = detail::inner_nodes(N);
    const detail::TNodes t(M);
    const auto g = special::gauss_legendre(Q);

    Eigen::MatrixXd fm(Q, M);  // fm(i, l) = coef_l F_l(x_i)
    for (int i = 0; i < Q; ++i) {
        const auto f = cheb::log_moments_t(M, g.x[i]);
        for (int l = 0; l < M; ++l) fm(i, l) = t.coef[l] * f[l];
    }
    const Eigen::MatrixXd lam = fm * t.tm;  // (i, j)

    Eigen::MatrixXcd ker(Q, M);
    const double lna = std::log(a);
    for (int i = 0; i < Q; ++i) {
        for (int j = 0; j < M; ++j) {
            const auto sp = kernel::single_split(k0, a * std::abs(g.x[i] - t.s[j]));
            ker(i, j) = t.wsm[j] * (sp.a * lna + sp.b) + lam(i, j) * sp.a;
        }
    }
    Eigen::MatrixXd tn = t.tm.topRows(N);
    Eigen::MatrixXd tg(N, Q), tgw(N, Q);
    for (int i = 0; i < Q; ++i) {
        const auto v = cheb::t_values(N, g.x[i]);
        for (int n = 0; n < N; ++n) {
            tg(n, i) = v[n];
            tgw(n, i) = v[n] * g.w[i];
        }
    }
    const Eigen::MatrixXcd S = a * a * (tgw.cast<cd>() * (ker * tn.transpose().cast<cd>()));
    const Eigen::MatrixXd mass = a * tgw * tg.transpose();
    const Eigen::MatrixXcd A = -0.5 * mass.cast<cd>() - cfg.eta * S;

    const cd ks = k_star(cfg);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(N);
    for (int i = 0; i < Q; ++i) {
        const cd e = std::exp(-kI * ks * a * g.x[i]);
        for (int n = 0; n < N; ++n) rhs(n) += tgw(n, i) * e;
    }
    rhs *= cfg.eta * a;

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    detail::check_solve(lu, opt, res.diagnostics);
    const Eigen::VectorXcd c = lu.solve(rhs);
    res.density.coeffs.assign(c.data(), c.data() + N);
    detail::finish(res, cfg, opt);
    return res;
}

inline SolveResult solve(Parity p, const ProblemConfig& cfg, int N, const SolveOptions& opt = {}) {
    return p == Parity::antisymmetric ? solve_antisymmetric(cfg, N, opt) : solve_symmetric(cfg, N, opt);
}

namespace detail {

inline double theta_panel_width(int N) { return std::min(0.5, 8.0 / (N + 2)); }

// (T mu)(x) on the strip: static finite-part action plus product-log quadrature
// of the smooth remainder.
inline cd hypersingular_on_strip(const Density& d, cd k0, double x) {
    const double a = d.a, xi = x / a;
    const int N = d.size();
    const auto u = cheb::u_values(N, xi);
    cd stat = 0.0;
    for (int n = 0; n < N; ++n) stat -= 0.5 * (n + 1) * d.coeffs[n] * u[n];
    const int M = inner_nodes(N);
    const UNodes q(M);
    const auto lmom = cheb::log_moments_u(M, xi);
    const double lna = std::log(a);
    std::vector<cd> h(M);
    cd smooth = 0.0;
    for (int j = 0; j < M; ++j) {
        const auto sp = kernel::hypersingular_split(k0, a * std::abs(xi - q.s[j]));
        const cd p = d.polynomial(q.s[j]);
        smooth += q.w[j] * (sp.a * lna + sp.b) * p;
        h[j] = q.w[j] * sp.a * p;
    }
    cd logpart = 0.0;
    for (int j = 0; j < M; ++j) {
        const auto uj = cheb::u_values(M, q.s[j]);
        cd acc = 0.0;
        for (int l = 0; l < M; ++l) acc += uj[l] * lmom[l];
        logpart += acc * h[j];
    }
    return stat + a * a * (smooth + 2.0 / kPi * logpart);
}

// (S sigma)(x) on the strip.
inline cd single_layer_on_strip(const Density& d, cd k0, double x) {
    const double a = d.a, xi = x / a;
    const int M = inner_nodes(d.size());
    const TNodes t(M);
    const auto fmom = cheb::log_moments_t(M, xi);
    const double lna = std::log(a);
    std::vector<cd> h(M);
    cd smooth = 0.0;
    for (int j = 0; j < M; ++j) {
        const auto sp = kernel::single_split(k0, a * std::abs(xi - t.s[j]));
        const cd sg = d.polynomial(t.s[j]);
        smooth += t.wsm[j] * (sp.a * lna + sp.b) * sg;
        h[j] = sp.a * sg;
    }
    cd logpart = 0.0;
    for (int l = 0; l < M; ++l) {
        cd hl = 0.0;
        for (int j = 0; j < M; ++j) hl += t.tm(l, j) * h[j];
        logpart += t.coef[l] * fmom[l] * hl;
    }
    return a * (smooth + logpart);
}

}  // namespace detail

inline cd strip_trace(const Density& d, const ProblemConfig& cfg, double x) {
    if (!(std::abs(x) < d.a)) throw Error(ErrorKind::domain, "strip_trace: x must lie strictly inside the strip");
    if (d.parity == Parity::antisymmetric) return 0.5 * d.value(x);
    return detail::single_layer_on_strip(d, cfg.k0, x);
}

// Fixed rules for targets well away from the strip, reusable across many x.
struct FarRule {
    std::vector<double> s, w;
    static FarRule for_density(const Density& d) {
        FarRule r;
        if (d.parity == Parity::antisymmetric) {
            const detail::UNodes q(d.size() + 40);
            r.s = q.s;
            r.w = q.w;
        } else {
            const auto g = special::gauss_legendre(d.size() + 40);
            r.s = g.x;
            r.w = g.w;
        }
        return r;
    }
};

// d/dy u^a(x, +0) for |x| > a.
inline cd off_strip_normal_derivative(const Density& d, const ProblemConfig& cfg, double x,
                                      const FarRule* far = nullptr) {
    const double a = d.a, ax = std::abs(x);
    if (d.parity != Parity::antisymmetric)
        throw Error(ErrorKind::domain, "off_strip_normal_derivative needs an antisymmetric density");
    if (!(ax > a)) throw Error(ErrorKind::domain, "off_strip_normal_derivative: |x| must exceed a");
    const int N = d.size();
    const cd k0 = cfg.k0;
    if (ax - a > 0.5 * a) {
        const FarRule own = far ? FarRule{} : FarRule::for_density(d);
        const FarRule& q = far ? *far : own;
        cd acc = 0.0;
        for (std::size_t j = 0; j < q.s.size(); ++j)
            acc += q.w[j] * d.polynomial(q.s[j]) * green_kernel_dyy(k0, x - a * q.s[j]);
        return a * a * acc;
    }
    const double xi = ax / a;
    const double w = xi - std::sqrt(xi * xi - 1.0);
    const double root = std::sqrt((xi - 1.0) * (xi + 1.0));
    cd stat = 0.0;
    double wp = w;
    for (int n = 0; n < N; ++n) {
        const double sgn = (x < 0.0 && n % 2 == 1) ? -1.0 : 1.0;
        stat += sgn * (n + 1.0) * wp * d.coeffs[n] / (2.0 * root);
        wp *= w;
    }
    const double tstar = x > 0.0 ? 0.0 : kPi;
    const auto rule = quad::graded(0.0, kPi, tstar, 0.25 * std::sqrt(2.0 * (ax - a) / a),
                                   detail::theta_panel_width(N));
    cd rem = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
        const double th = rule.x[i];
        const double r = std::abs(x - a * std::cos(th));
        rem += rule.w[i] * d.at_theta(th) * std::sin(th) * detail::eval_split(kernel::hypersingular_split(k0, r), r);
    }
    return stat + a * rem;
}

// u^s(x, 0) for |x| > a.
inline cd off_strip_trace(const Density& d, const ProblemConfig& cfg, double x, const FarRule* far = nullptr) {
    const double a = d.a, ax = std::abs(x);
    if (d.parity != Parity::symmetric) throw Error(ErrorKind::domain, "off_strip_trace needs a symmetric density");
    if (!(ax > a)) throw Error(ErrorKind::domain, "off_strip_trace: |x| must exceed a");
    const cd k0 = cfg.k0;
    const int N = d.size();
    quad::Rule rule;
    if (ax - a > 0.5 * a) {
        const FarRule q = far ? *far : FarRule::for_density(d);
        rule.x = q.s;
        rule.w = q.w;
    } else {
        rule = quad::graded(-1.0, 1.0, x > 0.0 ? 1.0 : -1.0, 0.25 * (ax - a) / a, detail::theta_panel_width(N));
    }
    cd acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i)
        acc += rule.w[i] * d.polynomial(rule.x[i]) * green_kernel(k0, std::abs(x - a * rule.x[i]));
    return a * acc;
}

// Layer potential at (x, y), y >= 0. On y = 0 inside the strip the one-sided
// (+0) trace is returned only when trace is set.
inline cd scattered_field(const Density& d, const ProblemConfig& cfg, double x, double y, bool trace = false) {
    const double a = d.a;
    const cd k0 = cfg.k0;
    const int N = d.size();
    if (y < 0.0) throw Error(ErrorKind::domain, "scattered_field: y must be >= 0");
    if (y == 0.0) {
        if (std::abs(x) < a) {
            if (!trace) throw Error(ErrorKind::domain, "scattered_field: evaluation on the strip needs the trace flag");
            return strip_trace(d, cfg, x);
        }
        if (d.parity == Parity::antisymmetric) return 0.0;
        if (std::abs(x) == a) throw Error(ErrorKind::domain, "scattered_field: edge point");
        return off_strip_trace(d, cfg, x);
    }
    const double tclamp = std::clamp(x, -a, a);
    const double dist = std::hypot(x - tclamp, y);
    const double thstar = std::acos(tclamp / a);
    const double sth = std::sin(thstar);
    double hmin = 0.25 * std::sqrt(2.0 * dist / a);
    if (sth * a > dist) hmin = std::min(hmin, 0.25 * dist / (a * sth));
    const double width = detail::theta_panel_width(N);

    if (d.parity == Parity::antisymmetric) {
        const cd zeta = cd{x, y} / a;
        const cd w = cheb::joukowski_inner(zeta);
        cd stat = 0.0, wp = w;
        for (int n = 0; n < N; ++n) {
            stat += d.coeffs[n] * (-0.5 * a * wp.imag());
            wp *= w;
        }
        const auto rule = quad::graded(0.0, kPi, thstar, hmin, width);
        cd rem = 0.0;
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            const double th = rule.x[i];
            const double r = std::hypot(x - a * std::cos(th), y);
            rem += rule.w[i] * d.at_theta(th) * std::sin(th) * detail::eval_split(kernel::hypersingular_split(k0, r), r);
        }
        return stat + a * y * rem;
    }
    const auto rule = quad::graded(-1.0, 1.0, tclamp / a, 0.25 * dist / a, width);
    cd acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i)
        acc += rule.w[i] * d.polynomial(rule.x[i]) * green_kernel(k0, std::hypot(x - a * rule.x[i], y));
    return a * acc;
}

inline double boundary_residual(const Density& d, const ProblemConfig& cfg, int n_check) {
    const double a = d.a;
    const cd ks = k_star(cfg);
    double num = 0.0, den = 0.0;
    const bool zero = std::all_of(d.coeffs.begin(), d.coeffs.end(), [](const cd& c) { return c == 0.0; });
    for (int i = 0; i < n_check; ++i) {
        const double x = a * std::cos((i + 0.5) * kPi / n_check);
        const cd e = std::exp(-kI * ks * x);
        cd res, rhs;
        if (d.parity == Parity::antisymmetric) {
            rhs = kI * cfg.k0 * std::sin(cfg.theta_in) * e;
            const cd tmu = zero ? cd{0.0} : detail::hypersingular_on_strip(d, cfg.k0, x);
            res = tmu - 0.5 * cfg.eta * d.value(x) - rhs;
        } else {
            rhs = cfg.eta * e;
            const cd s = zero ? cd{0.0} : detail::single_layer_on_strip(d, cfg.k0, x);
            res = -0.5 * d.value(x) - cfg.eta * s - rhs;
        }
        num = std::max(num, std::abs(res));
        den = std::max(den, std::abs(rhs));
    }
    return den > 0.0 ? num / den : num;
}

}  // namespace impstrip
