#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "impstrip/bie.hpp"
#include "impstrip/report.hpp"

namespace impstrip {

struct TailOptions {
    bool build = true;
    double tol = 1e-10;
    int nodes_per_panel = 20;
    double max_extent = 5e4;  // refuse X - a beyond this
};

// Spectral functions of one parity tied to a solved density. The semi-infinite
// transforms use boundary data sampled once at fixed tail nodes.
struct SpectralBundle {
    Parity parity = Parity::antisymmetric;
    Density density;
    ProblemConfig cfg;
    std::vector<cd> legendre;  // symmetric: Legendre coefficients of sigma(a s)

    bool has_tails = false;
    double tail_tol = 0.0;
    double X = 0.0;  // truncation point
    std::vector<double> tail_x, tail_w;  // nodes on (a, X]
    std::vector<cd> g_right, g_left;     // boundary data at +x_j and -x_j
};

namespace detail {

inline std::vector<cd> legendre_coefficients(const Density& d) {
    const int n = d.size();
    const auto g = special::gauss_legendre(n + 2);
    std::vector<cd> p(n, cd{0.0});
    std::vector<double> pl(n);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double x = g.x[i];
        pl[0] = 1.0;
        if (n > 1) pl[1] = x;
        for (int l = 2; l < n; ++l) pl[l] = ((2.0 * l - 1.0) * x * pl[l - 1] - (l - 1.0) * pl[l - 2]) / l;
        const cd s = d.polynomial(x) * g.w[i];
        for (int l = 0; l < n; ++l) p[l] += (l + 0.5) * pl[l] * s;
    }
    return p;
}

inline cd boundary_datum(const SpectralBundle& b, double x, const FarRule& far) {
    return b.parity == Parity::antisymmetric ? off_strip_normal_derivative(b.density, b.cfg, x, &far)
                                             : off_strip_trace(b.density, b.cfg, x, &far);
}

inline void build_tails(SpectralBundle& b, const TailOptions& opt) {
    const double ik = b.cfg.k0.imag();
    const double a = b.cfg.a;
    if (!(ik > 0.0)) throw Error(ErrorKind::tail_not_decaying, "tail transforms need Im(k0) > 0");
    const double extent = std::log(1.0 / opt.tol) / ik;
    if (extent > opt.max_extent)
        throw Error(ErrorKind::tail_not_decaying, "Im(k0) too small for the requested tail tolerance");
    b.X = a + extent;
    b.tail_tol = opt.tol;
    const double edge_len = std::min(a, extent);
    const double root = std::sqrt(edge_len);
    // x = a + u^2 absorbs the (x - a)^{-1/2} edge behaviour
    const auto ur = quad::graded(0.0, root, 0.0, root * std::pow(2.0, -12), root / 8.0, opt.nodes_per_panel);
    for (std::size_t i = 0; i < ur.x.size(); ++i) {
        const double u = ur.x[i];
        b.tail_x.push_back(a + u * u);
        b.tail_w.push_back(2.0 * u * ur.w[i]);
    }
    const auto far = quad::uniform(a + edge_len, b.X, kPi / b.cfg.k0.real(), opt.nodes_per_panel);
    b.tail_x.insert(b.tail_x.end(), far.x.begin(), far.x.end());
    b.tail_w.insert(b.tail_w.end(), far.w.begin(), far.w.end());
    b.g_right.resize(b.tail_x.size());
    b.g_left.resize(b.tail_x.size());
    const auto far_rule = FarRule::for_density(b.density);
    for (std::size_t j = 0; j < b.tail_x.size(); ++j) {
        b.g_right[j] = boundary_datum(b, b.tail_x[j], far_rule);
        b.g_left[j] = boundary_datum(b, -b.tail_x[j], far_rule);
    }
    b.has_tails = true;
}

inline void require_parity(const SpectralBundle& b, Parity p, const char* what) {
    if (b.parity != p) throw Error(ErrorKind::domain, std::string(what) + ": wrong parity bundle");
}

inline void require_tails(const SpectralBundle& b, cd k, bool right) {
    if (!b.has_tails) throw Error(ErrorKind::domain, "bundle was built without tail data");
    const double rate = b.cfg.k0.imag() + (right ? k.imag() : -k.imag());
    if (!(rate > 0.0) || std::exp(-rate * (b.X - b.cfg.a)) > 1e-3)
        throw Error(ErrorKind::tail_not_decaying, "tail integrand does not decay within the truncation window at this k");
}

}  // namespace detail

inline SpectralBundle make_bundle(const Density& d, const ProblemConfig& cfg, const TailOptions& opt = {}) {
    SpectralBundle b;
    b.parity = d.parity;
    b.density = d;
    b.cfg = cfg;
    if (d.parity == Parity::symmetric) b.legendre = detail::legendre_coefficients(d);
    if (opt.build) detail::build_tails(b, opt);
    return b;
}

// (1/2) int mu e^{ikx}: closed form from the J_{n+1} image of sqrt(1-t^2) U_n.
inline cd u0_tilde(const SpectralBundle& b, cd k) {
    detail::require_parity(b, Parity::antisymmetric, "u0_tilde");
    const auto& c = b.density.coeffs;
    const int n = static_cast<int>(c.size());
    const double a = b.cfg.a;
    if (n == 0) return 0.0;
    const cd z = k * a;
    if (std::abs(z) == 0.0) return 0.25 * kPi * a * a * c[0];
    const auto j = special::bessel_j_array(n, z);
    cd acc = 0.0, in = 1.0;
    for (int m = 0; m < n; ++m) {
        acc += in * (m + 1.0) * c[m] * j[m + 1];
        in *= kI;
    }
    return 0.5 * kPi * a * a * acc / z;
}

// -(1/2) int sigma e^{ikx}: Legendre re-expansion and spherical Bessel image.
inline cd v0_tilde(const SpectralBundle& b, cd k) {
    detail::require_parity(b, Parity::symmetric, "v0_tilde");
    const int n = static_cast<int>(b.legendre.size());
    if (n == 0) return 0.0;
    const double a = b.cfg.a;
    const auto j = special::spherical_j_array(n - 1, k * a);
    cd acc = 0.0, il = 1.0;
    for (int l = 0; l < n; ++l) {
        acc += il * b.legendre[l] * j[l];
        il *= kI;
    }
    return -a * acc;
}

inline cd tilde0(const SpectralBundle& b, cd k) {
    return b.parity == Parity::antisymmetric ? u0_tilde(b, k) : v0_tilde(b, k);
}

inline cd u0(const SpectralBundle& b, cd k) {
    return (b.cfg.eta - kI * xi(k, b.cfg)) * u0_tilde(b, k);
}

inline cd v0(const SpectralBundle& b, cd k) {
    if (b.cfg.eta == 0.0) throw Error(ErrorKind::domain, "V0 is undefined for eta = 0");
    const cd x = xi(k, b.cfg);
    return kI * (b.cfg.eta - kI * x) * v0_tilde(b, k) / (b.cfg.eta * x);
}

inline cd zero_function(const SpectralBundle& b, cd k) {
    return b.parity == Parity::antisymmetric ? u0(b, k) : v0(b, k);
}

inline cd check_plus(const SpectralBundle& b, cd k) {
    detail::require_tails(b, k, true);
    cd acc = 0.0;
    for (std::size_t j = 0; j < b.tail_x.size(); ++j) acc += b.tail_w[j] * b.g_right[j] * std::exp(kI * k * b.tail_x[j]);
    return acc;
}

inline cd check_minus(const SpectralBundle& b, cd k) {
    detail::require_tails(b, k, false);
    cd acc = 0.0;
    for (std::size_t j = 0; j < b.tail_x.size(); ++j) acc += b.tail_w[j] * b.g_left[j] * std::exp(-kI * k * b.tail_x[j]);
    return acc;
}

inline cd pole_amplitude(const SpectralBundle& b) {
    return b.parity == Parity::antisymmetric ? b.cfg.k0 * std::sin(b.cfg.theta_in) : kI;
}

inline cd plus_function(const SpectralBundle& b, cd k) {
    const cd ks = k_star(b.cfg);
    return check_plus(b, k) + pole_amplitude(b) * std::exp(kI * (k - ks) * b.cfg.a) / (k - ks);
}

inline cd minus_function(const SpectralBundle& b, cd k) {
    const cd ks = k_star(b.cfg);
    return check_minus(b, k) - pole_amplitude(b) * std::exp(-kI * (k - ks) * b.cfg.a) / (k - ks);
}

inline cd u_plus(const SpectralBundle& b, cd k) {
    detail::require_parity(b, Parity::antisymmetric, "u_plus");
    return plus_function(b, k);
}
inline cd u_minus(const SpectralBundle& b, cd k) {
    detail::require_parity(b, Parity::antisymmetric, "u_minus");
    return minus_function(b, k);
}
inline cd v_plus(const SpectralBundle& b, cd k) {
    detail::require_parity(b, Parity::symmetric, "v_plus");
    return plus_function(b, k);
}
inline cd v_minus(const SpectralBundle& b, cd k) {
    detail::require_parity(b, Parity::symmetric, "v_minus");
    return minus_function(b, k);
}

inline bool near_pole(const SpectralBundle& b, cd k, double radius_factor = 1e-3) {
    return std::abs(k - k_star(b.cfg)) < radius_factor * std::abs(b.cfg.k0);
}

inline double functional_residual_at(const SpectralBundle& b, cd k) {
    const cd m = minus_function(b, k), z = zero_function(b, k), p = plus_function(b, k);
    const double scale = std::max(std::abs(m), std::abs(p));
    return scale > 0.0 ? std::abs(m + z + p) / scale : std::abs(m + z + p);
}

inline double functional_residual(const SpectralBundle& b, const std::vector<double>& k_grid) {
    double worst = 0.0;
    for (double k : k_grid) worst = std::max(worst, functional_residual_at(b, k));
    return worst;
}

struct DirectivityTable {
    std::vector<double> theta;
    std::vector<cd> sa, ss, s;
    ProblemConfig cfg;
};

// Far-field coefficients in the exp(i k0 r)/sqrt(2 pi k0 r) normalization.
inline cd directivity_a(const SpectralBundle& b, double theta) {
    const cd ph = std::exp(cd{0.0, -0.25 * kPi});
    return ph * b.cfg.k0 * std::sin(theta) * u0_tilde(b, -b.cfg.k0 * std::cos(theta));
}

inline cd directivity_s(const SpectralBundle& b, double theta) {
    const cd ph = std::exp(cd{0.0, -0.25 * kPi});
    return -kI * ph * v0_tilde(b, -b.cfg.k0 * std::cos(theta));
}

inline DirectivityTable directivity(const SpectralBundle& ba, const SpectralBundle& bs,
                                    const std::vector<double>& theta_grid) {
    DirectivityTable t;
    t.cfg = ba.cfg;
    t.theta = theta_grid;
    for (double th : theta_grid) {
        t.sa.push_back(directivity_a(ba, th));
        t.ss.push_back(directivity_s(bs, th));
        t.s.push_back(t.sa.back() + t.ss.back());
    }
    return t;
}

inline std::vector<double> theta_grid(int count) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = count == 1 ? 0.5 * kPi : kPi * i / (count - 1);
    return g;
}

// Plane-wave weighted quadrature of the density, independent of the Bessel
// images used by directivity().
inline cd farfield_oracle(const Density& d, const ProblemConfig& cfg, double theta) {
    const double a = d.a;
    const cd kc = cfg.k0 * std::cos(theta);
    const cd ph = std::exp(cd{0.0, -0.25 * kPi});
    const int n = std::max(d.size(), 4);
    const auto rule = quad::uniform(0.0, kPi, std::min(0.25, 6.0 / (n + 2)), 20);
    cd acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
        const double th = rule.x[i];
        const double t = a * std::cos(th);
        acc += rule.w[i] * a * std::sin(th) * d.at_theta(th) * std::exp(-kI * kc * t);
    }
    if (d.parity == Parity::antisymmetric) return ph * cfg.k0 * std::sin(theta) * 0.5 * acc;
    return -kI * ph * (-0.5) * acc;
}

// Embedding kernels with the bundle solved at incidence parameter kappa.
inline cd embedding_kernel(const SpectralBundle& at_kappa, cd k) {
    const cd kappa = k_star(at_kappa.cfg);
    if (at_kappa.parity == Parity::antisymmetric)
        return (k - kappa) * u0_tilde(at_kappa, k) / xi(kappa, at_kappa.cfg);
    if (at_kappa.cfg.eta == 0.0) throw Error(ErrorKind::domain, "symmetric embedding kernel undefined for eta = 0");
    return (k - kappa) * v0_tilde(at_kappa, k) / (kI * at_kappa.cfg.eta);
}

struct EmbeddingOptions {
    int N = 64;
    double tolerance = 1e-6;
};

inline VerificationReport embedding_rank_test(const ProblemConfig& cfg, Parity parity,
                                              const std::vector<double>& incidences,
                                              const std::vector<double>& k_points,
                                              const EmbeddingOptions& opt = {}) {
    VerificationReport rep;
    const std::string id = std::string("embedding-rank-") + to_string(parity);
    if (incidences.size() < 3 || k_points.size() < 3) {
        rep.add(skipped_check(id, "insufficient data: rank test needs >= 3 incidences and >= 3 k-points"));
        return rep;
    }
    const int m = static_cast<int>(k_points.size()), n = static_cast<int>(incidences.size());
    Eigen::MatrixXcd W(m, n);
    for (int j = 0; j < n; ++j) {
        ProblemConfig c = cfg;
        c.theta_in = incidences[j];
        const auto sol = solve(parity, c, opt.N);
        const auto b = make_bundle(sol.density, c, TailOptions{.build = false});
        for (int i = 0; i < m; ++i) W(i, j) = embedding_kernel(b, k_points[i]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(W);
    const auto& sv = svd.singularValues();
    auto c = make_check(id, sv(2) / sv(0), opt.tolerance);
    c.provenance["N"] = opt.N;
    c.provenance["incidences"] = static_cast<int>(n);
    c.provenance["k_points"] = static_cast<int>(m);
    c.provenance["sigma2_over_sigma1"] = sv(1) / sv(0);
    rep.add(c);
    return rep;
}

// max |W(k_i, k_j) + W(k_j, k_i)| / max |W| over pairs of solved incidences.
inline double embedding_antisymmetry(const ProblemConfig& cfg, Parity parity, const std::vector<double>& incidences,
                                     int N = 64) {
    std::vector<SpectralBundle> bs;
    std::vector<cd> kap;
    for (double th : incidences) {
        ProblemConfig c = cfg;
        c.theta_in = th;
        bs.push_back(make_bundle(solve(parity, c, N).density, c, TailOptions{.build = false}));
        kap.push_back(k_star(c));
    }
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < bs.size(); ++i)
        for (std::size_t j = 0; j < bs.size(); ++j) {
            const cd wij = embedding_kernel(bs[j], kap[i]);
            scale = std::max(scale, std::abs(wij));
            if (i < j) worst = std::max(worst, std::abs(wij + embedding_kernel(bs[i], kap[j])));
        }
    return scale > 0.0 ? worst / scale : 0.0;
}

enum class Ray { upper_imaginary, lower_imaginary };

struct GrowthOptions {
    double exponent_shift = 0.0;  // negative controls
    double slope_tolerance = 0.05;
};

struct GrowthSample {
    std::string function;
    std::vector<double> t, compensated;
    double slope = 0.0;
};

namespace detail {

inline double log_slope(const std::vector<double>& t, const std::vector<double>& m, double t_from) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_from) continue;
        const double x = std::log(t[i]), y = std::log(m[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

inline std::vector<GrowthSample> growth_samples(const SpectralBundle& b, Ray ray, const std::vector<double>& t_grid,
                                                const GrowthOptions& opt = {}) {
    const bool anti = b.parity == Parity::antisymmetric;
    const double p = (anti ? 0.5 : 1.0) + opt.exponent_shift;
    const double a = b.cfg.a;
    const bool up = ray == Ray::upper_imaginary;
    std::vector<GrowthSample> out;
    // half-line function decays like e^{-t a}; the strip function grows like e^{t a}
    const std::string half = up ? (anti ? "U+" : "V+") : (anti ? "U-" : "V-");
    const std::string mid = anti ? "U0" : "V0";
    for (int which = 0; which < 2; ++which) {
        GrowthSample s;
        s.function = which == 0 ? half : mid;
        for (double t : t_grid) {
            const cd k = up ? cd{0.0, t} : cd{0.0, -t};
            cd f;
            if (which == 0) f = up ? plus_function(b, k) : minus_function(b, k);
            else f = zero_function(b, k);
            const double envelope = which == 0 ? std::exp(-t * a) : std::exp(t * a);
            double m = std::abs(f) * std::pow(t, p) / envelope;
            if (!anti) m /= std::max(1.0, std::log(t));
            s.t.push_back(t);
            s.compensated.push_back(m);
        }
        s.slope = detail::log_slope(s.t, s.compensated, 2.0 * std::abs(b.cfg.k0));
        out.push_back(std::move(s));
    }
    return out;
}

inline VerificationReport growth_scan(const SpectralBundle& b, Ray ray, const std::vector<double>& t_grid,
                                      const GrowthOptions& opt = {}) {
    VerificationReport rep;
    for (const auto& s : growth_samples(b, ray, t_grid, opt)) {
        auto c = make_check("growth-" + s.function + (ray == Ray::upper_imaginary ? "-upper" : "-lower"), s.slope,
                            opt.slope_tolerance);
        c.provenance["exponent_shift"] = opt.exponent_shift;
        c.provenance["t_min"] = t_grid.front();
        c.provenance["t_max"] = t_grid.back();
        c.note = "value is the log-log slope of the compensated magnitude beyond t = 2|k0|";
        rep.add(c);
    }
    return rep;
}

struct Rectangle {
    cd lower_left;
    cd upper_right;
};

// Counter-clockwise contour integral of f around the rectangle.
inline cd contour_integral(const std::function<cd(cd)>& f, const Rectangle& r, int panels = 8, int nodes = 16,
                           double* max_abs = nullptr, double* perimeter = nullptr) {
    const cd c[4] = {r.lower_left, {r.upper_right.real(), r.lower_left.imag()}, r.upper_right,
                     {r.lower_left.real(), r.upper_right.imag()}};
    const auto g = special::gauss_legendre(nodes);
    cd acc = 0.0;
    double mx = 0.0, per = 0.0;
    for (int side = 0; side < 4; ++side) {
        const cd p0 = c[side], p1 = c[(side + 1) % 4];
        per += std::abs(p1 - p0);
        for (int pn = 0; pn < panels; ++pn) {
            const cd q0 = p0 + (p1 - p0) * (double(pn) / panels);
            const cd q1 = p0 + (p1 - p0) * (double(pn + 1) / panels);
            const cd half = 0.5 * (q1 - q0), mid = 0.5 * (q1 + q0);
            for (int i = 0; i < nodes; ++i) {
                const cd v = f(mid + half * g.x[i]);
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                    throw Error(ErrorKind::contour_singularity, "contour passes through a singularity");
                mx = std::max(mx, std::abs(v));
                acc += g.w[i] * half * v;
            }
        }
    }
    if (max_abs) *max_abs = mx;
    if (perimeter) *perimeter = per;
    return acc;
}

inline double cauchy_analyticity_test(const std::function<cd(cd)>& f, const Rectangle& r) {
    double mx = 0.0, per = 0.0;
    const cd I = contour_integral(f, r, 8, 16, &mx, &per);
    return mx > 0.0 ? std::abs(I) / (per * mx) : 0.0;
}

struct PhysicsOptions {
    int N = 64;
    int theta_nodes = 128;
};

inline cd total_directivity(const ProblemConfig& cfg, double theta, int N) {
    const auto a = make_bundle(solve_antisymmetric(cfg, N).density, cfg, TailOptions{.build = false});
    const auto s = make_bundle(solve_symmetric(cfg, N).density, cfg, TailOptions{.build = false});
    return directivity_a(a, theta) + directivity_s(s, theta);
}

inline VerificationReport reciprocity_check(const ProblemConfig& cfg,
                                            const std::vector<std::pair<double, double>>& theta_pairs,
                                            const PhysicsOptions& opt = {}, double tolerance = 1e-6) {
    double worst = 0.0;
    for (const auto& [t1, t2] : theta_pairs) {
        ProblemConfig c1 = cfg, c2 = cfg;
        c1.theta_in = t2;
        c2.theta_in = t1;
        const cd s12 = total_directivity(c1, t1, opt.N);
        const cd s21 = total_directivity(c2, t2, opt.N);
        const double sc = std::max(std::abs(s12), std::abs(s21));
        if (sc > 0.0) worst = std::max(worst, std::abs(s12 - s21) / sc);
    }
    VerificationReport rep;
    auto c = make_check("reciprocity", worst, tolerance);
    c.provenance["pairs"] = static_cast<int>(theta_pairs.size());
    c.provenance["N"] = opt.N;
    rep.add(c);
    return rep;
}

struct PowerBalance {
    double scattered = 0.0;
    double extinction = 0.0;
    double absorbed = 0.0;
};

// Optical theorem in the exp(i k0 r)/sqrt(2 pi k0 r) normalization:
// P_sc = (1/2pi) int_0^{2pi} |S|^2, P_ext = -2 Re(e^{i pi/4} S(forward)).
inline PowerBalance power_balance(const ProblemConfig& cfg, const PhysicsOptions& opt = {}) {
    const auto ba = make_bundle(solve_antisymmetric(cfg, opt.N).density, cfg, TailOptions{.build = false});
    const auto bs = make_bundle(solve_symmetric(cfg, opt.N).density, cfg, TailOptions{.build = false});
    const auto g = special::gauss_legendre(opt.theta_nodes);
    double sc = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double th = 0.5 * kPi * (g.x[i] + 1.0);
        sc += 0.5 * kPi * g.w[i] * (std::norm(directivity_a(ba, th)) + std::norm(directivity_s(bs, th)));
    }
    PowerBalance p;
    p.scattered = sc / kPi;  // lower half-plane mirrors the upper
    const double fwd = kPi - cfg.theta_in;
    const cd sf = directivity_s(bs, fwd) - directivity_a(ba, fwd);
    p.extinction = -2.0 * (std::exp(cd{0.0, 0.25 * kPi}) * sf).real();
    p.absorbed = p.extinction - p.scattered;
    return p;
}

inline VerificationReport energy_balance(const ProblemConfig& cfg, const PhysicsOptions& opt = {},
                                         double tolerance = 1e-4) {
    const auto p = power_balance(cfg, opt);
    VerificationReport rep;
    Check c = cfg.eta.imag() == 0.0
                  ? make_check("energy-balance", std::abs(p.scattered - p.extinction) / std::abs(p.extinction), tolerance)
                  : make_check("absorbed-power", p.absorbed / std::abs(p.extinction), 0.0, Relation::greater);
    c.provenance["scattered"] = p.scattered;
    c.provenance["extinction"] = p.extinction;
    c.provenance["absorbed"] = p.absorbed;
    c.provenance["N"] = opt.N;
    rep.add(c);
    return rep;
}

}  // namespace impstrip
