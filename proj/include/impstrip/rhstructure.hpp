#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "impstrip/spectral.hpp"

namespace impstrip {

enum class ContourLabel { G1, G2, G1_deformed, G2_deformed };

inline const char* to_string(ContourLabel l) {
    switch (l) {
        case ContourLabel::G1: return "G1";
        case ContourLabel::G2: return "G2";
        case ContourLabel::G1_deformed: return "G1-deformed";
        case ContourLabel::G2_deformed: return "G2-deformed";
    }
    return "?";
}

// Polyline from the branch point outward; nodes[0] is -k0 (G1) or +k0 (G2).
struct Contour {
    ContourLabel label = ContourLabel::G2;
    std::vector<cd> nodes;
};

inline Contour reflected(const Contour& c, ContourLabel label) {
    Contour r{label, {}};
    r.nodes.reserve(c.nodes.size());
    for (const cd& z : c.nodes) r.nodes.push_back(-z);
    return r;
}

// k = sqrt(k0^2 - s^2), s from 0 to s_max with |k(s_max)| = radius. The
// quadratic map in s clusters nodes at the branch point.
inline Contour build_cut(const ProblemConfig& cfg, ContourLabel which, double radius, int n = 400) {
    const cd k0 = cfg.k0;
    if (!(radius > std::abs(k0))) throw Error(ErrorKind::config, "build_cut: radius must exceed |k0|");
    if (which != ContourLabel::G1 && which != ContourLabel::G2)
        throw Error(ErrorKind::config, "build_cut: only G1 or G2 can be built directly");
    if (n < 2) throw Error(ErrorKind::config, "build_cut: need at least two segments");
    const cd q = k0 * k0;
    const double r2 = radius * radius;
    const double s_max = std::sqrt(q.real() + std::sqrt(std::max(0.0, r2 * r2 - q.imag() * q.imag())));
    Contour g2{ContourLabel::G2, {}};
    g2.nodes.reserve(n + 1);
    g2.nodes.push_back(k0);
    for (int j = 1; j <= n; ++j) {
        const double u = static_cast<double>(j) / n;
        const double s = s_max * u * u;
        cd k = std::sqrt(q - s * s);  // Im(q - s^2) >= 0 keeps the principal root continuous
        if (k.real() < 0.0 || (k.real() == 0.0 && k.imag() < 0.0)) k = -k;
        g2.nodes.push_back(k);
    }
    if (which == ContourLabel::G2) return g2;
    return reflected(g2, ContourLabel::G1);
}

// Largest deviation of k0^2 - k^2 from the nonnegative real axis, relative to |k0|^2.
inline double locus_defect(const Contour& c, const ProblemConfig& cfg) {
    const cd q = cfg.k0 * cfg.k0;
    double worst = 0.0;
    for (const cd& k : c.nodes) {
        const cd w = q - k * k;
        const double scale = std::max(std::norm(cfg.k0), std::abs(k * k));
        worst = std::max(worst, (std::abs(w.imag()) + std::max(0.0, -w.real())) / scale);
    }
    return worst;
}

// Cut that tends to (k0, inf) as Im(k0) -> 0: k = sqrt(k0^2 + t^2). Provided for
// the real-axis picture of the zero k'.
inline Contour build_real_axis_cut(const ProblemConfig& cfg, double radius, int n = 400) {
    const cd q = cfg.k0 * cfg.k0;
    const double t_max = std::sqrt(std::max(0.0, radius * radius - std::norm(q)) + std::abs(q));
    Contour c{ContourLabel::G2, {}};
    for (int j = 0; j <= n; ++j) {
        const double u = static_cast<double>(j) / n;
        const double t = t_max * u * u;
        c.nodes.push_back(std::sqrt(q + t * t));
    }
    return c;
}

enum class JumpLabel { M1, M2, N1, N2 };

inline const char* to_string(JumpLabel l) {
    switch (l) {
        case JumpLabel::M1: return "M1";
        case JumpLabel::M2: return "M2";
        case JumpLabel::N1: return "N1";
        case JumpLabel::N2: return "N2";
    }
    return "?";
}

using Mat2 = Eigen::Matrix2cd;

// Left-shore value of xi on the cut carrying the given matrix.
inline cd left_shore_xi(JumpLabel l, cd k, const ProblemConfig& cfg) {
    const bool upper = (l == JumpLabel::M2 || l == JumpLabel::N2);
    return xi(k, BranchContext{upper ? BranchMode::continued_to_upper : BranchMode::continued_to_lower}, cfg);
}

// Matrix entries with xi passed explicitly (the usual entry point takes the
// left shore; tests use this to feed the wrong shore).
inline Mat2 jump_matrix_xi(JumpLabel label, cd x, cd eta) {
    const cd den = eta - kI * x;
    if (std::abs(den) <= 1e-300 || std::abs(den) <= 1e-14 * (std::abs(eta) + std::abs(x)))
        throw Error(ErrorKind::singular_jump, std::string("jump matrix ") + to_string(label) + ": eta - i xi vanishes");
    Mat2 m;
    switch (label) {
        case JumpLabel::M1:
            m << 1.0, 2.0 * kI * x / den, 0.0, (eta + kI * x) / den;
            break;
        case JumpLabel::M2:
            m << (eta + kI * x) / den, 0.0, 2.0 * kI * x / den, 1.0;
            break;
        case JumpLabel::N1:
            m << 1.0, -2.0 * eta / den, 0.0, (eta + kI * x) / (kI * x - eta);
            break;
        case JumpLabel::N2:
            m << (eta + kI * x) / (kI * x - eta), 0.0, -2.0 * eta / den, 1.0;
            break;
    }
    return m;
}

inline Mat2 jump_matrix(JumpLabel label, cd k, const ProblemConfig& cfg) {
    return jump_matrix_xi(label, left_shore_xi(label, k, cfg), cfg.eta);
}

inline cd expected_determinant(JumpLabel label, cd x, cd eta) {
    if (label == JumpLabel::M1 || label == JumpLabel::M2) return (eta + kI * x) / (eta - kI * x);
    return (eta + kI * x) / (kI * x - eta);
}

struct JumpAlgebra {
    double det_error = 0.0;        // max |det - expected| / |expected|
    double roundtrip_error = 0.0;  // max |M M^-1 - I|
    int samples = 0;
};

// Samples are spread over the interior nodes of the contour; the branch point
// itself is skipped since xi = 0 there makes every matrix trivial.
inline JumpAlgebra jump_algebra(JumpLabel label, const Contour& c, const ProblemConfig& cfg, int samples = 100) {
    JumpAlgebra out;
    const int n = static_cast<int>(c.nodes.size());
    for (int j = 0; j < samples; ++j) {
        const int idx = 1 + static_cast<int>((static_cast<long long>(j) * (n - 2)) / std::max(1, samples - 1));
        const cd k = c.nodes[std::min(idx, n - 1)];
        const cd x = left_shore_xi(label, k, cfg);
        const Mat2 m = jump_matrix_xi(label, x, cfg.eta);
        const cd want = expected_determinant(label, x, cfg.eta);
        out.det_error = std::max(out.det_error, std::abs(m.determinant() - want) / std::abs(want));
        const Mat2 id = m * m.inverse();
        out.roundtrip_error = std::max(out.roundtrip_error, (id - Mat2::Identity()).cwiseAbs().maxCoeff());
        ++out.samples;
    }
    return out;
}

enum class Shore { left, right };

// Continue the functional equation to both shores of G2 and test the scalar
// relation carried by M2 (antisymmetric) or N2 (symmetric):
//   minus_R = m11 * minus_L + m21 * plus.
inline double continuation_identity_check(const SpectralBundle& b, cd k, Shore matrix_shore = Shore::left) {
    const ProblemConfig& cfg = b.cfg;
    const cd eta = cfg.eta;
    const cd xl = xi(k, BranchContext{BranchMode::continued_to_upper}, cfg);
    const cd xr = -xl;
    const cd p = plus_function(b, k);
    const cd t0 = tilde0(b, k);
    cd ml, mr;
    JumpLabel label;
    if (b.parity == Parity::antisymmetric) {
        label = JumpLabel::M2;
        ml = -p - (eta - kI * xl) * t0;
        mr = -p - (eta - kI * xr) * t0;
    } else {
        if (eta == 0.0) throw Error(ErrorKind::domain, "continuation identity: V0 undefined for eta = 0");
        label = JumpLabel::N2;
        const cd al = kI * t0 / (eta * xl), ar = kI * t0 / (eta * xr);
        ml = -p - (eta - kI * xl) * al;
        mr = -p - (eta - kI * xr) * ar;
    }
    const Mat2 m = jump_matrix_xi(label, matrix_shore == Shore::left ? xl : xr, eta);
    const cd rhs = m(0, 0) * ml + m(1, 0) * p;
    const double scale = std::max({std::abs(mr), std::abs(ml), std::abs(p)});
    return std::abs(mr - rhs) / (scale > 0.0 ? scale : 1.0);
}

// ---- sheets --------------------------------------------------------------

enum class Sheet { physical, unphysical };

inline const char* to_string(Sheet s) { return s == Sheet::physical ? "physical" : "unphysical"; }

struct SheetPoint {
    cd k;
    Sheet sheet = Sheet::physical;
    bool on_cut = false;  // k' lies on G1/G2 themselves (Re eta = 0)
};

inline Sheet crossed(Sheet s) { return s == Sheet::physical ? Sheet::unphysical : Sheet::physical; }

// Follow a path and flip the sheet on every proper crossing of the cut polylines.
inline Sheet track_sheet(Sheet start, const std::vector<cd>& path, const std::vector<const Contour*>& cuts) {
    auto cross2 = [](cd a, cd b) { return a.real() * b.imag() - a.imag() * b.real(); };
    auto intersects = [&](cd p0, cd p1, cd q0, cd q1) {
        const double d1 = cross2(p1 - p0, q0 - p0), d2 = cross2(p1 - p0, q1 - p0);
        const double d3 = cross2(q1 - q0, p0 - q0), d4 = cross2(q1 - q0, p1 - q0);
        return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
    };
    Sheet s = start;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        for (const Contour* c : cuts)
            for (std::size_t j = 0; j + 1 < c->nodes.size(); ++j)
                if (intersects(path[i], path[i + 1], c->nodes[j], c->nodes[j + 1])) s = crossed(s);
    return s;
}

inline bool point_in_polygon(cd p, const std::vector<cd>& poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const cd a = poly[i], b = poly[j];
        if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
            const double x = a.real() + (p.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
            if (p.real() < x) inside = !inside;
        }
    }
    return inside;
}

// Cut pair defining the physical sheet. When deformed, the region swept between
// G2 and G2' (and its reflection) changes sheet relative to the principal value.
struct CutSet {
    Contour g1, g2;
    bool deformed = false;
    std::vector<cd> swept;  // closed polygon G2 -> reversed G2', empty if undeformed
};

inline CutSet undeformed_cuts(const ProblemConfig& cfg, double radius) {
    return {build_cut(cfg, ContourLabel::G1, radius), build_cut(cfg, ContourLabel::G2, radius), false, {}};
}

// xi on the physical sheet bounded by the given cuts.
inline cd sheet_xi(cd k, const ProblemConfig& cfg, const CutSet& cuts) {
    cd x = xi(k, cfg);
    if (cuts.deformed && (point_in_polygon(k, cuts.swept) || point_in_polygon(-k, cuts.swept))) x = -x;
    return x;
}

inline cd k_prime_value(const ProblemConfig& cfg) {
    cd kp = std::sqrt(cfg.k0 * cfg.k0 + cfg.eta * cfg.eta);
    if (kp.imag() < 0.0) kp = -kp;
    return kp;
}

inline Sheet classify_k_prime(const ProblemConfig& cfg, const CutSet& cuts) {
    const cd kp = k_prime_value(cfg);
    const cd x = sheet_xi(kp, cfg, cuts);
    const double zero_gap = std::abs(x + kI * cfg.eta), other = std::abs(x - kI * cfg.eta);
    // Re(eta) = 0 puts k' on G2 itself; a zero on the cut is not counted as physical
    if (!cuts.deformed && std::abs(cfg.eta.real()) <= 1e-12 * std::abs(cfg.eta)) return Sheet::unphysical;
    return zero_gap < other ? Sheet::physical : Sheet::unphysical;
}

inline SheetPoint k_prime(const ProblemConfig& cfg, const CutSet& cuts) {
    if (cfg.eta == 0.0) throw Error(ErrorKind::branch_collision, "k' coincides with the branch point k0 for eta = 0");
    const bool on_cut = !cuts.deformed && std::abs(cfg.eta.real()) <= 1e-12 * std::abs(cfg.eta);
    return {k_prime_value(cfg), classify_k_prime(cfg, cuts), on_cut};
}

inline SheetPoint k_prime(const ProblemConfig& cfg, double radius = 0.0) {
    if (radius <= 0.0) radius = 50.0 * std::abs(cfg.k0);
    return k_prime(cfg, undeformed_cuts(cfg, radius));
}

// |eta - i xi(k')| / |eta| with xi taken on the sheet k' was classified on.
inline double k_prime_defect(const ProblemConfig& cfg, const SheetPoint& sp, const CutSet& cuts) {
    cd x = sheet_xi(sp.k, cfg, cuts);
    const double d_phys = std::abs(cfg.eta - kI * x) / std::abs(cfg.eta);
    const double d_unphys = std::abs(cfg.eta + kI * x) / std::abs(cfg.eta);
    if (sp.on_cut) return std::min(d_phys, d_unphys);  // either shore
    return sp.sheet == Sheet::physical ? d_phys : d_unphys;
}

inline bool deformation_needed(cd eta) { return eta.real() < 0.0 && eta.imag() < 0.0; }
inline bool deformation_needed(const ProblemConfig& cfg) { return deformation_needed(cfg.eta); }

// G2' leaves k0 along a ray passing k' on its left, runs out radially to the
// truncation circle and follows it back to the far end of G2. k' then sits in
// the swept region; G1' is the reflection.
inline CutSet deform_cuts(const ProblemConfig& cfg, double radius = 0.0) {
    if (radius <= 0.0) radius = 50.0 * std::abs(cfg.k0);
    CutSet base = undeformed_cuts(cfg, radius);
    if (!deformation_needed(cfg)) return base;

    const cd k0 = cfg.k0, kp = k_prime_value(cfg);
    const cd far_end = base.g2.nodes.back();
    const cd d = (kp - k0) / std::abs(kp - k0);
    for (double beta_deg : {30.0, 15.0, 8.0, 4.0, 2.0, 1.0, 0.5}) {
        for (double stretch : {2.0, 3.0, 5.0}) {
            const cd e = k0 + stretch * std::abs(kp - k0) * d * std::polar(1.0, -beta_deg * kPi / 180.0);
            if (!(std::abs(e) < radius) || e.real() <= 0.0 || e.imag() <= 0.0) continue;
            Contour g2p{ContourLabel::G2_deformed, {}};
            const int n_seg = 64, n_ray = 128, n_arc = 256;
            for (int j = 0; j <= n_seg; ++j) g2p.nodes.push_back(k0 + (e - k0) * (static_cast<double>(j) / n_seg));
            const double re = std::abs(e), th0 = std::arg(e), th1 = std::arg(far_end);
            if (!(th1 > th0)) continue;
            for (int j = 1; j <= n_ray; ++j) {
                const double u = static_cast<double>(j) / n_ray;
                g2p.nodes.push_back(std::polar(re * std::pow(radius / re, u), th0));
            }
            for (int j = 1; j <= n_arc; ++j) g2p.nodes.push_back(std::polar(radius, th0 + (th1 - th0) * j / n_arc));
            g2p.nodes.back() = far_end;

            CutSet out;
            out.g2 = g2p;
            out.g1 = reflected(g2p, ContourLabel::G1_deformed);
            out.deformed = true;
            out.swept = base.g2.nodes;
            for (auto it = g2p.nodes.rbegin(); it != g2p.nodes.rend(); ++it) out.swept.push_back(*it);
            // the swept region must hold k' but neither the origin nor the real axis
            const bool above = std::all_of(g2p.nodes.begin(), g2p.nodes.end(), [](cd z) { return z.imag() > 0.0; });
            if (!above || !point_in_polygon(kp, out.swept)) continue;
            if (classify_k_prime(cfg, out) != Sheet::unphysical) continue;
            return out;
        }
    }
    throw Error(ErrorKind::deformation_failed, "could not construct a cut detour that moves k' off the physical sheet");
}

// ---- export --------------------------------------------------------------

inline std::string contour_csv(const Contour& c) {
    std::string s = "node_index,re_k,im_k\n";
    char buf[96];
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, c.nodes[i].real(), c.nodes[i].imag());
        s += buf;
    }
    return s;
}

inline std::string jump_samples_csv(JumpLabel label, const Contour& c, const ProblemConfig& cfg, int stride = 10) {
    std::string s = "node_index,re_k,im_k,re_m11,im_m11,re_m12,im_m12,re_m21,im_m21,re_m22,im_m22\n";
    char buf[512];
    for (std::size_t i = 1; i < c.nodes.size(); i += static_cast<std::size_t>(std::max(1, stride))) {
        const cd k = c.nodes[i];
        const Mat2 m = jump_matrix(label, k, cfg);
        std::snprintf(buf, sizeof buf,
                      "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, k.real(), k.imag(),
                      m(0, 0).real(), m(0, 0).imag(), m(0, 1).real(), m(0, 1).imag(), m(1, 0).real(),
                      m(1, 0).imag(), m(1, 1).real(), m(1, 1).imag());
        s += buf;
    }
    return s;
}

}  // namespace impstrip
