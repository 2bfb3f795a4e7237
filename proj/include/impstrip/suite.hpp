#pragma once

#include <chrono>
#include <functional>
#include <future>
#include <string>
#include <vector>

#include "impstrip/config.hpp"
#include "impstrip/edge.hpp"
#include "impstrip/rhstructure.hpp"
#include "impstrip/spectral.hpp"

namespace impstrip {

enum class Suite { fast, full };

inline const char* to_string(Suite s) { return s == Suite::fast ? "fast" : "full"; }

struct GroupTiming {
    std::string group;
    double seconds = 0.0;
};

struct SuiteResult {
    VerificationReport report;
    std::vector<GroupTiming> timing;
};

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

inline double deg(double d) { return d * kPi / 180.0; }

// Runs independent jobs on up to `threads` workers; results land by index.
template <class T>
std::vector<T> parallel_map(int count, int threads, const std::function<T(int)>& job) {
    std::vector<T> out(count);
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) out[i] = job(i);
        return out;
    }
    std::vector<std::future<void>> running;
    int next = 0;
    auto launch = [&](int i) { return std::async(std::launch::async, [&, i] { out[i] = job(i); }); };
    while (next < count || !running.empty()) {
        while (next < count && static_cast<int>(running.size()) < threads) running.push_back(launch(next++));
        running.front().get();
        running.erase(running.begin());
    }
    return out;
}

namespace detail {

struct SuiteContext {
    RunConfig rc;
    ProblemConfig cfg;
    Suite suite;
    std::string hash;
    SolveResult sol_a, sol_s;
    SpectralBundle b_a, b_s;
};

inline void stamp(VerificationReport& r, const SuiteContext& ctx, int N) {
    for (auto& c : r.checks) {
        nlohmann::ordered_json p;
        p["config_hash"] = ctx.hash;
        p["N"] = N;
        p["tail_truncation"] = ctx.b_a.X;
        for (auto it = c.provenance.begin(); it != c.provenance.end(); ++it)
            if (it.key() != "N") p[it.key()] = it.value();
        c.provenance = p;
    }
}

inline VerificationReport group_convergence(const SuiteContext& ctx) {
    VerificationReport rep;
    const int N = ctx.rc.N;
    const auto grid = theta_grid(ctx.rc.theta_count);
    auto table = [&](int n) {
        const auto a = make_bundle(solve_antisymmetric(ctx.cfg, n).density, ctx.cfg, TailOptions{.build = false});
        const auto s = make_bundle(solve_symmetric(ctx.cfg, n).density, ctx.cfg, TailOptions{.build = false});
        return directivity(a, s, grid);
    };
    const auto t1 = table(N), t2 = table(2 * N);
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        diff = std::max(diff, std::abs(t1.s[i] - t2.s[i]));
        scale = std::max(scale, std::abs(t2.s[i]));
    }
    auto& c = rep.add(make_check("directivity-convergence", diff / scale, 1e-8));
    c.provenance["N_fine"] = 2 * N;
    c.provenance["theta_points"] = static_cast<int>(grid.size());
    c.note = "max |S_N - S_2N| / max |S_2N| over the theta grid";
    return rep;
}

inline VerificationReport group_oracle(const SuiteContext& ctx) {
    VerificationReport rep;
    const auto grid = theta_grid(ctx.rc.theta_count);
    double worst = 0.0;
    for (double th : grid) {
        const cd sa = directivity_a(ctx.b_a, th), ss = directivity_s(ctx.b_s, th);
        const cd oa = farfield_oracle(ctx.sol_a.density, ctx.cfg, th), os = farfield_oracle(ctx.sol_s.density, ctx.cfg, th);
        const double sc = std::max(std::abs(oa + os), 1e-300);
        worst = std::max(worst, std::abs((sa + ss) - (oa + os)) / sc);
        if (std::abs(os) > 0.0) worst = std::max(worst, std::abs(ss - os) / std::max(std::abs(os), std::abs(oa)));
        worst = std::max(worst, std::abs(sa - oa) / std::max(std::abs(oa), std::abs(os)));
    }
    auto& c = rep.add(make_check("farfield-oracle", worst, 1e-7));
    c.note = "Bessel-image directivity vs plane-wave quadrature of the density";
    return rep;
}

inline VerificationReport group_functional(const SuiteContext& ctx) {
    VerificationReport rep;
    const auto kg = linspace(ctx.rc.k_lo(), ctx.rc.k_hi(), ctx.rc.k_count);
    for (const SpectralBundle* b : {&ctx.b_a, &ctx.b_s}) {
        std::vector<double> used;
        for (double k : kg)
            if (!near_pole(*b, k)) used.push_back(k);
        auto& c = rep.add(make_check(std::string("functional-residual-") + to_string(b->parity),
                                     functional_residual(*b, used), 1e-4));
        c.provenance["k_points"] = static_cast<int>(used.size());
        c.provenance["k_min"] = ctx.rc.k_lo();
        c.provenance["k_max"] = ctx.rc.k_hi();
    }
    return rep;
}

inline VerificationReport group_poles(const SuiteContext& ctx) {
    VerificationReport rep;
    const cd ks = k_star(ctx.cfg);
    const double h = 0.04 * std::abs(ctx.cfg.k0) / 2.0;
    const Rectangle sq{ks - cd{h, h}, ks + cd{h, h}};
    for (const SpectralBundle* b : {&ctx.b_a, &ctx.b_s}) {
        const cd want = 2.0 * kPi * kI * pole_amplitude(*b);
        const cd got = contour_integral([b](cd k) { return plus_function(*b, k); }, sq);
        const std::string fn = b->parity == Parity::antisymmetric ? "U+" : "V+";
        auto& c = rep.add(make_check("pole-residue-" + fn, std::abs(got - want) / std::abs(want), 1e-4));
        c.provenance["half_width"] = h;
    }
    // rectangle around -k0 in the lower half-plane
    const cd k0 = ctx.cfg.k0;
    const Rectangle lower{cd{-k0.real() - 0.5, -0.4}, cd{-k0.real() + 0.5, -0.02}};
    for (const SpectralBundle* b : {&ctx.b_a, &ctx.b_s}) {
        const std::string fn = b->parity == Parity::antisymmetric ? "U-" : "V-";
        auto& c = rep.add(make_check("cauchy-" + fn, cauchy_analyticity_test([b](cd k) { return minus_function(*b, k); }, lower),
                                     1e-6));
        c.note = "|closed contour integral| / (perimeter * max|f|), rectangle enclosing -k0";
    }
    return rep;
}

inline VerificationReport group_embedding(const SuiteContext& ctx) {
    VerificationReport rep;
    const std::vector<double> four{deg(30), deg(45), deg(60), deg(75)};
    const std::vector<double> six{deg(20), deg(30), deg(45), deg(60), deg(75), deg(85)};
    const auto kp = linspace(-1.5 * std::abs(ctx.cfg.k0), 1.5 * std::abs(ctx.cfg.k0), 40);
    EmbeddingOptions opt;
    opt.N = ctx.rc.N;
    for (Parity p : {Parity::antisymmetric, Parity::symmetric}) {
        if (p == Parity::symmetric && ctx.cfg.eta == 0.0) {
            rep.add(skipped_check("embedding-antisymmetry-symmetric", "symmetric kernel undefined for eta = 0"));
            rep.add(skipped_check("embedding-rank-symmetric", "symmetric kernel undefined for eta = 0"));
            continue;
        }
        auto& c = rep.add(make_check(std::string("embedding-antisymmetry-") + to_string(p),
                                     embedding_antisymmetry(ctx.cfg, p, four, opt.N), 1e-6));
        c.provenance["incidences"] = 4;
        rep.merge(embedding_rank_test(ctx.cfg, p, six, kp, opt));
    }
    return rep;
}

inline VerificationReport group_edge(const SuiteContext& ctx) {
    VerificationReport rep;
    // fits want the finer solve: the face density carries log terms at the edge
    const int N = std::max(ctx.rc.N, 128);
    const auto da = solve_antisymmetric(ctx.cfg, N).density;
    const auto ds = solve_symmetric(ctx.cfg, N).density;
    const auto g = default_fit_geometry(ctx.cfg.a);
    std::vector<EdgeSide> sides{EdgeSide::plus};
    if (ctx.suite == Suite::full) sides.push_back(EdgeSide::minus);
    for (EdgeSide s : sides) {
        const std::string tag = s == EdgeSide::plus ? "plus" : "minus";
        rep.merge(local_expansion_fit(da, ctx.cfg, s, g));
        if (ctx.cfg.eta != 0.0) rep.merge(local_expansion_fit(ds, ctx.cfg, s, g));
        const cd c = extract_c(da, ctx.cfg, s), cl = trace_limit_c(da, ctx.cfg, s);
        auto& cc = rep.add(make_check("edge-c-trace-limit-" + tag, std::abs(c - cl) / std::abs(c), 1e-4));
        cc.provenance["N"] = N;
        const auto rd = richardson_d(ds, ctx.cfg, s);
        auto& ro = rep.add(make_check("edge-d-richardson-order-" + tag, std::abs(rd.observed_order - 0.85), 0.15,
                                      Relation::less, false));
        ro.provenance["observed_order"] = rd.observed_order;
        ro.note = "rho log rho leading correction predicts about 0.85 at rho = 1e-3";
    }
    for (auto& c : rep.checks) c.provenance["N"] = N;
    return rep;
}

inline VerificationReport group_growth(const SuiteContext& ctx) {
    VerificationReport rep;
    const auto tg = linspace(4.0, 40.0, 31);
    GrowthOptions shift0, control;
    control.exponent_shift = 1.0;
    for (const SpectralBundle* b : {&ctx.b_a, &ctx.b_s}) {
        double control_min = 1e300;
        for (Ray r : {Ray::upper_imaginary, Ray::lower_imaginary}) {
            rep.merge(growth_scan(*b, r, tg, shift0));
            for (const auto& s : growth_samples(*b, r, tg, control)) control_min = std::min(control_min, s.slope);
        }
        auto& c = rep.add(make_check(std::string("growth-negative-control-") + to_string(b->parity), control_min,
                                     shift0.slope_tolerance, Relation::greater));
        c.note = "exponent raised by 1 must produce growth beyond the tolerance (min slope reported)";
    }
    return rep;
}

inline VerificationReport group_jumps(const SuiteContext& ctx) {
    VerificationReport rep;
    const double radius = ctx.rc.cut_radius();
    const auto g1 = build_cut(ctx.cfg, ContourLabel::G1, radius), g2 = build_cut(ctx.cfg, ContourLabel::G2, radius);
    double det = 0.0, rt = 0.0;
    for (JumpLabel l : {JumpLabel::M1, JumpLabel::M2, JumpLabel::N1, JumpLabel::N2}) {
        const bool on1 = l == JumpLabel::M1 || l == JumpLabel::N1;
        const auto j = jump_algebra(l, on1 ? g1 : g2, ctx.cfg, 100);
        auto& c = rep.add(make_check(std::string("jump-determinant-") + to_string(l), j.det_error, 1e-12));
        c.provenance["samples"] = j.samples;
        rep.add(make_check(std::string("jump-roundtrip-") + to_string(l), j.roundtrip_error, 1e-12));
        det = std::max(det, j.det_error);
        rt = std::max(rt, j.roundtrip_error);
    }
    // M2 and N2 are M1 and N1 with both indices swapped
    double mirror = 0.0;
    Mat2 P;
    P << 0.0, 1.0, 1.0, 0.0;
    for (std::size_t i = 1; i < g2.nodes.size(); i += 4) {
        const cd x = left_shore_xi(JumpLabel::M2, g2.nodes[i], ctx.cfg);
        if (ctx.cfg.eta - kI * x == 0.0) continue;
        mirror = std::max(mirror, (P * jump_matrix_xi(JumpLabel::M1, x, ctx.cfg.eta) * P -
                                   jump_matrix_xi(JumpLabel::M2, x, ctx.cfg.eta)).cwiseAbs().maxCoeff());
        mirror = std::max(mirror, (P * jump_matrix_xi(JumpLabel::N1, x, ctx.cfg.eta) * P -
                                   jump_matrix_xi(JumpLabel::N2, x, ctx.cfg.eta)).cwiseAbs().maxCoeff());
    }
    rep.add(make_check("jump-index-swap", mirror, 1e-14, Relation::less_equal));

    // continuation identity on sample points of G2 away from k0
    std::vector<cd> pts;
    for (const cd& k : g2.nodes)
        if (std::abs(k - ctx.cfg.k0) > 0.05 * std::abs(ctx.cfg.k0) && std::abs(k) < 3.0 * std::abs(ctx.cfg.k0))
            pts.push_back(k);
    std::vector<cd> sample;
    for (std::size_t i = 0; i < pts.size(); i += std::max<std::size_t>(1, pts.size() / 20)) sample.push_back(pts[i]);
    for (const SpectralBundle* b : {&ctx.b_a, &ctx.b_s}) {
        if (b->parity == Parity::symmetric && ctx.cfg.eta == 0.0) {
            rep.add(skipped_check("continuation-identity-symmetric", "V0 undefined for eta = 0"));
            continue;
        }
        double good = 0.0, wrong = 1e300;
        for (const cd& k : sample) {
            good = std::max(good, continuation_identity_check(*b, k));
            wrong = std::min(wrong, continuation_identity_check(*b, k, Shore::right));
        }
        auto& c = rep.add(make_check(std::string("continuation-identity-") + to_string(b->parity), good, 1e-12));
        c.provenance["points"] = static_cast<int>(sample.size());
        auto& w = rep.add(make_check(std::string("continuation-wrong-shore-") + to_string(b->parity), wrong, 1e-3,
                                     Relation::greater));
        w.note = "negative control: matrix built from the right-shore xi";
    }
    return rep;
}

inline VerificationReport group_sheets(const SuiteContext& ctx) {
    VerificationReport rep;
    const double radius = ctx.rc.cut_radius();
    int mismatches = 0, misclassified = 0, undeformed = 0, third = 0;
    double defect = 0.0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const cd eta{-2.0 + 4.0 * (i + 0.5) / 20.0, -2.0 + 4.0 * (j + 0.5) / 20.0};
            const bool expect = eta.real() < 0.0 && eta.imag() < 0.0;
            if (deformation_needed(eta) != expect) ++mismatches;
            if (eta.imag() > 0.0) continue;  // outside the admissible impedance range
            ProblemConfig c = ctx.cfg;
            c.eta = eta;
            const auto base = undeformed_cuts(c, radius);
            const auto kp = k_prime(c, base);
            defect = std::max(defect, k_prime_defect(c, kp, base));
            if ((kp.sheet == Sheet::physical) != expect) ++misclassified;
            if (expect) {
                ++third;
                const auto cuts = deform_cuts(c, radius);
                const auto kp2 = k_prime(c, cuts);
                defect = std::max(defect, k_prime_defect(c, kp2, cuts));
                if (kp2.sheet != Sheet::unphysical) ++undeformed;
            }
        }
    auto& m = rep.add(make_check("deformation-rule-grid", mismatches, 0.0, Relation::less_equal));
    m.provenance["grid"] = "20x20 over [-2,2]^2";
    rep.add(make_check("k-prime-sheet-grid", misclassified, 0.0, Relation::less_equal));
    auto& u = rep.add(make_check("deformation-declassifies", undeformed, 0.0, Relation::less_equal));
    u.provenance["third_quadrant_points"] = third;
    rep.add(make_check("k-prime-defect", defect, 1e-12));
    if (deformation_needed(ctx.cfg)) {
        const auto cuts = deform_cuts(ctx.cfg, radius);
        rep.add(make_check("deformation-reference", k_prime(ctx.cfg, cuts).sheet == Sheet::unphysical ? 0.0 : 1.0, 0.0,
                           Relation::less_equal));
    }

    // real-axis limit: near-real k0, eta = 1 - i delta
    ProblemConfig near = ctx.cfg;
    near.k0 = {ctx.cfg.k0.real(), 1e-4};
    double im = 0.0, re_excess = 0.0;
    nlohmann::ordered_json path = nlohmann::ordered_json::array();
    for (double delta : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        near.eta = {1.0, -delta};
        const cd kp = k_prime_value(near);
        path.push_back(kp.imag());
        im = std::abs(kp.imag());
        re_excess = kp.real() - near.k0.real();
    }
    auto& r = rep.add(make_check("k-prime-real-axis-limit", im, 1e-3));
    r.provenance["k0_im"] = 1e-4;
    r.provenance["im_k_prime_path"] = path;
    rep.add(make_check("k-prime-beyond-k0", re_excess, 0.0, Relation::greater));
    return rep;
}

inline VerificationReport group_physics(const SuiteContext& ctx) {
    VerificationReport rep;
    PhysicsOptions opt;
    opt.N = ctx.rc.N;
    std::vector<std::pair<double, double>> pairs{{deg(30), deg(60)}, {deg(45), deg(120)}};
    if (ctx.suite == Suite::full) pairs.push_back({deg(20), deg(150)});
    rep.merge(reciprocity_check(ctx.cfg, pairs, opt));

    ProblemConfig lossless = ctx.cfg;
    lossless.k0 = {ctx.cfg.k0.real(), 1e-4};
    lossless.eta = {ctx.cfg.eta.real(), 0.0};
    auto eb = energy_balance(lossless, opt);
    eb.checks.back().provenance["k0_im"] = 1e-4;
    rep.merge(eb);
    ProblemConfig lossy = ctx.cfg;
    if (lossy.eta.imag() == 0.0) lossy.eta = {lossy.eta.real(), -1.0};
    rep.merge(energy_balance(lossy, opt));

    ProblemConfig hard = ctx.cfg;
    hard.eta = 0.0;
    const auto bs = make_bundle(solve_symmetric(hard, opt.N).density, hard, TailOptions{.build = false});
    double mx = 0.0;
    for (double th : theta_grid(ctx.rc.theta_count)) mx = std::max(mx, std::abs(directivity_s(bs, th)));
    rep.add(make_check("hard-strip-symmetric-zero", mx, 1e-12));
    return rep;
}

}  // namespace detail

inline SuiteResult run_suite(const RunConfig& rc, Suite suite) {
    rc.validate();
    using clock = std::chrono::steady_clock;
    detail::SuiteContext ctx;
    ctx.rc = rc;
    ctx.cfg = rc.problem();
    ctx.suite = suite;
    ctx.hash = config_hash(rc);
    SuiteResult out;

    const auto t0 = clock::now();
    ctx.sol_a = solve_antisymmetric(ctx.cfg, rc.N);
    ctx.sol_s = solve_symmetric(ctx.cfg, rc.N);
    TailOptions topt;
    topt.tol = rc.tail_tol;
    auto bundles = parallel_map<SpectralBundle>(2, rc.threads, [&](int i) {
        return make_bundle(i == 0 ? ctx.sol_a.density : ctx.sol_s.density, ctx.cfg, topt);
    });
    ctx.b_a = std::move(bundles[0]);
    ctx.b_s = std::move(bundles[1]);
    out.timing.push_back({"setup", std::chrono::duration<double>(clock::now() - t0).count()});

    {
        VerificationReport solve_rep;
        for (const SolveResult* s : {&ctx.sol_a, &ctx.sol_s}) {
            auto& c = solve_rep.add(make_check(std::string("solve-converged-") + to_string(s->density.parity),
                                               s->diagnostics.tail_decay, SolveOptions{}.tail_threshold));
            c.provenance["condition_estimate"] = s->diagnostics.condition_estimate;
            c.provenance["bc_residual"] = s->diagnostics.bc_residual;
        }
        detail::stamp(solve_rep, ctx, rc.N);
        out.report.merge(solve_rep);
    }

    using Group = VerificationReport (*)(const detail::SuiteContext&);
    const std::vector<std::pair<std::string, Group>> groups{
        {"convergence", detail::group_convergence}, {"oracle", detail::group_oracle},
        {"functional", detail::group_functional},   {"poles", detail::group_poles},
        {"embedding", detail::group_embedding},     {"edge", detail::group_edge},
        {"growth", detail::group_growth},           {"jumps", detail::group_jumps},
        {"sheets", detail::group_sheets},           {"physics", detail::group_physics},
    };
    struct Done {
        VerificationReport rep;
        double seconds = 0.0;
    };
    const auto done = parallel_map<Done>(static_cast<int>(groups.size()), rc.threads, [&](int i) {
        const auto s = clock::now();
        Done d;
        try {
            d.rep = groups[i].second(ctx);
        } catch (const Error& e) {
            auto c = make_check("group-" + groups[i].first, 1.0, 0.0, Relation::less_equal);
            c.note = std::string("numerical failure: ") + e.what();
            d.rep.add(c);
        }
        d.seconds = std::chrono::duration<double>(clock::now() - s).count();
        return d;
    });
    for (std::size_t i = 0; i < groups.size(); ++i) {
        VerificationReport r = done[i].rep;
        for (auto& c : r.checks) {
            const int n = c.provenance.contains("N") ? c.provenance["N"].get<int>() : rc.N;
            VerificationReport one;
            one.add(c);
            detail::stamp(one, ctx, n);
            c = one.checks.front();
            c.wall_time = done[i].seconds;
        }
        out.report.merge(r);
        out.timing.push_back({groups[i].first, done[i].seconds});
    }
    return out;
}

inline nlohmann::ordered_json timing_json(const SuiteResult& r) {
    nlohmann::ordered_json j;
    double total = 0.0;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& t : r.timing) {
        arr.push_back({{"group", t.group}, {"seconds", t.seconds}});
        total += t.seconds;
    }
    j["groups"] = arr;
    j["total_seconds"] = total;
    return j;
}

}  // namespace impstrip
