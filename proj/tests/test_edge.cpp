#include <gtest/gtest.h>

#include "impstrip/edge.hpp"

using namespace impstrip;

namespace {

struct Solved {
    ProblemConfig cfg;
    Density a, s;
};

Solved solved(ProblemConfig cfg, int N = 64) {
    return {cfg, solve_antisymmetric(cfg, N).density, solve_symmetric(cfg, N).density};
}

const Solved& reference() {
    static const Solved s = solved(ProblemConfig{});
    return s;
}

}  // namespace

TEST(EdgeC, ZeroDensityGivesZero) {
    Density d;
    d.coeffs.assign(16, 0.0);
    const ProblemConfig cfg;
    EXPECT_EQ(extract_c(d, cfg, EdgeSide::plus), cd{0.0});
    EXPECT_EQ(extract_c(d, cfg, EdgeSide::minus), cd{0.0});
}

TEST(EdgeC, MatchesTraceLimit) {
    const auto& r = reference();
    for (EdgeSide side : {EdgeSide::plus, EdgeSide::minus}) {
        const cd c = extract_c(r.a, r.cfg, side), t = trace_limit_c(r.a, r.cfg, side);
        EXPECT_LT(std::abs(c - t), 1e-5 * std::abs(c)) << to_string(side);
    }
}

TEST(EdgeC, ConvergesUnderRefinement) {
    const ProblemConfig cfg;
    const cd c32 = extract_c(solve_antisymmetric(cfg, 32).density, cfg, EdgeSide::plus);
    const cd c64 = extract_c(solve_antisymmetric(cfg, 64).density, cfg, EdgeSide::plus);
    const cd c128 = extract_c(solve_antisymmetric(cfg, 128).density, cfg, EdgeSide::plus);
    const double e1 = std::abs(c32 - c64), e2 = std::abs(c64 - c128);
    // second order: about a factor four per doubling
    EXPECT_GT(e1 / e2, 3.0);
    EXPECT_LT(e2, 1e-3 * std::abs(c128));
}

TEST(EdgeC, RequiresAntisymmetricDensity) {
    const auto& r = reference();
    EXPECT_THROW(extract_c(r.s, r.cfg, EdgeSide::plus), Error);
    EXPECT_THROW(extract_d(r.a, r.cfg, EdgeSide::plus), Error);
}

TEST(EdgeD, HardStripGivesIncidentValue) {
    ProblemConfig cfg;
    cfg.eta = 0.0;
    const auto ds = solve_symmetric(cfg, 32).density;
    for (EdgeSide side : {EdgeSide::plus, EdgeSide::minus}) {
        const double x = side == EdgeSide::plus ? cfg.a : -cfg.a;
        const cd want = incident_field(cfg, Parity::symmetric, x, 0.0);
        EXPECT_LT(std::abs(extract_d(ds, cfg, side) - want), 1e-12) << to_string(side);
    }
}

TEST(EdgeD, StableUnderRefinement) {
    const ProblemConfig cfg;
    const cd d64 = extract_d(solve_symmetric(cfg, 64).density, cfg, EdgeSide::plus);
    const cd d128 = extract_d(solve_symmetric(cfg, 128).density, cfg, EdgeSide::plus);
    EXPECT_LT(std::abs(d64 - d128), 1e-6 * std::abs(d128));
}

TEST(Edge, NormalIncidenceIsSymmetric) {
    ProblemConfig cfg;
    cfg.theta_in = 0.5 * kPi;
    const auto s = solved(cfg, 48);
    const auto e = edge_coefficients(s.a, s.s, cfg);
    EXPECT_LT(std::abs(e.c_plus - e.c_minus), 1e-12 * std::abs(e.c_plus));
    EXPECT_LT(std::abs(e.d_plus - e.d_minus), 1e-10 * std::abs(e.d_plus));
}

TEST(Edge, MirrorSwapsSides) {
    const auto& r = reference();
    const auto m = solved(detail::mirrored_config(r.cfg));
    EXPECT_LT(std::abs(extract_c(r.a, r.cfg, EdgeSide::plus) - extract_c(m.a, m.cfg, EdgeSide::minus)), 1e-10);
    EXPECT_LT(std::abs(extract_d(r.s, r.cfg, EdgeSide::plus) - extract_d(m.s, m.cfg, EdgeSide::minus)), 1e-10);
}

TEST(LocalFit, ReferencePassesMandatoryChecks) {
    const auto& r = reference();
    const auto g = default_fit_geometry(r.cfg.a);
    for (const Density* d : {&r.a, &r.s}) {
        const auto rep = local_expansion_fit(*d, r.cfg, EdgeSide::plus, g);
        ASSERT_FALSE(rep.checks.empty());
        for (const auto& c : rep.checks) {
            if (c.mandatory) EXPECT_TRUE(c.pass) << c.id << " = " << c.value;
        }
    }
}

TEST(LocalFit, RejectsBadGeometry) {
    const auto& r = reference();
    FitGeometry g = default_fit_geometry(r.cfg.a);
    g.radii = {2e-3, 2.5e-3, 3e-3};
    EXPECT_THROW(local_expansion_fit(r.a, r.cfg, EdgeSide::plus, g), Error);
    g.radii = {1e-4, 1e-3, 1e-2};
    EXPECT_THROW(local_expansion_fit(r.a, r.cfg, EdgeSide::plus, g), Error);
}

TEST(LocalFit, DuplicateColumnsAreIllConditioned) {
    std::vector<EdgeSample> s;
    for (int i = 0; i < 20; ++i) s.push_back({1e-3 * (i + 1), 0.1 * (i + 1), cd{1.0 * i, 0.0}});
    const std::vector<std::function<cd(double, double)>> basis{
        [](double rho, double) { return cd{rho}; },
        [](double rho, double) { return cd{2.0 * rho}; },
    };
    try {
        detail::least_squares(s, basis);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ill_conditioned_fit);
    }
}

TEST(LocalFit, SamplesCsvHeader) {
    const auto& r = reference();
    FitGeometry g{{1e-3, 1e-2}, {0.5, 1.5}};
    const auto s = edge_samples(r.a, r.cfg, EdgeSide::plus, g);
    EXPECT_EQ(s.size(), 4u);
    const std::string csv = edge_samples_csv(s);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "rho,phi,re_u,im_u");
}
