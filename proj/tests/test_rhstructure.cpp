#include <gtest/gtest.h>

#include <algorithm>

#include "impstrip/rhstructure.hpp"

using namespace impstrip;

namespace {

const JumpLabel kAll[] = {JumpLabel::M1, JumpLabel::M2, JumpLabel::N1, JumpLabel::N2};

double rel_defect(const Mat2& a, const Mat2& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace

TEST(Cut, StartsAtBranchPointAndReflects) {
    const ProblemConfig cfg;
    const auto g2 = build_cut(cfg, ContourLabel::G2, 20.0), g1 = build_cut(cfg, ContourLabel::G1, 20.0);
    ASSERT_EQ(g2.nodes.size(), g1.nodes.size());
    EXPECT_EQ(g2.nodes.front(), cfg.k0);
    for (std::size_t i = 0; i < g2.nodes.size(); ++i) EXPECT_EQ(g1.nodes[i], -g2.nodes[i]);
    EXPECT_NEAR(std::abs(g2.nodes.back()), 20.0, 1e-9);
}

TEST(Cut, LiesOnLocus) {
    const ProblemConfig cfg;
    const auto g2 = build_cut(cfg, ContourLabel::G2, 100.0);
    EXPECT_LT(locus_defect(g2, cfg), 1e-13);
    // all nodes in the first quadrant, tending to the imaginary axis
    for (const cd& k : g2.nodes) {
        EXPECT_GE(k.real(), 0.0);
        EXPECT_GE(k.imag(), 0.0);
    }
    EXPECT_LT(g2.nodes.back().real(), 0.01);
}

TEST(Cut, RejectsSmallRadius) {
    const ProblemConfig cfg;
    EXPECT_THROW(build_cut(cfg, ContourLabel::G2, 1.0), Error);
    EXPECT_THROW(build_cut(cfg, ContourLabel::G2_deformed, 10.0), Error);
}

TEST(Jump, DeterminantsMatchClosedForm) {
    const ProblemConfig cfg;
    const auto g2 = build_cut(cfg, ContourLabel::G2, 20.0), g1 = build_cut(cfg, ContourLabel::G1, 20.0);
    for (JumpLabel l : kAll) {
        const auto& c = (l == JumpLabel::M2 || l == JumpLabel::N2) ? g2 : g1;
        const auto r = jump_algebra(l, c, cfg);
        EXPECT_LT(r.det_error, 1e-12) << to_string(l);
        EXPECT_LT(r.roundtrip_error, 1e-12) << to_string(l);
        EXPECT_GT(r.samples, 50) << to_string(l);
    }
}

TEST(Jump, IndexSwapRelatesPairs) {
    Mat2 P;
    P << 0.0, 1.0, 1.0, 0.0;
    const cd eta{1.0, -1.0};
    for (cd x : {cd{0.4, 0.0}, cd{1.7, 0.2}, cd{0.0, 3.0}}) {
        EXPECT_LT(rel_defect(P * jump_matrix_xi(JumpLabel::M1, x, eta) * P, jump_matrix_xi(JumpLabel::M2, x, eta)),
                  1e-15);
        EXPECT_LT(rel_defect(P * jump_matrix_xi(JumpLabel::N1, x, eta) * P, jump_matrix_xi(JumpLabel::N2, x, eta)),
                  1e-15);
    }
}

TEST(Jump, LargeImpedanceLimit) {
    // eta -> infinity: the M matrices tend to the identity
    const cd x{1.3, 0.1};
    const Mat2 m = jump_matrix_xi(JumpLabel::M1, x, cd{1e9, -1e9});
    EXPECT_LT((m - Mat2::Identity()).norm(), 1e-8);
}

TEST(Jump, SingularWhenDenominatorVanishes) {
    const cd eta{1.0, -1.0};
    const cd x = -kI * eta;  // eta - i x = 0
    for (JumpLabel l : kAll) {
        try {
            jump_matrix_xi(l, x, eta);
            FAIL() << "expected singular_jump for " << to_string(l);
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::singular_jump);
        }
    }
}

TEST(Sheet, DoubleCrossingReturnsToStart) {
    const ProblemConfig cfg;
    const auto cuts = undeformed_cuts(cfg, 20.0);
    const std::vector<const Contour*> cs{&cuts.g1, &cuts.g2};
    // G2 obeys Re k Im k = Im(k0^2) / 2, so this segment cuts it once near Im k = 0.1
    const std::vector<cd> once{{1.0, 0.01}, {1.0, 1.0}};
    const std::vector<cd> twice{{1.0, 0.01}, {1.0, 1.0}, {1.0, 0.01}};
    EXPECT_EQ(track_sheet(Sheet::physical, once, cs), Sheet::unphysical);
    EXPECT_EQ(track_sheet(Sheet::physical, twice, cs), Sheet::physical);
    // the real axis segment avoids both cuts
    EXPECT_EQ(track_sheet(Sheet::physical, {{-1.0, 0.0}, {1.0, 0.0}}, cs), Sheet::physical);
}

TEST(Sheet, PolygonContainment) {
    const std::vector<cd> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    EXPECT_TRUE(point_in_polygon({0.5, 0.5}, sq));
    EXPECT_FALSE(point_in_polygon({1.5, 0.5}, sq));
}

TEST(KPrime, ClassificationFollowsRealPart) {
    // with the undeformed cuts k' is a physical zero exactly when Re(eta) < 0
    ProblemConfig cfg;
    for (cd eta : {cd{1.0, -1.0}, cd{0.3, -2.0}, cd{2.0, 0.0}}) {
        cfg.eta = eta;
        const auto sp = k_prime(cfg);
        EXPECT_EQ(sp.sheet, Sheet::unphysical) << eta;
        EXPECT_FALSE(sp.on_cut);
    }
    for (cd eta : {cd{-1.0, -1.0}, cd{-0.3, -2.0}, cd{-2.0, 0.0}}) {
        cfg.eta = eta;
        EXPECT_EQ(k_prime(cfg).sheet, Sheet::physical) << eta;
    }
    cfg.eta = {0.0, -0.5};
    const auto sp = k_prime(cfg);
    EXPECT_TRUE(sp.on_cut);
    EXPECT_EQ(sp.sheet, Sheet::unphysical);
}

TEST(KPrime, IsZeroOfDenominator) {
    ProblemConfig cfg;
    for (cd eta : {cd{1.0, -1.0}, cd{-0.5, -0.2}, cd{0.0, -0.5}, cd{-1.5, 0.0}}) {
        cfg.eta = eta;
        const auto cuts = undeformed_cuts(cfg, 50.0 * std::abs(cfg.k0));
        const auto sp = k_prime(cfg, cuts);
        EXPECT_GE(sp.k.imag(), 0.0);
        EXPECT_LT(k_prime_defect(cfg, sp, cuts), 1e-12) << eta;
    }
}

TEST(KPrime, BranchCollisionForHardStrip) {
    ProblemConfig cfg;
    cfg.eta = 0.0;
    try {
        k_prime(cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::branch_collision);
    }
}

TEST(Deformation, RuleIsThirdQuadrant) {
    EXPECT_TRUE(deformation_needed(cd{-1.0, -1.0}));
    EXPECT_FALSE(deformation_needed(cd{1.0, -1.0}));
    EXPECT_FALSE(deformation_needed(cd{-1.0, 0.0}));
    EXPECT_FALSE(deformation_needed(cd{0.0, -1.0}));
}

TEST(Deformation, SweepsKPrimeOffThePhysicalSheet) {
    ProblemConfig cfg;
    for (cd eta : {cd{-1.0, -1.0}, cd{-3.0, -0.2}, cd{-0.2, -3.0}}) {
        cfg.eta = eta;
        const auto cuts = deform_cuts(cfg);
        EXPECT_TRUE(cuts.deformed);
        EXPECT_EQ(cuts.g2.nodes.front(), cfg.k0);
        const auto sp = k_prime(cfg, cuts);
        EXPECT_EQ(sp.sheet, Sheet::unphysical) << eta;
        EXPECT_LT(k_prime_defect(cfg, sp, cuts), 1e-12) << eta;
        for (const cd& k : cuts.g2.nodes) EXPECT_GT(k.imag(), 0.0);
    }
}

TEST(KPrime, NearRealAxisLimit) {
    ProblemConfig cfg;
    cfg.k0 = {2.0, 1e-4};
    cfg.eta = {1.0, -1e-6};
    const cd kp = k_prime(cfg).k;
    EXPECT_LT(kp.imag(), 1e-3);
    EXPECT_GT(kp.real(), cfg.k0.real());
}

TEST(Export, CsvHeaders) {
    const ProblemConfig cfg;
    const auto g2 = build_cut(cfg, ContourLabel::G2, 10.0, 20);
    const std::string c = contour_csv(g2);
    EXPECT_EQ(c.substr(0, c.find('\n')), "node_index,re_k,im_k");
    EXPECT_EQ(std::count(c.begin(), c.end(), '\n'), 22);
}
