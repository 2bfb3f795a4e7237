#include <gtest/gtest.h>

#include "impstrip/core.hpp"

using namespace impstrip;

TEST(Xi, SquaresToKernel) {
    const ProblemConfig cfg;
    for (cd k : {cd{0.3, 0.0}, cd{2.5, 0.0}, cd{-4.0, 0.0}, cd{1.0, 0.7}, cd{-0.2, -1.3}}) {
        const cd x = xi(k, cfg);
        EXPECT_LT(std::abs(x * x - (cfg.k0 * cfg.k0 - k * k)), 1e-13 * (1.0 + std::norm(k)));
    }
}

TEST(Xi, PhysicalOnRealAxis) {
    const ProblemConfig cfg;
    for (double k = -10.0; k <= 10.0; k += 0.37) EXPECT_GE(xi(k, cfg).imag(), 0.0) << "k = " << k;
    EXPECT_EQ(xi(0.0, cfg), cfg.k0);
    EXPECT_EQ(xi(cfg.k0, cfg), cd{0.0});
    EXPECT_EQ(xi(-cfg.k0, cfg), cd{0.0});
}

TEST(Xi, EvenInK) {
    const ProblemConfig cfg;
    for (cd k : {cd{0.5, 0.1}, cd{3.0, -0.4}, cd{-1.2, 2.0}})
        EXPECT_LT(std::abs(xi(k, cfg) - xi(-k, cfg)), 1e-14);
}

TEST(Xi, SecondSheetIsNegated) {
    const ProblemConfig cfg;
    for (cd k : {cd{0.5, 0.1}, cd{3.0, -0.4}})
        EXPECT_LT(std::abs(xi(k, {BranchMode::second_sheet}, cfg) + xi(k, cfg)), 1e-14);
}

TEST(Incident, ParityInY) {
    const ProblemConfig cfg;
    for (double x : {-0.7, 0.0, 0.4}) {
        for (double y : {0.2, 1.1}) {
            EXPECT_LT(std::abs(incident_field(cfg, Parity::symmetric, x, y) -
                               incident_field(cfg, Parity::symmetric, x, -y)),
                      1e-15);
            EXPECT_LT(std::abs(incident_field(cfg, Parity::antisymmetric, x, y) +
                               incident_field(cfg, Parity::antisymmetric, x, -y)),
                      1e-15);
        }
    }
}

TEST(Incident, SolvesHelmholtz) {
    const ProblemConfig cfg;
    const double h = 1e-3;
    for (Parity p : {Parity::symmetric, Parity::antisymmetric}) {
        auto u = [&](double x, double y) { return incident_field(cfg, p, x, y); };
        const double x = 0.3, y = 0.45;
        const cd lap = (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4.0 * u(x, y)) / (h * h);
        EXPECT_LT(std::abs(lap + cfg.k0 * cfg.k0 * u(x, y)), 1e-4);
    }
}

TEST(Green, RadialHelmholtz) {
    const cd k0{2.0, 0.05};
    const double h = 1e-4;
    for (double r : {0.3, 1.7, 6.0, 12.0}) {
        const cd g = green_kernel(k0, r), gp = green_kernel(k0, r + h), gm = green_kernel(k0, r - h);
        const cd res = (gp - 2.0 * g + gm) / (h * h) + (gp - gm) / (2.0 * h * r) + k0 * k0 * g;
        EXPECT_LT(std::abs(res), 1e-5 * (1.0 + std::abs(k0 * k0 * g))) << "r = " << r;
    }
}

TEST(Green, RejectsZeroDistance) {
    EXPECT_THROW(green_kernel({2.0, 0.0}, 0.0), Error);
    EXPECT_THROW(green_kernel_dyy({2.0, 0.0}, 0.0), Error);
}

TEST(Green, SplitsReassemble) {
    const cd k0{2.0, 0.05};
    // both sides of the series switch
    for (double r : {0.01, 0.5, 1.9, 2.1, 5.0}) {
        const auto s = kernel::single_split(k0, r);
        EXPECT_LT(std::abs(s.a * std::log(r) + s.b - green_kernel(k0, r)), 1e-13 * (1.0 + std::abs(std::log(r))));
        const auto hs = kernel::hypersingular_split(k0, r);
        const cd want = green_kernel_dyy(k0, r) - 1.0 / (2.0 * kPi * r * r);
        EXPECT_LT(std::abs(hs.a * std::log(r) + hs.b - want), 1e-11 * (1.0 + 1.0 / (r * r)));
    }
}

TEST(Green, DerivativeMatchesFiniteDifference) {
    const cd k0{2.0, 0.05};
    const double h = 1e-5, x = 0.8, y = 0.35;
    // d/dy' at source (0, y') equals -d/dy of G(x, y - y')
    const cd fd = -(green_kernel(k0, std::hypot(x, y + h)) - green_kernel(k0, std::hypot(x, y - h))) / (2.0 * h);
    EXPECT_LT(std::abs(green_kernel_dy(k0, x, y) - fd), 1e-8);
}

TEST(Config, RejectsActiveImpedance) {
    ProblemConfig cfg;
    cfg.eta = {1.0, 0.5};
    try {
        cfg.validate();
        FAIL() << "expected a config error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::config);
        EXPECT_NE(std::string(e.what()).find("dissipation"), std::string::npos);
    }
}

TEST(Config, RejectsBadInputs) {
    ProblemConfig cfg;
    cfg.k0 = {2.0, -0.1};
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.a = 0.0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.theta_in = 2.0;
    EXPECT_THROW(cfg.validate(), Error);
    EXPECT_NO_THROW(cfg.validate(true));
}
