#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace velliptic;
using velliptic::testing::random_point;
using velliptic::testing::uniform;

namespace {

const cplx I{0.0, 1.0};

// Taylor coefficients in eps of (-eps y + i sqrt(4(1 - eps x) - eps^2 y^2)) / (2(1 - eps x)),
// expanded by hand.
cplx mu_exact(Point p) { return {-p.y / 2, p.x / 2}; }
cplx nu_exact(Point p) { return {-p.x * p.y / 2, (3 * p.x * p.x - p.y * p.y) / 8}; }
cplx rho_exact(Point p) { return {-p.x * p.x * p.y / 2, (5 * p.x * p.x * p.x - 3 * p.x * p.y * p.y) / 16}; }

}  // namespace

TEST(Jets, FirstJetOfEpsilonFamily) {
    EXPECT_LT(std::abs(extract_jets(epsilon_family(), {0, 0}, 1).mu), 1e-12);
    EXPECT_LT(std::abs(extract_jets(epsilon_family(), {1, 0}, 1).mu - 0.5 * I), 1e-10);
}

TEST(Jets, HigherJetsAtOneZero) {
    const JetSample j = extract_jets(epsilon_family(), {1, 0});
    EXPECT_LT(std::abs(j.nu - 0.375 * I), 1e-9);
    EXPECT_LT(std::abs(j.rho - 0.3125 * I), 1e-5);
}

TEST(Jets, ConstantFamilyHasZeroJets) {
    for (int k = 0; k < 10; ++k) {
        const JetSample j = extract_jets(constant_family(), random_point(-2, 2));
        EXPECT_EQ(j.lambda0, I);
        EXPECT_EQ(j.mu, 0.0);
        EXPECT_EQ(j.nu, 0.0);
        EXPECT_EQ(j.rho, 0.0);
    }
}

TEST(Jets, OrderZeroAnchor) {
    const JetSample j = extract_jets(epsilon_family(), {0.3, -0.7}, 0);
    EXPECT_EQ(j.lambda0.real(), 0.0);
    EXPECT_EQ(j.lambda0.imag(), 1.0);
}

TEST(Jets, ExtractionGuards) {
    try {
        (void)extract_jets(epsilon_family(), {0, 0}, 3, 1e-5);
        FAIL() << "expected invalid argument";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
    }
    EXPECT_THROW((void)extract_jets(epsilon_family(), {0, 0}, 4), Error);
    // eps = 0.03 puts the pole line at x = 33.3
    EXPECT_THROW((void)extract_jets(epsilon_family(), {40.0, 0.0}), Error);
}

TEST(Jets, FirstJetCheckExamples) {
    EXPECT_LT(std::abs(check_first_jet([](Point p) { return cplx{p.x, 0}; }, {0.2, 0.3}) - 1.0), 1e-12);
    const ComplexField sq = [](Point p) { const cplx z{p.x, p.y}; return z * z; };
    EXPECT_LT(std::abs(check_first_jet(sq, {0.2, 0.3})), 1e-12);
}

TEST(Jets, SecondJetCheckExamples) {
    const ComplexField zero = [](Point) { return cplx{}; };
    const ComplexField cube = [](Point p) { const cplx z{p.x, p.y}; return z * z * z; };
    EXPECT_LT(std::abs(check_second_jet(zero, cube, {0.2, 0.3})), 1e-12);
    EXPECT_LT(std::abs(check_second_jet(zero, [](Point p) { return cplx{p.x, 0}; }, {0.2, 0.3}) - 1.0), 1e-12);
}

TEST(Jets, ThirdJetCheckExamples) {
    const ComplexField zero = [](Point) { return cplx{}; };
    const ComplexField ex = [](Point p) { return std::exp(cplx{p.x, p.y}); };
    EXPECT_LT(std::abs(check_third_jet(zero, zero, ex, {0.2, 0.3})), 1e-9);
    EXPECT_LT(std::abs(check_third_jet(zero, zero, [](Point p) { return cplx{p.y, 0}; }, {0.2, 0.3}) - I), 1e-12);
}

TEST(Jets, ForcedEquationsHoldForHandJets) {
    for (int k = 0; k < 50; ++k) {
        const Point p = random_point(-1, 1);
        EXPECT_LT(std::abs(check_first_jet(mu_exact, p)), 1e-13);
        EXPECT_LT(std::abs(check_second_jet(mu_exact, nu_exact, p)), 1e-13);
        EXPECT_LT(std::abs(check_third_jet(mu_exact, nu_exact, rho_exact, p)), 1e-12);
    }
}

TEST(JetsProperty, ExtractedJetsMatchHandExpansion) {
    const JetExtractor ext(epsilon_family());
    for (int k = 0; k < 200; ++k) {
        const Point p = random_point(-1, 1);
        const JetSample j = ext.extract(p);
        ASSERT_LT(std::abs(j.mu - mu_exact(p)), 1e-10);
        ASSERT_LT(std::abs(j.nu - nu_exact(p)), 1e-8);
        ASSERT_LT(std::abs(j.rho - rho_exact(p)), 1e-5);
    }
}

TEST(JetsProperty, HierarchyResiduals) {
    const JetExtractor ext(epsilon_family());
    for (int k = 0; k < 30; ++k) {
        const Point p = random_point(-1, 1);
        ASSERT_LE(std::abs(check_first_jet(ext.mu(), p)), 1e-8);
        ASSERT_LE(std::abs(check_second_jet(ext.mu(), ext.nu(), p)), 1e-6);
        ASSERT_LE(std::abs(check_third_jet(ext.mu(), ext.nu(), ext.rho(), p)), 1e-5);
    }
}

TEST(JetsProperty, ThirdJetImprovesUnderStepRefinement) {
    const Point p{0.7, -0.4};
    const double e1 = std::abs(extract_jets(epsilon_family(), p, 3, 4e-2).rho - rho_exact(p));
    const double e2 = std::abs(extract_jets(epsilon_family(), p, 3, 2e-2).rho - rho_exact(p));
    EXPECT_GT(e1 / e2, 8.0) << e1 << " " << e2;
}

TEST(JetsProperty, FirstJetResidualIsScaleInvariant) {
    const JetExtractor ext(epsilon_family());
    const ComplexField mu = ext.mu();
    for (int k = 0; k < 20; ++k) {
        const cplx c{uniform(-2, 2), uniform(-2, 2)};
        const Point p = random_point(-1, 1);
        const cplx r = check_first_jet(mu, p);
        const cplx rc = check_first_jet([&](Point q) { return c * mu(q); }, p);
        ASSERT_LT(std::abs(rc - c * r), 1e-12);
        // the alternative normalization (alpha1 + i beta1)/2 = -i mu is also holomorphic
        ASSERT_LT(std::abs(check_first_jet([&](Point q) { return -I * mu(q); }, p)), 1e-8);
    }
}
