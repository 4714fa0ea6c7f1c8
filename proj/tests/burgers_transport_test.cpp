#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace velliptic;
using velliptic::testing::random_point;
using velliptic::testing::random_structure;
using velliptic::testing::uniform;

namespace {
using cd = std::complex<double>;
const cd I{0.0, 1.0};
}  // namespace

TEST(BurgersTransport, ConstantProfileIsStationary) {
    const InitialProfile p = InitialProfile::constant(I);
    for (int k = 0; k < 20; ++k) EXPECT_LT(std::abs(solve_implicit(p, random_point(-3, 3)) - I), 1e-15);
}

TEST(BurgersTransport, AxisReturnsInitialData) {
    const InitialProfile p = InitialProfile::affine(I, 0.1);
    EXPECT_LT(std::abs(solve_implicit(p, {0, 3}) - (I + 0.3)), 1e-15);
}

TEST(BurgersTransport, EpsilonProfileReproducesClosedForm) {
    const EpsilonStructure e(0.1);
    const InitialProfile p = InitialProfile::epsilon(0.1);
    for (double x = 0.0; x <= 1.0; x += 0.125) {
        for (double y = -1.0; y <= 1.0; y += 0.25) {
            ASSERT_LT(std::abs(solve_implicit(p, {x, y}) - e.lambda({x, y})), 1e-9) << x << ", " << y;
        }
    }
}

TEST(BurgersTransport, AffineSolutionMatchesHandFormula) {
    // lambda = c0 + s (y - lambda x)  =>  lambda = (c0 + s y) / (1 + s x)
    const cd c0{0.2, 1.0};
    const cd s{0.3, -0.1};
    const InitialProfile p = InitialProfile::affine(c0, s);
    for (int k = 0; k < 50; ++k) {
        const Point q = random_point(-1, 1);
        ASSERT_LT(std::abs(solve_implicit(p, q) - (c0 + s * q.y) / (1.0 + s * q.x)), 1e-12);
    }
}

TEST(BurgersTransport, NewtonStopsAtCrossing) {
    const InitialProfile p = InitialProfile::affine(I, -1.0);
    try {
        (void)solve_implicit(p, {1.0, 0.0});
        FAIL() << "expected crossing";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::crossing_detected);
    }
}

TEST(BurgersTransport, NewtonNonConvergenceIsReported) {
    NewtonOptions opt;
    opt.max_iterations = 1;
    opt.tolerance = 1e-300;
    try {
        (void)solve_implicit(InitialProfile::epsilon(0.4), {0.9, 0.7}, opt);
        FAIL() << "expected non-convergence";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::non_convergence);
    }
}

TEST(BurgersTransport, ProfileValidation) {
    const std::vector<double> ys{-1.0, 0.0, 1.0};
    EXPECT_NO_THROW(InitialProfile::epsilon(0.1).validate(ys));
    try {
        InitialProfile::affine(cd{0.0, 0.5}, cd{0.0, 1.0}).validate(ys);
        FAIL() << "expected ellipticity violation";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ellipticity_violation);
    }
}

TEST(BurgersTransport, UnforcedCharacteristicConservesLambda) {
    const CharacteristicState s = integrate_forced(CharacteristicState::launch(InitialProfile::constant(I), 0.3),
                                                   Forcing::none(), 2.0, 50);
    EXPECT_LT(std::abs(s.lambda - I), 1e-12);
    EXPECT_LT(std::abs(s.y - (0.3 + 2.0 * I)), 1e-12);
}

TEST(BurgersTransport, FrozenConstantSource) {
    IntegrationOptions opt;
    opt.mode = CharacteristicMode::frozen;
    const CharacteristicState start{0.0, cd{0.2}, I, cd{1.0}, cd{}};
    const CharacteristicState s = integrate_forced(start, Forcing::constant(1.0, 0.0), 1.5, 10, opt);
    EXPECT_LT(std::abs(s.lambda - (I + 1.5)), 1e-13);
    EXPECT_EQ(s.y, cd{0.2});
}

TEST(BurgersTransport, FrozenLinearGrowth) {
    IntegrationOptions opt;
    opt.mode = CharacteristicMode::frozen;
    const CharacteristicState start{0.0, cd{0.0}, I, cd{1.0}, cd{}};
    const CharacteristicState s = integrate_forced(start, Forcing::constant(0.0, 0.5), 1.0, 100, opt);
    EXPECT_LT(std::abs(s.lambda - I * std::exp(0.5)), 1e-8);
}

TEST(BurgersTransport, IntegrationValidatesArguments) {
    const CharacteristicState start = CharacteristicState::launch(InitialProfile::constant(I), 0.0);
    EXPECT_THROW((void)integrate_forced(start, Forcing::none(), 1.0, 0), Error);
    IntegrationOptions opt;
    opt.domain = [](Point p) { return p.x < 0.5; };
    try {
        (void)integrate_forced(start, Forcing::none(), 1.0, 10, opt);
        FAIL() << "expected out-of-domain";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::out_of_domain);
    }
}

TEST(BurgersTransport, CrossingExamples) {
    std::vector<double> ys;
    for (int k = 0; k <= 20; ++k) ys.push_back(-1.0 + 0.1 * k);
    EXPECT_FALSE(detect_crossing(InitialProfile::constant(I), 0.0, 100.0, ys).has_value());

    const auto c = detect_crossing(InitialProfile::affine(I, -1.0), 0.0, 5.0, ys);
    ASSERT_TRUE(c.has_value());
    EXPECT_NEAR(c->x, 1.0, 1e-3);
    EXPECT_LE(c->jacobian_modulus, 1e-6 * (1 + 1e-9));

    // |1 + x F'(y0)| for the epsilon trace first vanishes at x = 2 / eps,
    // beyond the pole line x = 1 / eps.
    EXPECT_FALSE(detect_crossing(InitialProfile::epsilon(0.1), 0.0, 9.99, ys).has_value());
}

TEST(BurgersTransport, ReconstructCoefficientsExamples) {
    const FiberCoefficients a = reconstruct_coefficients(I);
    EXPECT_DOUBLE_EQ(a.alpha, 1.0);
    EXPECT_DOUBLE_EQ(a.beta, 0.0);
    const FiberCoefficients b = reconstruct_coefficients({-0.5, std::sqrt(7.0) / 2.0});
    EXPECT_NEAR(b.alpha, 2.0, 1e-15);
    EXPECT_NEAR(b.beta, 1.0, 1e-15);
    const FiberCoefficients c = reconstruct_coefficients(2.0 * I);
    EXPECT_DOUBLE_EQ(c.alpha, 4.0);
    EXPECT_DOUBLE_EQ(c.beta, 0.0);
    try {
        (void)reconstruct_coefficients({1.0, -0.5});
        FAIL() << "expected ellipticity violation";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ellipticity_violation);
    }
}

TEST(BurgersTransportProperty, ReconstructionRoundTrip) {
    for (int k = 0; k < 1000; ++k) {
        const StructureField s = random_structure();
        const Point p = random_point(-1, 1);
        const FiberCoefficients f = s.fiber(p);
        const FiberCoefficients r = reconstruct_coefficients(s.spectral_lambda(p, false).lambda);
        ASSERT_NEAR(r.alpha, f.alpha, 1e-12);
        ASSERT_NEAR(r.beta, f.beta, 1e-12);
    }
}

TEST(BurgersTransportProperty, RigidCharacteristicsConserveLambda) {
    const StructureField s = EpsilonStructure(0.1).structure();
    const InitialProfile p = InitialProfile::epsilon(0.1);
    for (int k = 0; k < 20; ++k) {
        const CharacteristicState start = CharacteristicState::launch(p, uniform(-1, 1));
        const CharacteristicState end = integrate_forced(start, Forcing::from_structure(s), 1.0, 20);
        ASSERT_LE(std::abs(end.lambda - start.lambda), 1e-8);
    }
}

TEST(BurgersTransportProperty, ImplicitAgreesWithCharacteristics) {
    // Launch from the complex foot w0 = y - lambda x of the implicit solution;
    // the unforced characteristic must land on the real point (x, y).
    for (int k = 0; k < 200; ++k) {
        const InitialProfile p = k % 2 ? InitialProfile::epsilon(uniform(-0.3, 0.3))
                                       : InitialProfile::affine(cd{uniform(-1, 1), uniform(0.5, 2)},
                                                                cd{uniform(-0.3, 0.3), uniform(-0.3, 0.3)});
        const Point q{uniform(0.0, 1.0), uniform(-1, 1)};
        const ImplicitSolution sol = solve_implicit_report(p, q);
        const cd w0 = q.y - sol.lambda * q.x;
        const CharacteristicState start{0.0, w0, p.value(w0), cd{1.0}, p.derivative(w0)};
        const CharacteristicState end = integrate_forced(start, Forcing::none(), q.x, 40);
        ASSERT_LT(std::abs(end.lambda - sol.lambda), 1e-8);
        ASSERT_LT(std::abs(end.y - cd{q.y}), 1e-8);
        ASSERT_LT(std::abs(end.jacobian - sol.jacobian), 1e-8);
    }
}

TEST(BurgersTransportProperty, RealSystemEquivalence) {
    for (int k = 0; k < 1000; ++k) {
        const StructureField s = random_structure();
        const SpectralState st = s.spectral_lambda(random_point(-1, 1));
        const cd c = st.lambda_x + st.lambda * st.lambda_y;
        const auto [r0, r1] = real_system_residual(st);
        ASSERT_NEAR(r0, c.real(), 1e-12);
        ASSERT_NEAR(r1, c.imag(), 1e-12);
    }
}

TEST(BurgersTransportProperty, Rk4IsFourthOrder) {
    IntegrationOptions opt;
    opt.mode = CharacteristicMode::frozen;
    const Forcing f{[](Point p) { return std::cos(3 * p.x); }, [](Point) { return 0.5; }};
    const CharacteristicState start{0.0, cd{0.0}, I, cd{1.0}, cd{}};
    const auto run = [&](int n) { return integrate_forced(start, f, 2.0, n, opt).lambda; };
    const cd fine = run(160);
    const cd ref = (16.0 * fine - run(80)) / 15.0;
    const double e1 = std::abs(run(10) - ref);
    const double e2 = std::abs(run(20) - ref);
    const double e3 = std::abs(run(40) - ref);
    EXPECT_NEAR(std::log2(e1 / e2), 4.0, 0.3);
    EXPECT_NEAR(std::log2(e2 / e3), 4.0, 0.3);
}
