#include <cmath>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace velliptic;
using velliptic::testing::constant_structure;
using velliptic::testing::dist;
using velliptic::testing::nonrigid_structure;
using velliptic::testing::parse;
using velliptic::testing::random_point;
using velliptic::testing::random_section;
using velliptic::testing::random_structure;
using velliptic::testing::uniform;

namespace {

Section sec(const char* u, const char* v) { return Section::from_expressions(parse(u), parse(v)); }

// a + b i + c Z(., zeta): dbar-holomorphic in any rigid structure, since
// 2 dbar Z = -(x - xi) G.
Section holomorphic(double a, double b, double c, Point zeta) {
    const Section z = Section::kernel(zeta);
    return {ScalarField::constant(a) + ScalarField::constant(c) * z.u(),
            ScalarField::constant(b) + ScalarField::constant(c) * z.v()};
}

Section random_holomorphic() {
    return holomorphic(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), random_point(-0.5, 0.5));
}

}  // namespace

TEST(CrCalculus, RealPartialsInConstantStructure) {
    const StructureField s = constant_structure();
    const Section z = sec("x", "y");
    EXPECT_LT(dist(d_x(z, s, {0.3, 0.2}), 1.0, 0.0), 1e-15);
    EXPECT_LT(dist(d_y(z, s, {0.3, 0.2}), 0.0, 1.0), 1e-15);
}

TEST(CrCalculus, PartialOfGeneratorIsGeneratorDerivative) {
    const StructureField s = EpsilonStructure(0.1).structure();
    EXPECT_LT(dist(d_x(Section::generator(), s, {0, 0}), 0.0, 0.05), 1e-15);
}

TEST(CrCalculus, UnitHasZeroPartials) {
    for (const StructureField& s : {random_structure(), nonrigid_structure(), EpsilonStructure(0.3).structure()}) {
        const Point p = random_point(-0.3, 0.3);
        EXPECT_LT(dist(d_x(Section::one(), s, p), 0.0, 0.0), 1e-15);
        EXPECT_LT(dist(d_y(Section::one(), s, p), 0.0, 0.0), 1e-15);
    }
}

TEST(CrCalculus, DbarExamples) {
    const StructureField c = constant_structure();
    EXPECT_LT(dist(dbar(sec("x", "-y"), c, {0.4, -0.1}), 1.0, 0.0), 1e-15);
    EXPECT_LT(dist(dbar(sec("x", "y"), c, {0.4, -0.1}), 0.0, 0.0), 1e-15);
    EXPECT_LT(dist(dz(sec("x", "y"), c, {0.4, -0.1}), 1.0, 0.0), 1e-15);
    const StructureField e = EpsilonStructure(0.1).structure();
    for (int k = 0; k < 20; ++k) EXPECT_LT(dist(dbar(Section::generator(), e, random_point()), 0.0, 0.0), 1e-15);
}

TEST(CrCalculus, CrSystemExamples) {
    const auto [a0, a1] = cr_system_residual(sec("x", "y"), constant_structure(), {0.1, 0.7});
    EXPECT_EQ(a0, 0.0);
    EXPECT_EQ(a1, 0.0);
    const auto [b0, b1] = cr_system_residual(Section::generator(), nonrigid_structure(), {0, 0});
    EXPECT_NEAR(b0, 0.0, 1e-15);
    EXPECT_NEAR(b1, -0.25, 1e-15);
    const StructureField e = EpsilonStructure(0.2).structure();
    const Section f = sec("x^2*y", "cos(x) - y");
    const Point p{0.3, -0.4};
    const auto [c0, c1] = cr_system_residual(f, e, p);
    const AlgebraElement d = dbar(f, e, p);
    EXPECT_NEAR(c0, 2 * d.u, 1e-12);
    EXPECT_NEAR(c1, 2 * d.v, 1e-12);
}

TEST(CrCalculus, LeibnizExamples) {
    const StructureField e = EpsilonStructure(0.1).structure();
    const LeibnizDefect a = leibniz_defect(sec("x*y", "x+y"), sec("1 - y", "x^2"), e, {0.2, 0.1});
    EXPECT_LT(magnitude(a.direct), 1e-14);
    const StructureField n = nonrigid_structure();
    const LeibnizDefect b = leibniz_defect(sec("x*y", "x+y"), sec("1 - y", "0"), n, {0.2, 0.1});
    EXPECT_LT(magnitude(b.direct), 1e-14);
    // f = g = i at the origin, by hand: fg = (-1, -y/2), so d_x(fg) = 0 and
    // d_y(fg) = (0, -1/2); dbar(fg) = i (0, -1/2) / 2 = (1/4, 0). With
    // dbar i = G/2 = (0, -1/8), dbar(f) g + f dbar(g) = i (0, -1/4) = (1/4, 0).
    // The direct defect vanishes while v q G / 2 = (0, -1/8).
    const LeibnizDefect c = leibniz_defect(Section::generator(), Section::generator(), n, {0, 0});
    EXPECT_LT(dist(c.direct, 0.0, 0.0), 1e-15);
    EXPECT_LT(dist(c.formula, 0.0, -0.125), 1e-15);
}

TEST(CrCalculus, CovariantDExamples) {
    const StructureField c = constant_structure(2.0, 1.0);
    const Section f = sec("x*y", "x - y^2");
    const Point p{0.2, 0.5};
    EXPECT_LT(dist(covariant_D(f, c, p), dbar(f, c, p)), 1e-15);
    const StructureField e = EpsilonStructure(0.1).structure();
    EXPECT_LT(dist(covariant_D(Section::one(), e, {0, 0}), -0.025, 0.0), 1e-15);
}

TEST(CrCalculus, GaugedHolomorphicSectionsAreCovariantlyHolomorphic) {
    const EpsilonStructure eps(0.1);
    const StructureField e = eps.structure();
    const ScalarField inv_psi = reciprocal(eps.weight_field());
    for (int k = 0; k < 50; ++k) {
        const Section f = scaled(random_holomorphic(), inv_psi);
        ASSERT_LT(magnitude(covariant_D(f, e, random_point())), 1e-13);
    }
}

TEST(CrCalculus, WeightedProductExamples) {
    const StructureField s = random_structure();
    const Weight one{ScalarField::constant(1.0)};
    const Section f = random_section();
    const Section g = random_section();
    const Point p = random_point();
    const FiberCoefficients fib = s.fiber(p);
    EXPECT_LT(dist(weighted_product(f, g, one, s).at(p, fib), f.at(p, fib) * g.at(p, fib)), 1e-15);
}

TEST(CrCalculus, WeightResidualExamples) {
    const EpsilonStructure eps(0.1);
    const StructureField e = eps.structure();
    const Weight sqrt_s{eps.weight_field()};
    const Weight one{ScalarField::constant(1.0)};
    for (int k = 0; k < 20; ++k) {
        const Point p = random_point();
        EXPECT_LT(magnitude(weight_residual(sqrt_s, e, p)), 1e-10);
        const auto [r0, r1] = weight_real_residual(sqrt_s, e, p);
        EXPECT_LT(std::hypot(r0, r1), 1e-10);
        EXPECT_LT(magnitude(weight_residual(one, constant_structure(), p)), 1e-15);
        const AlgebraElement iy = e.generator_derivatives(p).iy;
        EXPECT_LT(dist(weight_residual(one, e, p), -0.5 * iy.u, -0.5 * iy.v), 1e-15);
    }
    EXPECT_GT(magnitude(weight_residual(one, e, {0, 0})), 1e-3);
}

TEST(CrCalculus, SolveWeightExamples) {
    const WeightSolution c = solve_weight(constant_structure(2.0, 1.0), {0, 0}, {0.4, -0.3});
    EXPECT_EQ(c.psi, 1.0);
    const EpsilonStructure eps(0.1);
    const StructureField e = eps.structure();
    const double ref = eps.weight({0, 0});
    for (Point q : {Point{0.4, 0.3}, Point{-0.4, 0.3}, Point{0.5, -0.5}, Point{-0.2, -0.45}}) {
        const WeightSolution h = solve_weight(e, {0, 0}, q);
        EXPECT_NEAR(h.psi * ref / eps.weight(q), 1.0, 1e-8) << to_string(q);
        WeightOptions opt;
        opt.path = WeightPath::vertical_first;
        EXPECT_NEAR(solve_weight(e, {0, 0}, q, opt).psi, h.psi, 1e-8);
    }
    EXPECT_EQ(solve_weight(e, {0.2, 0.1}, {0.2, 0.1}).psi, 1.0);
}

TEST(CrCalculus, SolveWeightRefusesNonClosedForm) {
    const StructureField n = nonrigid_structure();
    try {
        (void)solve_weight(n, {0, 0}, {0.5, 0.5});
        FAIL() << "expected not-integrable";
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::not_integrable);
    }
}

TEST(CrCalculus, NonEllipticPointsAreRejected) {
    const StructureField s(CoefficientEvaluator::constant(1.0, 3.0));
    try {
        (void)dbar(Section::generator(), s, {0, 0});
        FAIL() << "expected ellipticity violation";
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::ellipticity_violation);
    }
}

TEST(CrCalculusProperty, CrDecomposition) {
    for (int k = 0; k < 1000; ++k) {
        const StructureField s = random_structure();
        const Section f = random_section();
        const Point p = random_point(-1, 1);
        const AlgebraElement d2 = 2.0 * dbar(f, s, p);
        const auto [r0, r1] = cr_system_residual(f, s, p);
        ASSERT_NEAR(d2.u, r0, 1e-9);
        ASSERT_NEAR(d2.v, r1, 1e-9);
        // Homogeneous part from the component jets and the coefficients, plus v G.
        const SectionJet j = f.jet(p, 1);
        const FiberCoefficients c = s.fiber(p);
        const AlgebraElement G = s.obstruction(p).G;
        ASSERT_NEAR(d2.u, j.u.x - c.alpha * j.v.y + j.v.v * G.u, 1e-9);
        ASSERT_NEAR(d2.v, j.v.x + j.u.y - c.beta * j.v.y + j.v.v * G.v, 1e-9);
    }
}

TEST(CrCalculusProperty, LeibnizDefectFormulaOnRigidStructures) {
    for (int k = 0; k < 1000; ++k) {
        const StructureField s = EpsilonStructure(uniform(-0.5, 0.5)).structure();
        const LeibnizDefect d = leibniz_defect(random_section(), random_section(), s, random_point(-1, 1));
        ASSERT_LT(dist(d.direct, d.formula), 1e-9);
    }
}

TEST(CrCalculusProperty, RealPartialsAreDerivations) {
    for (int k = 0; k < 500; ++k) {
        const StructureField s = random_structure();
        const Section f = random_section();
        const Section g = random_section();
        const Point p = random_point(-1, 1);
        ASSERT_LT(magnitude(real_derivative_defect(f, g, s, p, 'x')), 1e-10);
        ASSERT_LT(magnitude(real_derivative_defect(f, g, s, p, 'y')), 1e-10);
    }
}

TEST(CrCalculusProperty, TotalDefectDecomposition) {
    // Differentiating i^2 = -alpha - beta i: the structural part
    // delta(alpha) + delta(beta) i cancels the geometric part (2i + beta) delta(i),
    // so the dbar defect reduces to the transport of i alone, v q (i_x + i i_y) / 2.
    for (int k = 0; k < 500; ++k) {
        const StructureField s = random_structure();
        const Point p = random_point(-1, 1);
        const CoefficientSample c = s.coefficients().sample(p, 1);
        const FiberCoefficients fib = c.fiber();
        const GeneratorDerivatives g = s.generator_derivatives(p);
        const AlgebraElement i = AlgebraElement::generator(fib);
        const AlgebraElement two_i_beta = 2.0 * i + AlgebraElement{fib.beta, 0.0, fib};
        const AlgebraElement tx = AlgebraElement{c.alpha.x, c.beta.x, fib} + two_i_beta * g.ix;
        const AlgebraElement ty = AlgebraElement{c.alpha.y, c.beta.y, fib} + two_i_beta * g.iy;
        ASSERT_LT(magnitude(tx), 1e-12);
        ASSERT_LT(magnitude(ty), 1e-12);

        // dbar defect = -(v q / 2) [dbar-part of alpha + beta i] - (v q / 2)(2i + beta) 2 dbar(i)
        const Section f = random_section();
        const Section h = random_section();
        const double vq = f.v()(p) * h.v()(p);
        const AlgebraElement structural = AlgebraElement{c.alpha.x, c.beta.x, fib} + i * AlgebraElement{c.alpha.y, c.beta.y, fib};
        const AlgebraElement geometric = two_i_beta * (g.ix + i * g.iy);
        const AlgebraElement total = (-0.5 * vq) * (structural + geometric);
        ASSERT_LT(dist(leibniz_defect(f, h, s, p).direct, total), 1e-9);
    }
}

TEST(CrCalculusProperty, Intertwining) {
    for (int k = 0; k < 300; ++k) {
        const EpsilonStructure eps(uniform(-0.4, 0.4), uniform(0.5, 2.0));
        const StructureField s = eps.structure();
        const Weight w{eps.weight_field()};
        const Section f = random_section();
        const Point p = random_point();
        const AlgebraElement lhs = dbar(scaled(f, w.psi), s, p);
        const AlgebraElement rhs = w.psi(p) * covariant_D(f, s, p);
        ASSERT_LT(dist(lhs, rhs), 1e-9);
    }
}

TEST(CrCalculusProperty, WeightedProductIsAssociative) {
    for (int k = 0; k < 300; ++k) {
        const EpsilonStructure eps(uniform(-0.4, 0.4));
        const StructureField s = eps.structure();
        const Weight w{eps.weight_field()};
        const Section f = random_section();
        const Section g = random_section();
        const Section h = random_section();
        const Point p = random_point();
        const FiberCoefficients fib = s.fiber(p);
        const AlgebraElement l = weighted_product(weighted_product(f, g, w, s), h, w, s).at(p, fib);
        const AlgebraElement r = weighted_product(f, weighted_product(g, h, w, s), w, s).at(p, fib);
        ASSERT_LT(dist(l, r), 1e-12 * (1.0 + magnitude(l)));
    }
}

TEST(CrCalculusProperty, WeightedProductClosure) {
    for (int k = 0; k < 300; ++k) {
        const EpsilonStructure eps(uniform(-0.4, 0.4), uniform(0.5, 2.0));
        const StructureField s = eps.structure();
        const Weight w{eps.weight_field()};
        const ScalarField inv_psi = reciprocal(w.psi);
        const Section f = scaled(random_holomorphic(), inv_psi);
        const Section g = scaled(random_holomorphic(), inv_psi);
        const Point p = random_point();
        ASSERT_LT(magnitude(covariant_D(f, s, p)), 1e-10);
        ASSERT_LT(magnitude(covariant_D(g, s, p)), 1e-10);
        ASSERT_LT(magnitude(covariant_D(weighted_product(f, g, w, s), s, p)), 1e-7);
    }
}

TEST(CrCalculusProperty, RigidityIndicatorsAgree) {
    const StructureField rigid = EpsilonStructure(0.2).structure();
    const StructureField other = nonrigid_structure();
    for (int k = 0; k < 200; ++k) {
        const Point p = random_point(-0.4, 0.4);
        const Section f = random_section();
        const Section g = sec("0.3 + x", "1 + 0.2*y");
        {
            const Obstruction ob = rigid.obstruction(p);
            ASSERT_LT(magnitude(ob.G), 1e-12);
            const SpectralState st = rigid.spectral_lambda(p);
            ASSERT_LT(std::abs(st.lambda_x + st.lambda * st.lambda_y), 1e-8);
            ASSERT_LT(magnitude(leibniz_defect(f, g, rigid, p).direct), 1e-9);
            ASSERT_LT(std::hypot(ob.A, ob.B), 1e-12);
        }
        {
            const Obstruction ob = other.obstruction(p);
            ASSERT_GT(magnitude(ob.G), 0.1);
            const SpectralState st = other.spectral_lambda(p);
            ASSERT_GT(std::abs(st.lambda_x + st.lambda * st.lambda_y), 1e-3);
            ASSERT_GT(std::hypot(ob.A, ob.B), 0.1);
            const LeibnizDefect d = leibniz_defect(Section::generator(), g, other, p);
            ASSERT_GT(magnitude(d.formula), 1e-3);
        }
    }
}
