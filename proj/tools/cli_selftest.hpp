#pragma once

// Property suite behind `velliptic selftest`. Checks that need rigidity or
// the epsilon fixture are skipped for structures that do not supply them.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cli_config.hpp"
#include "velliptic/velliptic.hpp"

namespace velliptic::cli {

struct SelfCheck {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

namespace detail {

inline SelfCheck make_check(std::string name, double value, double tol) {
    return {std::move(name), value, tol, value <= tol};
}

inline double rel_err(const AlgebraElement& a, const AlgebraElement& b) {
    const double d = std::hypot(a.u - b.u, a.v - b.v);
    return d / std::max(1.0, std::hypot(b.u, b.v));
}

inline double algebra_laws(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(0.2, 3.0);
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        const double beta = unif(rng);
        const FiberCoefficients f{beta * beta / 4.0 + pos(rng), beta};
        const AlgebraElement a{unif(rng), unif(rng), f};
        const AlgebraElement b{unif(rng), unif(rng), f};
        const AlgebraElement ab = a * b;
        const double na = norm(a);
        const double nb = norm(b);
        worst = std::max(worst, std::abs(norm(ab) - na * nb) / std::max(1.0, na * nb));
        worst = std::max(worst, rel_err(conj(ab), conj(a) * conj(b)));
        if (na > 1e-6) worst = std::max(worst, rel_err(a * inverse(a), AlgebraElement::one(f)));
        const AlgebraElement j = j_element(f);
        worst = std::max(worst, rel_err(j * j, -AlgebraElement::one(f)));
        const cplx e = embed(a) * embed(b);
        worst = std::max(worst, std::abs(embed(ab) - e) / std::max(1.0, std::abs(e)));
    }
    return worst;
}

}  // namespace detail

inline std::vector<SelfCheck> run_selftest(const json& cfg) {
    using detail::make_check;
    std::vector<SelfCheck> out;
    std::mt19937_64 rng(20240607);
    const StructureSpec spec = build_structure(cfg);
    const StructureField& s = spec.field;
    const json& numerics = at(cfg, "numerics", "config");
    const json& tols = at(numerics, "tolerances", "numerics");
    const bool fd = s.coefficients().finite_difference();
    const double analytic_tol = fd ? 1e-5 : 1e-10;
    const double transport_tol = fd ? 1e-4 : 1e-8;

    out.push_back(make_check("algebra_laws", detail::algebra_laws(rng, 2000), 1e-10));

    std::vector<Point> grid;
    const json& g = at(numerics, "grid", "numerics");
    for (double x : get_range(g, "x", "numerics.grid")) {
        for (double y : get_range(g, "y", "numerics.grid")) grid.push_back({x, y});
    }

    double def = 0.0;
    double burg = 0.0;
    double forced = 0.0;
    double rigid = 0.0;
    double leib = 0.0;
    double cr_ab = 0.0;
    const Section f = build_section(cfg, "f");
    const Section gs = build_section(cfg, "g");
    for (Point p : grid) {
        const auto [r1, r2] = s.defining_residual(p);
        const FiberCoefficients fib = s.fiber(p);
        const double scale = std::max({1.0, std::abs(fib.alpha), std::abs(fib.beta)});
        def = std::max(def, std::max(magnitude(r1), magnitude(r2)) / scale);
        burg = std::max(burg, std::abs(s.burgers_residual(p)));
        const auto [c0, c1] = s.forced_coefficient_residual(p);
        forced = std::max(forced, std::hypot(c0, c1));
        rigid = std::max(rigid, s.rigidity_residual(p));
        const LeibnizDefect d = leibniz_defect(f, gs, s, p);
        leib = std::max(leib, detail::rel_err(d.direct, d.formula));
        const Obstruction o = s.obstruction(p);
        const auto [A, B] = StructureField::closed_form_AB(s.elliptic_sample(p, 1));
        cr_ab = std::max(cr_ab, std::hypot(o.A - A, o.B - B));
    }
    out.push_back(make_check("defining_residual", def, analytic_tol));
    out.push_back(make_check("burgers_residual", burg, transport_tol));
    out.push_back(make_check("forced_coefficient_residual", forced, transport_tol));
    out.push_back(make_check("leibniz_formula", leib, fd ? 1e-5 : 1e-9));
    out.push_back(make_check("inhomogeneity_closed_form", cr_ab, analytic_tol));

    if (!fd && s.coefficients().max_order() >= 2) {
        // analytic i_xx against a central difference of i_x
        double cons = 0.0;
        for (Point p : grid) {
            const GeneratorDerivatives d = s.generator_derivatives(p, 2);
            const double h = 1e-5;
            const AlgebraElement ixp = s.generator_derivatives(Point{p.x + h, p.y}, 1).ix;
            const AlgebraElement ixm = s.generator_derivatives(Point{p.x - h, p.y}, 1).ix;
            // d/dx (u + v i) = u_x + v_x i + v i_x
            const AlgebraElement fdxx =
                AlgebraElement{(ixp.u - ixm.u) / (2 * h), (ixp.v - ixm.v) / (2 * h), d.ix.fiber} + d.ix.v * d.ix;
            cons = std::max(cons, detail::rel_err(*d.ixx, fdxx));
        }
        out.push_back(make_check("generator_second_derivative", cons, 1e-6));
    }

    const Point zeta = get_point(numerics, "zeta", "numerics");
    const int n_samples = get_int(numerics, "n_samples", "numerics");
    const AlgebraElement target = 2.0 * std::numbers::pi * j_element(s.elliptic_sample(zeta, 0).fiber());
    out.push_back(make_check("frozen_residue", magnitude(frozen_residue(s, zeta, 0.2, n_samples) - target),
                             get_number(tols, "residue", "numerics.tolerances")));

    const double tau_rigid = get_number(tols, "rigid", "numerics.tolerances");
    const Region region = build_region(cfg);
    const RigidityGate gate = rigidity_gate(s, region, tau_rigid);
    if (gate.max_residual <= gate.tolerance) {
        out.push_back(make_check("rigidity", rigid, fd ? 1e-5 : 1e-8));
        CPOptions opt;
        opt.mesh = build_mesh(numerics);
        opt.transport = get_transport(numerics);
        opt.tau_rigid = tau_rigid;
        opt.compute_alternate = false;
        const CPReport rep = reconstruct(f, region, s, zeta, opt);
        out.push_back(make_check("cp_reconstruct", rep.residual, get_number(tols, "cp", "numerics.tolerances")));

        const Point p = get_point(numerics, "point", "numerics");
        const std::vector<double> hs = get_numbers(numerics, "h_list", "numerics");
        const SecondOrderReport so = verify_expansion(gs, p, s, hs, tau_rigid);
        out.push_back(make_check("second_order_residual", so.finest_residual(),
                                 get_number(tols, "second_order", "numerics.tolerances")));
        if (hs.size() >= 2 && so.finest_residual() > 1e-9) {
            out.push_back(make_check("second_order_rate", std::abs(so.order - 2.0),
                                     get_number(tols, "order_band", "numerics.tolerances")));
        }
    }

    if (spec.epsilon) {
        const EpsilonStructure& e = *spec.epsilon;
        double iy = 0.0;
        double wres = 0.0;
        double lam = 0.0;
        const Weight w{e.weight_field()};
        for (Point p : grid) {
            iy = std::max(iy, detail::rel_err(s.generator_derivatives(p, 1).iy, e.iy_closed_form(p)));
            wres = std::max(wres, magnitude(weight_residual(w, s, p)));
            lam = std::max(lam, std::abs(s.spectral_lambda(p, false).lambda - e.lambda(p)));
        }
        out.push_back(make_check("iy_closed_form", iy, 1e-10));
        out.push_back(make_check("weight_equation", wres, 1e-10));
        out.push_back(make_check("lambda_closed_form", lam, 1e-12));

        const Point base = get_point(numerics, "basepoint", "numerics");
        const Point p = get_point(numerics, "point", "numerics");
        WeightOptions wopt;
        wopt.tau_compat = get_number(tols, "compat", "numerics.tolerances");
        const WeightSolution ws = solve_weight(s, base, p, wopt);
        const double ref = e.weight(p) / e.weight(base);
        out.push_back(make_check("weight_solve", std::abs(ws.psi - ref) / ref,
                                 get_number(tols, "weight", "numerics.tolerances")));

        const InitialProfile prof = InitialProfile::epsilon(e.epsilon());
        double newton = 0.0;
        for (double x : {0.0, 0.25, 0.5}) {
            for (double y : {-0.5, 0.0, 0.5}) newton = std::max(newton, std::abs(solve_implicit(prof, {x, y}) - e.lambda({x, y})));
        }
        out.push_back(make_check("burgers_implicit", newton, 1e-9));

        const JetExtractor jets(epsilon_family(), get_number(numerics, "eps_step", "numerics"));
        const ComplexField mu = jets.mu();
        const ComplexField nu = jets.nu();
        const ComplexField rho = jets.rho();
        const std::vector<double> jt = get_numbers(tols, "jets", "numerics.tolerances");
        if (jt.size() != 3) throw ConfigError("numerics.tolerances.jets must list three bounds");
        double j1 = 0.0;
        double j2 = 0.0;
        double j3 = 0.0;
        for (Point p : {Point{0.0, 0.0}, Point{0.3, -0.4}, Point{-0.2, 0.25}}) {
            j1 = std::max(j1, std::abs(check_first_jet(mu, p)));
            j2 = std::max(j2, std::abs(check_second_jet(mu, nu, p)));
            j3 = std::max(j3, std::abs(check_third_jet(mu, nu, rho, p)));
        }
        out.push_back(make_check("first_jet", j1, jt[0]));
        out.push_back(make_check("second_jet", j2, jt[1]));
        out.push_back(make_check("third_jet", j3, jt[2]));
    }

    if (!fd) {
        const ConsistencyReport c = s.coefficients().self_consistency(grid);
        out.push_back(make_check("analytic_vs_fd", c.max_first_error, 1e-6));
    }
    return out;
}

}  // namespace velliptic::cli
