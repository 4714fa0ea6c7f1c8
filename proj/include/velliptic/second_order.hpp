#pragma once

// Second-order expansion for rigid structures:
//
//   4 dz dzbar (u + v i) = (L u + R0) + (L v + R1) i,
//   L = d_xx - beta d_xy + alpha d_yy,
//
// checked with an analytic inner dzbar and a central-difference outer dz.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "velliptic/cr_calculus.hpp"
#include "velliptic/error.hpp"
#include "velliptic/fiber_algebra.hpp"
#include "velliptic/field.hpp"
#include "velliptic/structure_field.hpp"

namespace velliptic {

/// w_xx - beta w_xy + alpha w_yy.
inline double L_op(const ScalarField& w, Point p, const StructureField& s) {
    const Jet2 j = w.jet(p, 2);
    const FiberCoefficients f = s.fiber(p);
    return j.xx - f.beta * j.xy + f.alpha * j.yy;
}

/// R0 = alpha_y u_y + alpha_y v_x - 2 alpha beta_y v_y,
/// R1 = beta_y u_y + beta_y v_x + (2 alpha_y - 2 beta beta_y) v_y.
inline std::pair<double, double> corrections(const Section& f, Point p, const StructureField& s) {
    const CoefficientSample c = s.elliptic_sample(p, 1);
    const SectionJet j = f.jet(p, 1);
    const double ay = c.alpha.y;
    const double by = c.beta.y;
    const double R0 = ay * j.u.y + ay * j.v.x - 2.0 * c.alpha.v * by * j.v.y;
    const double R1 = by * j.u.y + by * j.v.x + (2.0 * ay - 2.0 * c.beta.v * by) * j.v.y;
    return {R0, R1};
}

/// Right-hand side (L u + R0) + (L v + R1) i.
inline AlgebraElement second_order_rhs(const Section& f, Point p, const StructureField& s) {
    const auto [R0, R1] = corrections(f, p, s);
    return {L_op(f.u(), p, s) + R0, L_op(f.v(), p, s) + R1, s.fiber(p)};
}

/// 4 dz(dbar f) with the outer real partials of dbar f taken by central
/// differences of step h, plus the moving-generator terms g1 i_x, g1 i_y.
inline AlgebraElement second_order_lhs(const Section& f, Point p, const StructureField& s, double h) {
    const auto inner = [&](Point q) { return dbar(f, s, q); };
    const AlgebraElement g = inner(p);
    const AlgebraElement gxp = inner({p.x + h, p.y});
    const AlgebraElement gxm = inner({p.x - h, p.y});
    const AlgebraElement gyp = inner({p.x, p.y + h});
    const AlgebraElement gym = inner({p.x, p.y - h});
    const FiberCoefficients fib = g.fiber;
    const GeneratorDerivatives gd = s.generator_derivatives(p, 1);
    const AlgebraElement dx =
        AlgebraElement{(gxp.u - gxm.u) / (2 * h), (gxp.v - gxm.v) / (2 * h), fib} + g.v * gd.ix;
    const AlgebraElement dy =
        AlgebraElement{(gyp.u - gym.u) / (2 * h), (gyp.v - gym.v) / (2 * h), fib} + g.v * gd.iy;
    const AlgebraElement ihat = conj(AlgebraElement::generator(fib));
    return 2.0 * (dx + ihat * dy);
}

struct SecondOrderRow {
    double h = 0.0;
    AlgebraElement lhs;
    double residual_scalar = 0.0;
    double residual_i = 0.0;
    double residual = 0.0;
    double order = 0.0;  ///< log(r_prev / r) / log(h_prev / h); 0 on the first row
};

struct SecondOrderReport {
    Point point{};
    AlgebraElement rhs;
    std::vector<SecondOrderRow> rows;
    double order = 0.0;  ///< estimate from the two finest steps
    double rigidity = 0.0;

    [[nodiscard]] double finest_residual() const { return rows.empty() ? 0.0 : rows.back().residual; }
};

/// Runs the comparison for each step in h_list (coarse to fine). Refuses
/// structures that are not rigid at p and stencils that leave the domain.
inline SecondOrderReport verify_expansion(const Section& f, Point p, const StructureField& s,
                                          std::span<const double> h_list, double tau_rigid = 1e-6) {
    if (h_list.empty()) throw Error(ErrorCode::invalid_argument, "need at least one step");
    SecondOrderReport rep;
    rep.point = p;
    const FiberCoefficients f0 = s.fiber(p);
    rep.rigidity = s.rigidity_residual(p);
    const double tol = tau_rigid * std::max({1.0, std::abs(f0.alpha), std::abs(f0.beta)});
    if (rep.rigidity > tol) {
        throw Error(ErrorCode::not_rigid, "|G| = " + std::to_string(rep.rigidity) + " at " + to_string(p) +
                                              "; the expansion holds only for rigid structures");
    }
    const double hmax = *std::max_element(h_list.begin(), h_list.end());
    for (Point q : {Point{p.x + hmax, p.y}, Point{p.x - hmax, p.y}, Point{p.x, p.y + hmax}, Point{p.x, p.y - hmax}}) {
        if (!s.contains(q) || !(s.classify(q).regime == Regime::elliptic)) {
            throw Error(ErrorCode::out_of_domain, "difference stencil leaves the elliptic domain at " + to_string(q));
        }
    }
    rep.rhs = second_order_rhs(f, p, s);
    for (double h : h_list) {
        SecondOrderRow row;
        row.h = h;
        row.lhs = second_order_lhs(f, p, s, h);
        row.residual_scalar = row.lhs.u - rep.rhs.u;
        row.residual_i = row.lhs.v - rep.rhs.v;
        row.residual = std::hypot(row.residual_scalar, row.residual_i);
        if (!rep.rows.empty()) {
            const SecondOrderRow& prev = rep.rows.back();
            row.order = std::log(prev.residual / row.residual) / std::log(prev.h / h);
        }
        rep.rows.push_back(row);
    }
    rep.order = rep.rows.back().order;
    return rep;
}

}  // namespace velliptic
