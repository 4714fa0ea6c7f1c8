#pragma once

// First-order calculus on algebra-valued sections f = u + v i of a variable
// structure: real partials, d/dzbar and d/dz, the Cauchy-Riemann system, the
// Leibniz defect, the covariant operator D and weights.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "velliptic/error.hpp"
#include "velliptic/expression.hpp"
#include "velliptic/fiber_algebra.hpp"
#include "velliptic/field.hpp"
#include "velliptic/quadrature.hpp"
#include "velliptic/structure_field.hpp"

namespace velliptic {

struct SectionJet {
    Jet2 u;
    Jet2 v;
};

/// f = u + v i, given by two real component fields.
class Section {
public:
    Section() = default;
    Section(ScalarField u, ScalarField v) : u_(std::move(u)), v_(std::move(v)) {}

    static Section constant(double u, double v) { return {ScalarField::constant(u), ScalarField::constant(v)}; }
    static Section one() { return constant(1.0, 0.0); }
    static Section generator() { return constant(0.0, 1.0); }

    static Section from_expressions(const Expression& u, const Expression& v) {
        return {field_from_expression(u), field_from_expression(v)};
    }

    /// Kernel Z(., zeta) = (y - eta) - i (x - xi).
    static Section kernel(Point zeta) {
        return {ScalarField::from_jet([zeta](Point p, int) { return Jet2{p.y - zeta.y, 0, 1, 0, 0, 0}; }),
                ScalarField::from_jet([zeta](Point p, int) { return Jet2{zeta.x - p.x, -1, 0, 0, 0, 0}; })};
    }

    [[nodiscard]] const ScalarField& u() const noexcept { return u_; }
    [[nodiscard]] const ScalarField& v() const noexcept { return v_; }
    [[nodiscard]] int max_order() const noexcept { return std::min(u_.max_order(), v_.max_order()); }

    [[nodiscard]] SectionJet jet(Point p, int order = 1) const { return {u_.jet(p, order), v_.jet(p, order)}; }

    [[nodiscard]] AlgebraElement at(Point p, FiberCoefficients fiber) const { return {u_(p), v_(p), fiber}; }
    [[nodiscard]] AlgebraElement at(Point p, const StructureField& s) const { return at(p, s.fiber(p)); }

private:
    ScalarField u_;
    ScalarField v_;
};

/// Pointwise fiber product fg. Components carry exact derivatives because the
/// reduction uses the coefficient jets.
inline Section product(const Section& f, const Section& g, const StructureField& s) {
    const CoefficientEvaluator& c = s.coefficients();
    const int order = std::min({f.max_order(), g.max_order(), c.max_order()});
    auto comps = [f, g, c](Point p, int ord) {
        const CoefficientSample cs = c.sample(p, ord);
        const SectionJet a = f.jet(p, ord);
        const SectionJet b = g.jet(p, ord);
        const Jet2 vv = a.v * b.v;
        return std::pair{a.u * b.u - cs.alpha * vv, a.u * b.v + a.v * b.u - cs.beta * vv};
    };
    return {ScalarField::from_jet([comps](Point p, int ord) { return comps(p, ord).first; }, order),
            ScalarField::from_jet([comps](Point p, int ord) { return comps(p, ord).second; }, order)};
}

/// Pointwise inverse conj(f) / N(f); defined where N(f) != 0.
inline Section inverse(const Section& f, const StructureField& s) {
    const CoefficientEvaluator& c = s.coefficients();
    const int order = std::min(f.max_order(), c.max_order());
    auto comps = [f, c](Point p, int ord) {
        const CoefficientSample cs = c.sample(p, ord);
        const SectionJet a = f.jet(p, ord);
        const Jet2 n = a.u * a.u - cs.beta * a.u * a.v + cs.alpha * a.v * a.v;
        if (n.v == 0.0) throw Error(ErrorCode::non_invertible, "section vanishes at " + to_string(p));
        const Jet2 r = reciprocal(n);
        return std::pair{(a.u - cs.beta * a.v) * r, -a.v * r};
    };
    return {ScalarField::from_jet([comps](Point p, int ord) { return comps(p, ord).first; }, order),
            ScalarField::from_jet([comps](Point p, int ord) { return comps(p, ord).second; }, order)};
}

/// (w u, w v) for a real field w.
inline Section scaled(const Section& f, const ScalarField& w) { return {w * f.u(), w * f.v()}; }

inline ScalarField reciprocal(const ScalarField& w) {
    return ScalarField::from_jet([w](Point p, int ord) { return reciprocal(w.jet(p, ord)); }, w.max_order());
}

namespace detail {

inline AlgebraElement partial(const SectionJet& j, const AlgebraElement& i_dir, bool x_dir) {
    const FiberCoefficients f = i_dir.fiber;
    const AlgebraElement base = x_dir ? AlgebraElement{j.u.x, j.v.x, f} : AlgebraElement{j.u.y, j.v.y, f};
    return base + j.v.v * i_dir;
}

}  // namespace detail

/// First-order data of a section at a point: both real partials.
struct SectionDerivatives {
    AlgebraElement value;
    AlgebraElement dx;
    AlgebraElement dy;
    GeneratorDerivatives generator;
};

inline SectionDerivatives differentiate(const Section& f, const StructureField& s, Point p) {
    const CoefficientSample cs = s.elliptic_sample(p, 1);
    const GeneratorDerivatives g = StructureField::generator_derivatives(cs, 1);
    const SectionJet j = f.jet(p, 1);
    return {{j.u.v, j.v.v, cs.fiber()}, detail::partial(j, g.ix, true), detail::partial(j, g.iy, false), g};
}

/// d_x f = u_x + v_x i + v i_x.
inline AlgebraElement d_x(const Section& f, const StructureField& s, Point p) { return differentiate(f, s, p).dx; }
inline AlgebraElement d_y(const Section& f, const StructureField& s, Point p) { return differentiate(f, s, p).dy; }

/// dbar = (d_x + i d_y) / 2.
inline AlgebraElement dbar(const Section& f, const StructureField& s, Point p) {
    const SectionDerivatives d = differentiate(f, s, p);
    return 0.5 * (d.dx + AlgebraElement::generator(d.value.fiber) * d.dy);
}

/// dz = (d_x + ihat d_y) / 2 with ihat = -beta - i.
inline AlgebraElement dz(const Section& f, const StructureField& s, Point p) {
    const SectionDerivatives d = differentiate(f, s, p);
    const AlgebraElement ihat = conj(AlgebraElement::generator(d.value.fiber));
    return 0.5 * (d.dx + ihat * d.dy);
}

/// (u_x - alpha v_y + A v, v_x + u_y - beta v_y + B v); equals 2 dbar f.
inline std::pair<double, double> cr_system_residual(const Section& f, const StructureField& s, Point p) {
    const CoefficientSample cs = s.elliptic_sample(p, 1);
    const auto [A, B] = StructureField::closed_form_AB(cs);
    const SectionJet j = f.jet(p, 1);
    const double v = j.v.v;
    return {j.u.x - cs.alpha.v * j.v.y + A * v, j.v.x + j.u.y - cs.beta.v * j.v.y + B * v};
}

struct LeibnizDefect {
    AlgebraElement direct;   ///< dbar(fg) - dbar(f) g - f dbar(g)
    AlgebraElement formula;  ///< v q G / 2
};

inline LeibnizDefect leibniz_defect(const Section& f, const Section& g, const StructureField& s, Point p) {
    const Section fg = product(f, g, s);
    const FiberCoefficients fib = s.fiber(p);
    const AlgebraElement fv = f.at(p, fib);
    const AlgebraElement gv = g.at(p, fib);
    const AlgebraElement direct = dbar(fg, s, p) - dbar(f, s, p) * gv - fv * dbar(g, s, p);
    const Obstruction ob = s.obstruction(p);
    return {direct, (0.5 * fv.v * gv.v) * ob.G};
}

/// Defect of a real partial (dir 'x' or 'y') acting on fg; zero for a derivation.
inline AlgebraElement real_derivative_defect(const Section& f, const Section& g, const StructureField& s, Point p,
                                             char dir) {
    const Section fg = product(f, g, s);
    const FiberCoefficients fib = s.fiber(p);
    const AlgebraElement fv = f.at(p, fib);
    const AlgebraElement gv = g.at(p, fib);
    const auto d = [&](const Section& h) { return dir == 'x' ? d_x(h, s, p) : d_y(h, s, p); };
    return d(fg) - d(f) * gv - fv * d(g);
}

/// D f = dbar f + f i_y / 2.
inline AlgebraElement covariant_D(const Section& f, const StructureField& s, Point p) {
    const SectionDerivatives d = differentiate(f, s, p);
    const AlgebraElement db = 0.5 * (d.dx + AlgebraElement::generator(d.value.fiber) * d.dy);
    return db + 0.5 * (d.value * d.generator.iy);
}

/// A nowhere-vanishing real field, candidate solution of dbar psi = i_y psi / 2.
struct Weight {
    ScalarField psi;

    [[nodiscard]] double operator()(Point p) const { return psi(p); }
    [[nodiscard]] Section as_section() const { return {psi, ScalarField::constant(0.0)}; }
};

/// f <> g = f g psi.
inline Section weighted_product(const Section& f, const Section& g, const Weight& w, const StructureField& s) {
    return scaled(product(f, g, s), w.psi);
}

/// dbar psi - i_y psi / 2.
inline AlgebraElement weight_residual(const Weight& w, const StructureField& s, Point p) {
    const SectionDerivatives d = differentiate(w.as_section(), s, p);
    const AlgebraElement db = 0.5 * (d.dx + AlgebraElement::generator(d.value.fiber) * d.dy);
    return db - (0.5 * d.value.u) * d.generator.iy;
}

/// (psi_x - A_y psi, psi_y - B_y psi) where i_y = A_y + B_y i.
inline std::pair<double, double> weight_real_residual(const Weight& w, const StructureField& s, Point p) {
    const Jet2 j = w.psi.jet(p, 1);
    const AlgebraElement iy = s.generator_derivatives(p, 1).iy;
    return {j.x - iy.u * j.v, j.y - iy.v * j.v};
}

enum class WeightPath {
    horizontal_first,  ///< base -> (x, y_base) -> (x, y)
    vertical_first,    ///< base -> (x_base, y) -> (x, y)
};

struct WeightOptions {
    int panels = 8;
    int order = 16;
    double tau_compat = 1e-6;
    int compat_grid = 9;
    double fd_step = 1e-5;
    WeightPath path = WeightPath::horizontal_first;
    bool check_compatibility = true;
};

struct WeightSolution {
    double psi = 1.0;
    double phi = 0.0;
    double compat_residual = 0.0;
};

/// Max over a grid on the rectangle spanned by a and b of |(A_y)_y - (B_y)_x|,
/// by central differences of i_y.
inline double weight_compatibility(const StructureField& s, Point a, Point b, int grid = 9, double h = 1e-5) {
    const double x0 = std::min(a.x, b.x);
    const double x1 = std::max(a.x, b.x);
    const double y0 = std::min(a.y, b.y);
    const double y1 = std::max(a.y, b.y);
    const auto iy = [&](Point p) { return s.generator_derivatives(p, 1).iy; };
    double worst = 0.0;
    const int n = std::max(grid, 2);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const Point p{x0 + (x1 - x0) * i / (n - 1), y0 + (y1 - y0) * k / (n - 1)};
            const double ay_y = (iy({p.x, p.y + h}).u - iy({p.x, p.y - h}).u) / (2 * h);
            const double by_x = (iy({p.x + h, p.y}).v - iy({p.x - h, p.y}).v) / (2 * h);
            worst = std::max(worst, std::abs(ay_y - by_x));
        }
    }
    return worst;
}

/// psi = exp(phi) with phi the integral of A_y dx + B_y dy along an L path,
/// so psi(base) = 1.
inline WeightSolution solve_weight(const StructureField& s, Point base, Point p, const WeightOptions& opt = {}) {
    WeightSolution out;
    if (opt.check_compatibility) {
        out.compat_residual = weight_compatibility(s, base, p, opt.compat_grid, opt.fd_step);
        double mag = 1.0;
        for (Point q : {base, p, Point{base.x, p.y}, Point{p.x, base.y}}) {
            const AlgebraElement iy = s.generator_derivatives(q, 1).iy;
            mag = std::max({mag, std::abs(iy.u), std::abs(iy.v)});
        }
        if (out.compat_residual > opt.tau_compat * mag) {
            throw Error(ErrorCode::not_integrable,
                        "(A_y)_y - (B_y)_x reaches " + std::to_string(out.compat_residual) + " on the rectangle");
        }
    }
    const auto Ay = [&](double x, double y) { return s.generator_derivatives(Point{x, y}, 1).iy.u; };
    const auto By = [&](double x, double y) { return s.generator_derivatives(Point{x, y}, 1).iy.v; };
    if (opt.path == WeightPath::horizontal_first) {
        out.phi = integrate_composite([&](double x) { return Ay(x, base.y); }, base.x, p.x, opt.panels, opt.order) +
                  integrate_composite([&](double y) { return By(p.x, y); }, base.y, p.y, opt.panels, opt.order);
    } else {
        out.phi = integrate_composite([&](double y) { return By(base.x, y); }, base.y, p.y, opt.panels, opt.order) +
                  integrate_composite([&](double x) { return Ay(x, p.y); }, base.x, p.x, opt.panels, opt.order);
    }
    out.psi = std::exp(out.phi);
    return out;
}

}  // namespace velliptic
