#pragma once

// A variable quadratic structure (alpha, beta) over a planar domain: generator
// derivatives, the obstruction G = i_x + i i_y, the spectral parameter and the
// transport residuals built from them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "velliptic/error.hpp"
#include "velliptic/expression.hpp"
#include "velliptic/fiber_algebra.hpp"
#include "velliptic/field.hpp"

namespace velliptic {

using cplx = std::complex<double>;

/// Coefficient jets at one point.
struct CoefficientSample {
    Jet2 alpha;
    Jet2 beta;

    [[nodiscard]] FiberCoefficients fiber() const noexcept { return {alpha.v, beta.v}; }
    [[nodiscard]] double delta() const noexcept { return 4.0 * alpha.v - beta.v * beta.v; }
};

struct ConsistencyReport {
    double max_first_error = 0.0;
    double max_second_error = 0.0;
    double step = 0.0;
    std::size_t points = 0;
};

class CoefficientEvaluator {
public:
    using DomainFn = std::function<bool(Point)>;

    CoefficientEvaluator(ScalarField alpha, ScalarField beta, DomainFn domain = {}, double scale = 1.0)
        : alpha_(std::move(alpha)), beta_(std::move(beta)), domain_(std::move(domain)), scale_(scale) {
        if (!(scale_ > 0.0)) throw Error(ErrorCode::invalid_argument, "domain scale must be positive");
    }

    static CoefficientEvaluator constant(double alpha, double beta) {
        return {ScalarField::constant(alpha), ScalarField::constant(beta)};
    }

    static CoefficientEvaluator from_expressions(const Expression& alpha, const Expression& beta,
                                                 DomainFn domain = {}, double scale = 1.0) {
        return {field_from_expression(alpha), field_from_expression(beta), std::move(domain), scale};
    }

    /// Values only; partials by central differences with step 1e-5 * scale.
    static CoefficientEvaluator sampled(std::function<double(Point)> alpha, std::function<double(Point)> beta,
                                        DomainFn domain = {}, double scale = 1.0) {
        return {ScalarField::sampled(std::move(alpha), 1e-5 * scale, 1e-4 * scale),
                ScalarField::sampled(std::move(beta), 1e-5 * scale, 1e-4 * scale), std::move(domain), scale};
    }

    [[nodiscard]] bool contains(Point p) const { return !domain_ || domain_(p); }

    [[nodiscard]] CoefficientSample sample(Point p, int order = 1) const {
        if (!contains(p)) throw Error(ErrorCode::out_of_domain, "coefficients requested at " + to_string(p));
        return {alpha_.jet(p, order), beta_.jet(p, order)};
    }

    [[nodiscard]] const ScalarField& alpha() const noexcept { return alpha_; }
    [[nodiscard]] const ScalarField& beta() const noexcept { return beta_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] double fd_step() const noexcept { return 1e-5 * scale_; }
    [[nodiscard]] bool finite_difference() const noexcept {
        return alpha_.finite_difference() || beta_.finite_difference();
    }
    [[nodiscard]] int max_order() const noexcept { return std::min(alpha_.max_order(), beta_.max_order()); }

    /// Compares the supplied partials with central differences at `points`.
    /// With analytic partials both errors should be O(step^2).
    [[nodiscard]] ConsistencyReport self_consistency(std::span<const Point> points) const {
        ConsistencyReport r;
        r.step = fd_step();
        const double h = r.step;
        const int order = max_order();
        for (const Point& p : points) {
            for (const ScalarField* f : {&alpha_, &beta_}) {
                const Jet2 j = f->jet(p, order);
                const double fx = ((*f)({p.x + h, p.y}) - (*f)({p.x - h, p.y})) / (2 * h);
                const double fy = ((*f)({p.x, p.y + h}) - (*f)({p.x, p.y - h})) / (2 * h);
                r.max_first_error = std::max({r.max_first_error, std::abs(fx - j.x), std::abs(fy - j.y)});
                if (order >= 2) {
                    const Jet2 xp = f->jet({p.x + h, p.y}, 1);
                    const Jet2 xm = f->jet({p.x - h, p.y}, 1);
                    const Jet2 yp = f->jet({p.x, p.y + h}, 1);
                    const Jet2 ym = f->jet({p.x, p.y - h}, 1);
                    const double fxx = (xp.x - xm.x) / (2 * h);
                    const double fxy = (yp.x - ym.x) / (2 * h);
                    const double fyy = (yp.y - ym.y) / (2 * h);
                    r.max_second_error = std::max(
                        {r.max_second_error, std::abs(fxx - j.xx), std::abs(fxy - j.xy), std::abs(fyy - j.yy)});
                }
            }
            ++r.points;
        }
        return r;
    }

private:
    ScalarField alpha_;
    ScalarField beta_;
    DomainFn domain_;
    double scale_ = 1.0;
};

struct Classification {
    Regime regime{};
    double delta{};
};

struct GeneratorDerivatives {
    AlgebraElement ix;
    AlgebraElement iy;
    std::optional<AlgebraElement> ixx;
    std::optional<AlgebraElement> ixy;
    std::optional<AlgebraElement> iyy;
};

struct Obstruction {
    AlgebraElement G;
    double G0{};
    double G1{};
    double A{};
    double B{};
};

struct SpectralState {
    cplx lambda;
    cplx lambda_x;
    cplx lambda_y;
    bool has_derivatives = false;

    [[nodiscard]] double a() const noexcept { return lambda.real(); }
    [[nodiscard]] double b() const noexcept { return lambda.imag(); }
};

class StructureField {
public:
    explicit StructureField(CoefficientEvaluator coefficients, double tau_par = 1e-10)
        : coeffs_(std::move(coefficients)), tau_par_(tau_par) {}

    [[nodiscard]] const CoefficientEvaluator& coefficients() const noexcept { return coeffs_; }
    [[nodiscard]] double parabolic_tolerance() const noexcept { return tau_par_; }
    [[nodiscard]] bool contains(Point p) const { return coeffs_.contains(p); }

    [[nodiscard]] FiberCoefficients fiber(Point p) const { return coeffs_.sample(p, 0).fiber(); }

    [[nodiscard]] Classification classify(Point p) const {
        const double d = coeffs_.sample(p, 0).delta();
        return {regime_of(d), d};
    }

    [[nodiscard]] GeneratorDerivatives generator_derivatives(Point p, int order = 1) const {
        if (order < 1 || order > 2) {
            throw Error(ErrorCode::invalid_argument, "generator derivatives are available for order 1 or 2");
        }
        const CoefficientSample s = elliptic_sample(p, order);
        return generator_derivatives(s, order);
    }

    /// Same as above from an already evaluated coefficient jet.
    [[nodiscard]] static GeneratorDerivatives generator_derivatives(const CoefficientSample& s, int order) {
        const FiberCoefficients f = s.fiber();
        const AlgebraElement inv = inv_two_i_plus_beta(f);
        GeneratorDerivatives g{-(inv * AlgebraElement{s.alpha.x, s.beta.x, f}),
                               -(inv * AlgebraElement{s.alpha.y, s.beta.y, f}),
                               std::nullopt, std::nullopt, std::nullopt};
        if (order >= 2) {
            const AlgebraElement& ix = g.ix;
            const AlgebraElement& iy = g.iy;
            g.ixx = -(inv * (2.0 * (ix * ix) + 2.0 * s.beta.x * ix + AlgebraElement{s.alpha.xx, s.beta.xx, f}));
            g.ixy = -(inv * (2.0 * (ix * iy) + s.beta.y * ix + s.beta.x * iy +
                             AlgebraElement{s.alpha.xy, s.beta.xy, f}));
            g.iyy = -(inv * (2.0 * (iy * iy) + 2.0 * s.beta.y * iy + AlgebraElement{s.alpha.yy, s.beta.yy, f}));
        }
        return g;
    }

    /// (2i + beta) i_x + alpha_x + beta_x i, and the y analogue.
    [[nodiscard]] std::pair<AlgebraElement, AlgebraElement> defining_residual(Point p) const {
        const CoefficientSample s = elliptic_sample(p, 1);
        const FiberCoefficients f = s.fiber();
        const GeneratorDerivatives g = generator_derivatives(s, 1);
        const AlgebraElement two_i_beta{f.beta, 2.0, f};
        return {two_i_beta * g.ix + AlgebraElement{s.alpha.x, s.beta.x, f},
                two_i_beta * g.iy + AlgebraElement{s.alpha.y, s.beta.y, f}};
    }

    [[nodiscard]] Obstruction obstruction(Point p) const { return obstruction(elliptic_sample(p, 1)); }

    [[nodiscard]] static Obstruction obstruction(const CoefficientSample& s) {
        const FiberCoefficients f = s.fiber();
        const GeneratorDerivatives g = generator_derivatives(s, 1);
        const AlgebraElement G = g.ix + AlgebraElement::generator(f) * g.iy;
        const auto [A, B] = closed_form_AB(s);
        return {G, G.u, G.v, A, B};
    }

    /// Closed-form coefficients of i_x + i i_y = A + B i.
    [[nodiscard]] static std::pair<double, double> closed_form_AB(const CoefficientSample& s) {
        const double al = s.alpha.v;
        const double be = s.beta.v;
        const double d = s.delta();
        const double p = s.alpha.x - al * s.beta.y;
        const double q = s.beta.x + s.alpha.y - be * s.beta.y;
        return {(be * p - 2.0 * al * q) / d, (2.0 * p - be * q) / d};
    }

    [[nodiscard]] SpectralState spectral_lambda(Point p, bool with_derivatives = true) const {
        return spectral_lambda(elliptic_sample(p, with_derivatives ? 1 : 0), with_derivatives);
    }

    [[nodiscard]] static SpectralState spectral_lambda(const CoefficientSample& s, bool with_derivatives) {
        const double be = s.beta.v;
        const double a = -0.5 * be;
        const double b = 0.5 * std::sqrt(s.delta());
        SpectralState st{{a, b}, {}, {}, with_derivatives};
        if (with_derivatives) {
            const double dx = 4.0 * s.alpha.x - 2.0 * be * s.beta.x;
            const double dy = 4.0 * s.alpha.y - 2.0 * be * s.beta.y;
            st.lambda_x = {-0.5 * s.beta.x, dx / (8.0 * b)};
            st.lambda_y = {-0.5 * s.beta.y, dy / (8.0 * b)};
        }
        return st;
    }

    /// lambda_x + lambda lambda_y - (G0 + lambda G1) in the standard complex plane.
    [[nodiscard]] cplx burgers_residual(Point p) const {
        const CoefficientSample s = elliptic_sample(p, 1);
        const SpectralState st = spectral_lambda(s, true);
        const Obstruction ob = obstruction(s);
        return st.lambda_x + st.lambda * st.lambda_y - (ob.G0 + st.lambda * ob.G1);
    }

    /// Residuals of alpha_x = alpha beta_y - beta G0 + 2 alpha G1 and
    /// beta_x + alpha_y = beta beta_y - 2 G0 + beta G1.
    [[nodiscard]] std::pair<double, double> forced_coefficient_residual(Point p) const {
        const CoefficientSample s = elliptic_sample(p, 1);
        const Obstruction ob = obstruction(s);
        const double al = s.alpha.v;
        const double be = s.beta.v;
        return {s.alpha.x - (al * s.beta.y - be * ob.G0 + 2.0 * al * ob.G1),
                (s.beta.x + s.alpha.y) - (be * s.beta.y - 2.0 * ob.G0 + be * ob.G1)};
    }

    [[nodiscard]] double rigidity_residual(Point p) const {
        const Obstruction ob = obstruction(p);
        return std::hypot(ob.G0, ob.G1);
    }

    /// Canonical derivatives (-beta_x/2, 0), (-beta_y/2, 0) on a parabolic fiber.
    [[nodiscard]] std::pair<AlgebraElement, AlgebraElement> parabolic_canonical_derivatives(Point p) const {
        const CoefficientSample s = coeffs_.sample(p, 1);
        const double d = s.delta();
        if (std::abs(d) > tau_par_) {
            throw Error(ErrorCode::not_parabolic,
                        "Delta = " + std::to_string(d) + " at " + to_string(p) + " exceeds the parabolic band");
        }
        const FiberCoefficients f = s.fiber();
        return {{-0.5 * s.beta.x, 0.0, f}, {-0.5 * s.beta.y, 0.0, f}};
    }

    /// Coefficient jet at p after checking ellipticity.
    [[nodiscard]] CoefficientSample elliptic_sample(Point p, int order) const {
        const CoefficientSample s = coeffs_.sample(p, order);
        const double d = s.delta();
        if (!(d > tau_par_)) {
            throw Error(ErrorCode::ellipticity_violation,
                        "Delta = " + std::to_string(d) + " at " + to_string(p) + " (" +
                            to_string(regime_of(d)) + ")");
        }
        return s;
    }

private:
    [[nodiscard]] Regime regime_of(double d) const noexcept {
        if (d > tau_par_) return Regime::elliptic;
        if (d < -tau_par_) return Regime::hyperbolic;
        return Regime::parabolic;
    }

    CoefficientEvaluator coeffs_;
    double tau_par_ = 1e-10;
};

}  // namespace velliptic
