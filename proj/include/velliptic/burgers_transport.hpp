#pragma once

// Complex Burgers transport lambda_x + lambda lambda_y = G0 + lambda G1 by
// characteristics: the implicit solution lambda = F(y - lambda x) of the
// conservative law, an RK4 integrator for the forced characteristic system,
// crossing detection and the (alpha, beta) <-> lambda dictionary.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "velliptic/epsilon_family.hpp"
#include "velliptic/error.hpp"
#include "velliptic/fiber_algebra.hpp"
#include "velliptic/field.hpp"
#include "velliptic/structure_field.hpp"

namespace velliptic {

/// Data lambda_0 = F on the line x = 0, continued to complex arguments.
struct InitialProfile {
    std::string name;
    std::function<cplx(cplx)> value;
    std::function<cplx(cplx)> derivative;

    cplx operator()(cplx w) const { return value(w); }

    static InitialProfile constant(cplx c) {
        return {"constant", [c](cplx) { return c; }, [](cplx) { return cplx{}; }};
    }

    /// F(w) = c0 + slope w.
    static InitialProfile affine(cplx c0, cplx slope) {
        return {"affine", [c0, slope](cplx w) { return c0 + slope * w; }, [slope](cplx) { return slope; }};
    }

    static InitialProfile epsilon(double eps) {
        const EpsilonStructure e(eps);
        return {"epsilon", [e](cplx w) { return e.trace(w); }, [e](cplx w) { return e.trace_derivative(w); }};
    }

    /// Throws unless Im F(y) > 0 at every sample.
    void validate(std::span<const double> ys) const {
        for (double y : ys) {
            const cplx f = value(y);
            if (!(f.imag() > 0.0)) {
                std::ostringstream os;
                os << "profile '" << name << "' has Im lambda0(" << y << ") = " << f.imag() << " <= 0";
                throw Error(ErrorCode::ellipticity_violation, os.str());
            }
        }
    }
};

struct NewtonOptions {
    double tolerance = 1e-12;
    int max_iterations = 100;
    int max_halvings = 40;
    double tau_cross = 1e-6;
};

struct ImplicitSolution {
    cplx lambda;
    double residual = 0.0;
    int iterations = 0;
    cplx jacobian;  ///< 1 + x F'(y - lambda x) at the solution
};

/// Damped Newton on R(lambda) = lambda - F(y - lambda x), seeded with F(y).
/// The complex derivative R' = 1 + x F' is the 2x2 real Jacobian in
/// Cauchy-Riemann form.
inline ImplicitSolution solve_implicit_report(const InitialProfile& profile, Point p,
                                              const NewtonOptions& opt = {}) {
    const auto residual = [&](cplx lam) { return lam - profile.value(cplx{p.y} - lam * p.x); };
    cplx lam = profile.value(cplx{p.y});
    cplx r = residual(lam);
    double rn = std::abs(r);
    int it = 0;
    while (rn > opt.tolerance * std::max(1.0, std::abs(lam))) {
        if (it >= opt.max_iterations) {
            std::ostringstream os;
            os << "Newton did not converge at " << to_string(p) << " after " << it << " iterations, residual " << rn;
            throw Error(ErrorCode::non_convergence, os.str());
        }
        const cplx jac = 1.0 + p.x * profile.derivative(cplx{p.y} - lam * p.x);
        if (std::abs(jac) < opt.tau_cross) {
            std::ostringstream os;
            os << "characteristic Jacobian |1 + x F'| = " << std::abs(jac) << " at " << to_string(p);
            throw Error(ErrorCode::crossing_detected, os.str());
        }
        const cplx step = r / jac;
        double t = 1.0;
        cplx trial = lam - step;
        cplx rt = residual(trial);
        int halvings = 0;
        while (!(std::abs(rt) < rn) && halvings < opt.max_halvings) {
            t *= 0.5;
            trial = lam - t * step;
            rt = residual(trial);
            ++halvings;
        }
        lam = trial;
        r = rt;
        rn = std::abs(r);
        ++it;
        if (!std::isfinite(rn)) {
            throw Error(ErrorCode::non_convergence, "Newton iterate left the profile's domain at " + to_string(p));
        }
    }
    return {lam, rn, it, 1.0 + p.x * profile.derivative(cplx{p.y} - lam * p.x)};
}

inline cplx solve_implicit(const InitialProfile& profile, Point p, const NewtonOptions& opt = {}) {
    return solve_implicit_report(profile, p, opt).lambda;
}

/// State along a characteristic. y lives in the complexified line because
/// dy/dx = lambda is complex. jacobian = dy/dy0, dlambda = dlambda/dy0.
struct CharacteristicState {
    double x = 0.0;
    cplx y;
    cplx lambda;
    cplx jacobian{1.0, 0.0};
    cplx dlambda;

    [[nodiscard]] double jacobian_modulus() const { return std::abs(jacobian); }

    static CharacteristicState launch(const InitialProfile& profile, double y0) {
        return {0.0, cplx{y0}, profile.value(cplx{y0}), {1.0, 0.0}, profile.derivative(cplx{y0})};
    }
};

/// Forcing terms of the transport law, evaluated on the real plane.
struct Forcing {
    std::function<double(Point)> g0;
    std::function<double(Point)> g1;

    static Forcing none() {
        return {[](Point) { return 0.0; }, [](Point) { return 0.0; }};
    }
    static Forcing constant(double g0, double g1) {
        return {[g0](Point) { return g0; }, [g1](Point) { return g1; }};
    }
    static Forcing from_structure(const StructureField& s) {
        return {[s](Point p) { return s.obstruction(p).G0; }, [s](Point p) { return s.obstruction(p).G1; }};
    }
};

enum class CharacteristicMode {
    complexified,  ///< dy/dx = lambda with complex y; forcing read at (x, Re y)
    frozen,        ///< y held fixed; integrates the pointwise forced law only
};

struct IntegrationOptions {
    CharacteristicMode mode = CharacteristicMode::complexified;
    std::function<bool(Point)> domain;  ///< optional; checked at every stage
    double forcing_step = 1e-6;          ///< for d(forcing)/dy in the Jacobian equation
};

/// Classical RK4 on (y, lambda, dy/dy0, dlambda/dy0) from start.x to x_end.
inline CharacteristicState integrate_forced(const CharacteristicState& start, const Forcing& forcing, double x_end,
                                            int steps, const IntegrationOptions& opt = {}) {
    if (steps < 1) throw Error(ErrorCode::invalid_argument, "integration needs at least one step");
    const double h = (x_end - start.x) / steps;
    if (h == 0.0 && x_end != start.x) throw Error(ErrorCode::non_convergence, "step size underflow");
    const bool frozen = opt.mode == CharacteristicMode::frozen;

    struct D {
        cplx y, lam, jac, dlam;
    };
    const auto rhs = [&](double x, const D& s) -> D {
        const Point p{x, s.y.real()};
        if (opt.domain && !opt.domain(p)) {
            throw Error(ErrorCode::out_of_domain, "characteristic left the domain at " + to_string(p));
        }
        const double g0 = forcing.g0(p);
        const double g1 = forcing.g1(p);
        const cplx dlam = g0 + s.lam * g1;
        if (frozen) return {cplx{}, dlam, cplx{}, cplx{}};
        const double e = opt.forcing_step;
        const double g0y = (forcing.g0({p.x, p.y + e}) - forcing.g0({p.x, p.y - e})) / (2 * e);
        const double g1y = (forcing.g1({p.x, p.y + e}) - forcing.g1({p.x, p.y - e})) / (2 * e);
        return {s.lam, dlam, s.dlam, (g0y + s.lam * g1y) * s.jac + g1 * s.dlam};
    };
    const auto axpy = [](const D& a, double t, const D& k) {
        return D{a.y + t * k.y, a.lam + t * k.lam, a.jac + t * k.jac, a.dlam + t * k.dlam};
    };

    D s{start.y, start.lambda, start.jacobian, start.dlambda};
    double x = start.x;
    for (int n = 0; n < steps; ++n) {
        const D k1 = rhs(x, s);
        const D k2 = rhs(x + 0.5 * h, axpy(s, 0.5 * h, k1));
        const D k3 = rhs(x + 0.5 * h, axpy(s, 0.5 * h, k2));
        const D k4 = rhs(x + h, axpy(s, h, k3));
        s.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
        s.lam += h / 6.0 * (k1.lam + 2.0 * k2.lam + 2.0 * k3.lam + k4.lam);
        s.jac += h / 6.0 * (k1.jac + 2.0 * k2.jac + 2.0 * k3.jac + k4.jac);
        s.dlam += h / 6.0 * (k1.dlam + 2.0 * k2.dlam + 2.0 * k3.dlam + k4.dlam);
        x = start.x + (n + 1) * h;
    }
    return {x_end, s.y, s.lam, s.jac, s.dlam};
}

struct CrossingReport {
    double x = 0.0;
    double y0 = 0.0;
    double jacobian_modulus = 0.0;
};

/// First x in [x_min, x_max] where |1 + x F'(y0)| < tau for some sampled y0.
/// The Jacobian is affine in x, so the threshold crossing is found exactly.
inline std::optional<CrossingReport> detect_crossing(const InitialProfile& profile, double x_min, double x_max,
                                                     std::span<const double> y_samples, double tau = 1e-6) {
    std::optional<CrossingReport> best;
    for (double y0 : y_samples) {
        const cplx c = profile.derivative(cplx{y0});
        const auto modulus = [&](double x) { return std::abs(1.0 + x * c); };
        std::optional<double> hit;
        if (modulus(x_min) < tau) {
            hit = x_min;
        } else {
            // |c|^2 x^2 + 2 Re(c) x + 1 - tau^2 = 0
            const double qa = std::norm(c);
            const double qb = 2.0 * c.real();
            const double qc = 1.0 - tau * tau;
            if (qa > 0.0) {
                const double disc = qb * qb - 4.0 * qa * qc;
                if (disc >= 0.0) {
                    const double sq = std::sqrt(disc);
                    const double q = -0.5 * (qb + std::copysign(sq, qb));
                    double r1 = q / qa;
                    double r2 = q != 0.0 ? qc / q : r1;
                    if (r1 > r2) std::swap(r1, r2);
                    for (double r : {r1, r2}) {
                        if (r >= x_min && r <= x_max) {
                            hit = r;
                            break;
                        }
                    }
                }
            }
        }
        if (hit && (!best || *hit < best->x)) best = CrossingReport{*hit, y0, modulus(*hit)};
    }
    return best;
}

/// (alpha, beta) = (a^2 + b^2, -2a) for lambda = a + i b with b > 0.
inline FiberCoefficients reconstruct_coefficients(cplx lambda) {
    if (!(lambda.imag() > 0.0)) {
        throw Error(ErrorCode::ellipticity_violation,
                    "lambda must lie in the upper half plane, Im = " + std::to_string(lambda.imag()));
    }
    return {std::norm(lambda), -2.0 * lambda.real()};
}

/// (a_x + a a_y - b b_y, b_x + a b_y + b a_y).
inline std::pair<double, double> real_system_residual(const SpectralState& s) {
    const double a = s.a();
    const double b = s.b();
    const double ax = s.lambda_x.real();
    const double bx = s.lambda_x.imag();
    const double ay = s.lambda_y.real();
    const double by = s.lambda_y.imag();
    return {ax + a * ay - b * by, bx + a * by + b * ay};
}

struct BurgersGridRow {
    double x = 0.0;
    double y = 0.0;
    cplx lambda{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    double jacobian_modulus = std::numeric_limits<double>::quiet_NaN();
    bool solved = false;
};

/// Implicit solution over a tensor grid; points past a crossing are kept with
/// solved = false.
inline std::vector<BurgersGridRow> burgers_grid(const InitialProfile& profile, std::span<const double> xs,
                                                std::span<const double> ys, const NewtonOptions& opt = {}) {
    std::vector<BurgersGridRow> rows;
    rows.reserve(xs.size() * ys.size());
    for (double x : xs) {
        for (double y : ys) {
            BurgersGridRow row{x, y};
            try {
                const ImplicitSolution s = solve_implicit_report(profile, {x, y}, opt);
                row.lambda = s.lambda;
                row.jacobian_modulus = std::abs(s.jacobian);
                row.solved = true;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::crossing_detected && e.code() != ErrorCode::non_convergence) throw;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace velliptic
