#pragma once

// The explicit rigid family alpha = 1/(1 - eps x), beta = eps y / (1 - eps x),
// elliptic where S = 4(1 - eps x) - eps^2 y^2 > 0, with weight C sqrt(S).

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "velliptic/error.hpp"
#include "velliptic/fiber_algebra.hpp"
#include "velliptic/field.hpp"
#include "velliptic/structure_field.hpp"

namespace velliptic {

struct EpsilonDomainReport {
    bool inside = false;
    double S = 0.0;
    double pole = 0.0;  ///< 1 - eps x; zero on the pole line
};

class EpsilonStructure {
public:
    explicit EpsilonStructure(double epsilon, double C = 1.0) : eps_(epsilon), C_(C) {}

    static EpsilonStructure make(double epsilon, double C = 1.0) { return EpsilonStructure(epsilon, C); }

    [[nodiscard]] double epsilon() const noexcept { return eps_; }
    [[nodiscard]] double normalization() const noexcept { return C_; }

    [[nodiscard]] double pole(Point p) const noexcept { return 1.0 - eps_ * p.x; }
    [[nodiscard]] double S(Point p) const noexcept { return 4.0 * (1.0 - eps_ * p.x) - eps_ * eps_ * p.y * p.y; }

    [[nodiscard]] EpsilonDomainReport elliptic_domain_contains(Point p) const noexcept {
        const double k = pole(p);
        const double s = S(p);
        return {s > 0.0 && k != 0.0, s, k};
    }

    [[nodiscard]] Jet2 alpha_jet(Point p) const {
        require_off_pole(p);
        return reciprocal(1.0 - eps_ * xvar(p));
    }

    [[nodiscard]] Jet2 beta_jet(Point p) const {
        require_off_pole(p);
        return eps_ * yvar(p) * reciprocal(1.0 - eps_ * xvar(p));
    }

    [[nodiscard]] Jet2 S_jet(Point p) const {
        const Jet2 y = yvar(p);
        return 4.0 * (1.0 - eps_ * xvar(p)) - eps_ * eps_ * (y * y);
    }

    [[nodiscard]] double alpha(Point p) const { return alpha_jet(p).v; }
    [[nodiscard]] double beta(Point p) const { return beta_jet(p).v; }
    [[nodiscard]] double delta(Point p) const {
        const double k = pole(p);
        return S(p) / (k * k);
    }

    /// K(x) = eps / (1 - eps x); alpha' = alpha K and K' = K^2 along x.
    [[nodiscard]] double K(double x) const noexcept { return eps_ / (1.0 - eps_ * x); }

    [[nodiscard]] double weight(Point p) const { return weight_jet(p).v; }

    [[nodiscard]] Jet2 weight_jet(Point p) const {
        require_elliptic(p);
        return C_ * sqrt(S_jet(p));
    }

    [[nodiscard]] ScalarField weight_field() const {
        const EpsilonStructure self = *this;
        return ScalarField::from_jet([self](Point p, int) { return self.weight_jet(p); });
    }

    /// i_y = -eps (2 + eps y i) / S.
    [[nodiscard]] AlgebraElement iy_closed_form(Point p) const {
        require_elliptic(p);
        const double s = S(p);
        return {-2.0 * eps_ / s, -eps_ * eps_ * p.y / s, FiberCoefficients{alpha(p), beta(p)}};
    }

    /// lambda = (-eps y + i sqrt(S)) / (2 (1 - eps x)).
    [[nodiscard]] std::complex<double> lambda(Point p) const {
        require_elliptic(p);
        const double k = pole(p);
        return {-eps_ * p.y / (2.0 * k), std::sqrt(S(p)) / (2.0 * k)};
    }

    /// Trace of lambda on x = 0, continued to complex arguments.
    [[nodiscard]] std::complex<double> trace(std::complex<double> w) const {
        using namespace std::complex_literals;
        return 0.5 * (-eps_ * w + 1i * std::sqrt(4.0 - eps_ * eps_ * w * w));
    }

    [[nodiscard]] std::complex<double> trace_derivative(std::complex<double> w) const {
        using namespace std::complex_literals;
        const std::complex<double> r = std::sqrt(4.0 - eps_ * eps_ * w * w);
        return 0.5 * (-eps_ - 1i * eps_ * eps_ * w / r);
    }

    /// Analytic coefficients; the domain predicate excludes only the pole line
    /// so that points on the degeneracy parabola can still be classified.
    [[nodiscard]] CoefficientEvaluator evaluator() const {
        const EpsilonStructure self = *this;
        const double scale = 1.0;
        return CoefficientEvaluator(
            ScalarField::from_jet([self](Point p, int) { return self.alpha_jet(p); }),
            ScalarField::from_jet([self](Point p, int) { return self.beta_jet(p); }),
            [self](Point p) { return self.pole(p) != 0.0; }, scale);
    }

    [[nodiscard]] StructureField structure(double tau_par = 1e-10) const {
        return StructureField(evaluator(), tau_par);
    }

private:
    static Jet2 xvar(Point p) noexcept { return {p.x, 1.0, 0.0, 0.0, 0.0, 0.0}; }
    static Jet2 yvar(Point p) noexcept { return {p.y, 0.0, 1.0, 0.0, 0.0, 0.0}; }

    void require_off_pole(Point p) const {
        if (pole(p) == 0.0) throw Error(ErrorCode::out_of_domain, "point " + to_string(p) + " lies on the pole line");
    }

    void require_elliptic(Point p) const {
        const EpsilonDomainReport r = elliptic_domain_contains(p);
        if (!r.inside) {
            throw Error(ErrorCode::out_of_domain,
                        "point " + to_string(p) + " is outside the elliptic region (S = " + std::to_string(r.S) + ")");
        }
    }

    double eps_;
    double C_;
};

}  // namespace velliptic
