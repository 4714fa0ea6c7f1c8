#pragma once

// Arithmetic in the rank-two commutative algebra R[i]/(i^2 + beta i + alpha).

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "velliptic/error.hpp"

namespace velliptic {

enum class Regime { elliptic, parabolic, hyperbolic };

constexpr const char* to_string(Regime r) noexcept {
    switch (r) {
        case Regime::elliptic: return "elliptic";
        case Regime::parabolic: return "parabolic";
        case Regime::hyperbolic: return "hyperbolic";
    }
    return "unknown";
}

struct FiberCoefficients {
    double alpha{1.0};
    double beta{0.0};

    /// 4 alpha - beta^2; positive exactly on elliptic fibers.
    [[nodiscard]] constexpr double discriminant() const noexcept { return 4.0 * alpha - beta * beta; }

    /// Classification with a guard band: |discriminant| <= tol is parabolic.
    [[nodiscard]] constexpr Regime regime(double tol = 0.0) const noexcept {
        const double d = discriminant();
        if (d > tol) return Regime::elliptic;
        if (d < -tol) return Regime::hyperbolic;
        return Regime::parabolic;
    }

    friend constexpr bool operator==(const FiberCoefficients&, const FiberCoefficients&) noexcept = default;
};

inline std::string to_string(const FiberCoefficients& c) {
    std::ostringstream os;
    os.precision(17);
    os << "(alpha=" << c.alpha << ", beta=" << c.beta << ")";
    return os.str();
}

/// u + v i in a fixed fiber. Elements of different fibers never combine.
struct AlgebraElement {
    double u{};
    double v{};
    FiberCoefficients fiber{};

    static constexpr AlgebraElement scalar(double s, FiberCoefficients f) noexcept { return {s, 0.0, f}; }
    static constexpr AlgebraElement one(FiberCoefficients f) noexcept { return {1.0, 0.0, f}; }
    static constexpr AlgebraElement generator(FiberCoefficients f) noexcept { return {0.0, 1.0, f}; }
};

namespace detail {

inline void require_same_fiber(const AlgebraElement& a, const AlgebraElement& b) {
    if (!(a.fiber == b.fiber)) {
        throw Error(ErrorCode::fiber_mismatch,
                    "operands live in fibers " + to_string(a.fiber) + " and " + to_string(b.fiber));
    }
}

}  // namespace detail

inline AlgebraElement operator+(const AlgebraElement& a, const AlgebraElement& b) {
    detail::require_same_fiber(a, b);
    return {a.u + b.u, a.v + b.v, a.fiber};
}

inline AlgebraElement operator-(const AlgebraElement& a, const AlgebraElement& b) {
    detail::require_same_fiber(a, b);
    return {a.u - b.u, a.v - b.v, a.fiber};
}

inline AlgebraElement operator-(const AlgebraElement& a) { return {-a.u, -a.v, a.fiber}; }

inline AlgebraElement operator*(double s, const AlgebraElement& a) { return {s * a.u, s * a.v, a.fiber}; }
inline AlgebraElement operator*(const AlgebraElement& a, double s) { return s * a; }

/// Product reduced modulo i^2 = -beta i - alpha.
inline AlgebraElement mul(const AlgebraElement& a, const AlgebraElement& b) {
    detail::require_same_fiber(a, b);
    const double alpha = a.fiber.alpha;
    const double beta = a.fiber.beta;
    return {a.u * b.u - alpha * a.v * b.v, a.u * b.v + a.v * b.u - beta * a.v * b.v, a.fiber};
}

inline AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) { return mul(a, b); }

/// Conjugation i -> -beta - i.
inline AlgebraElement conj(const AlgebraElement& a) noexcept {
    return {a.u - a.fiber.beta * a.v, -a.v, a.fiber};
}

/// a * conj(a) = u^2 - beta u v + alpha v^2.
inline double norm(const AlgebraElement& a) noexcept {
    return a.u * a.u - a.fiber.beta * a.u * a.v + a.fiber.alpha * a.v * a.v;
}

/// sqrt(norm) on elliptic fibers.
inline double magnitude(const AlgebraElement& a) { return std::sqrt(std::max(0.0, norm(a))); }

inline AlgebraElement inverse(const AlgebraElement& a, double rel_tol = 1e-14) {
    const double n = norm(a);
    const double scale = (a.u * a.u + a.v * a.v) *
                         (1.0 + std::abs(a.fiber.alpha) + std::abs(a.fiber.beta));
    if (n == 0.0 || std::abs(n) <= rel_tol * scale) {
        std::ostringstream os;
        os.precision(17);
        os << "element (" << a.u << ", " << a.v << ") has norm " << n;
        throw Error(ErrorCode::non_invertible, os.str());
    }
    const AlgebraElement c = conj(a);
    return {c.u / n, c.v / n, a.fiber};
}

inline AlgebraElement divide(const AlgebraElement& a, const AlgebraElement& b) { return mul(a, inverse(b)); }

/// (2i + beta)^{-1} = (-beta - 2i) / Delta.
inline AlgebraElement inv_two_i_plus_beta(FiberCoefficients f) {
    const double d = f.discriminant();
    if (d == 0.0) {
        throw Error(ErrorCode::parabolic_degeneracy,
                    "2i + beta is a zero divisor on the parabolic fiber " + to_string(f));
    }
    return {-f.beta / d, -2.0 / d, f};
}

/// j = (2i + beta) / sqrt(Delta), the square root of -1 in an elliptic fiber.
inline AlgebraElement j_element(FiberCoefficients f) {
    const double d = f.discriminant();
    if (!(d > 0.0)) {
        throw Error(ErrorCode::ellipticity_violation,
                    "j requires Delta > 0, got Delta = " + std::to_string(d));
    }
    const double s = std::sqrt(d);
    return {f.beta / s, 2.0 / s, f};
}

}  // namespace velliptic
