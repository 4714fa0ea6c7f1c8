#pragma once

// Planar points, second-order jets and scalar fields with a pluggable
// derivative provider (analytic partials or central differences).

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "velliptic/error.hpp"

namespace velliptic {

struct Point {
    double x{};
    double y{};

    friend constexpr Point operator+(Point a, Point b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point operator-(Point a, Point b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point operator*(double s, Point a) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point, Point) noexcept = default;
};

inline double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

inline std::string to_string(Point p) {
    return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

/// Value, gradient and Hessian of a scalar at a point. Arithmetic propagates
/// all three by the product and chain rules, so composed fields keep exact
/// derivatives.
struct Jet2 {
    double v{};
    double x{};
    double y{};
    double xx{};
    double xy{};
    double yy{};

    static constexpr Jet2 constant(double c) noexcept { return {c, 0, 0, 0, 0, 0}; }

    Jet2& operator+=(const Jet2& o) noexcept {
        v += o.v; x += o.x; y += o.y; xx += o.xx; xy += o.xy; yy += o.yy;
        return *this;
    }
    Jet2& operator-=(const Jet2& o) noexcept {
        v -= o.v; x -= o.x; y -= o.y; xx -= o.xx; xy -= o.xy; yy -= o.yy;
        return *this;
    }
    Jet2& operator*=(double s) noexcept {
        v *= s; x *= s; y *= s; xx *= s; xy *= s; yy *= s;
        return *this;
    }

    friend Jet2 operator+(Jet2 a, const Jet2& b) noexcept { return a += b; }
    friend Jet2 operator-(Jet2 a, const Jet2& b) noexcept { return a -= b; }
    friend Jet2 operator-(Jet2 a) noexcept { return a *= -1.0; }
    friend Jet2 operator*(double s, Jet2 a) noexcept { return a *= s; }
    friend Jet2 operator*(Jet2 a, double s) noexcept { return a *= s; }
    friend Jet2 operator+(Jet2 a, double c) noexcept { a.v += c; return a; }
    friend Jet2 operator+(double c, Jet2 a) noexcept { a.v += c; return a; }
    friend Jet2 operator-(Jet2 a, double c) noexcept { a.v -= c; return a; }
    friend Jet2 operator-(double c, Jet2 a) noexcept { return c + (-a); }

    friend Jet2 operator*(const Jet2& a, const Jet2& b) noexcept {
        return {a.v * b.v,
                a.x * b.v + a.v * b.x,
                a.y * b.v + a.v * b.y,
                a.xx * b.v + 2.0 * a.x * b.x + a.v * b.xx,
                a.xy * b.v + a.x * b.y + a.y * b.x + a.v * b.xy,
                a.yy * b.v + 2.0 * a.y * b.y + a.v * b.yy};
    }
};

/// Chain rule for a unary function with value f, first derivative df and
/// second derivative d2f evaluated at a.v.
inline Jet2 compose(const Jet2& a, double f, double df, double d2f) noexcept {
    return {f,
            df * a.x,
            df * a.y,
            df * a.xx + d2f * a.x * a.x,
            df * a.xy + d2f * a.x * a.y,
            df * a.yy + d2f * a.y * a.y};
}

inline Jet2 reciprocal(const Jet2& a) {
    const double r = 1.0 / a.v;
    return compose(a, r, -r * r, 2.0 * r * r * r);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

inline Jet2 sqrt(const Jet2& a) {
    const double s = std::sqrt(a.v);
    return compose(a, s, 0.5 / s, -0.25 / (s * a.v));
}

struct Gradient {
    double x{};
    double y{};
};

struct Hessian {
    double xx{};
    double xy{};
    double yy{};
};

/// A real field on the plane. `jet(p, order)` returns the value and, for
/// order >= 1, the gradient, for order 2 also the Hessian. Entries above the
/// requested order are left zero.
class ScalarField {
public:
    using JetFn = std::function<Jet2(Point, int)>;

    ScalarField() : ScalarField(constant(0.0)) {}

    static ScalarField constant(double c) {
        return ScalarField([c](Point, int) { return Jet2::constant(c); }, 2);
    }

    /// Analytic value and gradient; order-2 requests raise missing-derivatives.
    static ScalarField analytic(std::function<double(Point)> value,
                                std::function<Gradient(Point)> gradient) {
        return ScalarField(
            [value = std::move(value), gradient = std::move(gradient)](Point p, int order) {
                if (order > 1) {
                    throw Error(ErrorCode::missing_derivatives,
                                "second partials requested from a field with first-order data only");
                }
                Jet2 j{};
                j.v = value(p);
                if (order >= 1) {
                    const Gradient g = gradient(p);
                    j.x = g.x;
                    j.y = g.y;
                }
                return j;
            },
            1);
    }

    static ScalarField analytic(std::function<double(Point)> value,
                                std::function<Gradient(Point)> gradient,
                                std::function<Hessian(Point)> hessian) {
        return ScalarField(
            [value = std::move(value), gradient = std::move(gradient),
             hessian = std::move(hessian)](Point p, int order) {
                Jet2 j{};
                j.v = value(p);
                if (order >= 1) {
                    const Gradient g = gradient(p);
                    j.x = g.x;
                    j.y = g.y;
                }
                if (order >= 2) {
                    const Hessian h = hessian(p);
                    j.xx = h.xx;
                    j.xy = h.xy;
                    j.yy = h.yy;
                }
                return j;
            },
            2);
    }

    /// Derivatives by central differences. First partials use `step`
    /// (error O(step^2)); second partials use `step2`, which should sit near
    /// the fourth root of machine epsilon times the field scale.
    static ScalarField sampled(std::function<double(Point)> value, double step = 1e-5,
                               double step2 = 1e-4) {
        if (!(step > 0.0) || !(step2 > 0.0)) {
            throw Error(ErrorCode::invalid_argument, "finite-difference steps must be positive");
        }
        return ScalarField(
            [value = std::move(value), step, step2](Point p, int order) {
                Jet2 j{};
                j.v = value(p);
                if (order >= 1) {
                    j.x = (value({p.x + step, p.y}) - value({p.x - step, p.y})) / (2.0 * step);
                    j.y = (value({p.x, p.y + step}) - value({p.x, p.y - step})) / (2.0 * step);
                }
                if (order >= 2) {
                    const double h = step2;
                    const double c = j.v;
                    j.xx = (value({p.x + h, p.y}) - 2.0 * c + value({p.x - h, p.y})) / (h * h);
                    j.yy = (value({p.x, p.y + h}) - 2.0 * c + value({p.x, p.y - h})) / (h * h);
                    j.xy = (value({p.x + h, p.y + h}) - value({p.x + h, p.y - h}) -
                            value({p.x - h, p.y + h}) + value({p.x - h, p.y - h})) /
                           (4.0 * h * h);
                }
                return j;
            },
            2, /*finite_difference=*/true);
    }

    /// Field given directly by a jet provider supporting up to `max_order`.
    static ScalarField from_jet(JetFn fn, int max_order = 2) {
        return ScalarField(std::move(fn), max_order);
    }

    [[nodiscard]] Jet2 jet(Point p, int order = 1) const {
        if (order < 0 || order > 2) {
            throw Error(ErrorCode::invalid_argument, "jet order must be 0, 1 or 2");
        }
        if (order > max_order_) {
            throw Error(ErrorCode::missing_derivatives,
                        "field provides derivatives up to order " + std::to_string(max_order_));
        }
        return fn_(p, order);
    }

    [[nodiscard]] double operator()(Point p) const { return fn_(p, 0).v; }
    [[nodiscard]] int max_order() const noexcept { return max_order_; }
    [[nodiscard]] bool finite_difference() const noexcept { return finite_difference_; }

private:
    ScalarField(JetFn fn, int max_order, bool finite_difference = false)
        : fn_(std::move(fn)), max_order_(max_order), finite_difference_(finite_difference) {}

    JetFn fn_;
    int max_order_ = 2;
    bool finite_difference_ = false;
};

/// Pointwise product of two fields, with exact derivative propagation.
inline ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    return ScalarField::from_jet([a, b](Point p, int order) { return a.jet(p, order) * b.jet(p, order); },
                                 std::min(a.max_order(), b.max_order()));
}

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    return ScalarField::from_jet([a, b](Point p, int order) { return a.jet(p, order) + b.jet(p, order); },
                                 std::min(a.max_order(), b.max_order()));
}

inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    return ScalarField::from_jet([a, b](Point p, int order) { return a.jet(p, order) - b.jet(p, order); },
                                 std::min(a.max_order(), b.max_order()));
}

}  // namespace velliptic
