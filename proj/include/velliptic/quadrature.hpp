#pragma once

// Gauss-Legendre rules, composite interval quadrature and compensated sums.

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <type_traits>
#include <vector>

#include "velliptic/error.hpp"

namespace velliptic {

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Componentwise compensated sum of a two-component quantity (complex
/// numbers, or algebra coefficients (u, v)).
class CompensatedSum2 {
public:
    void add(double a, double b) noexcept {
        first_.add(a);
        second_.add(b);
    }
    CompensatedSum2& operator+=(std::complex<double> z) noexcept {
        add(z.real(), z.imag());
        return *this;
    }
    [[nodiscard]] double first() const noexcept { return first_.value(); }
    [[nodiscard]] double second() const noexcept { return second_.value(); }
    [[nodiscard]] std::complex<double> complex() const noexcept { return {first(), second()}; }

private:
    CompensatedSum first_;
    CompensatedSum second_;
};

struct GaussRule {
    std::vector<double> nodes;    ///< on [-1, 1], ascending
    std::vector<double> weights;
};

namespace detail {

inline GaussRule compute_gauss_legendre(int n) {
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int k = 0; k < (n + 1) / 2; ++k) {
        double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[n - 1 - k] = x;
        r.weights[n - 1 - k] = w;
        r.nodes[k] = -x;
        r.weights[k] = w;
    }
    return r;
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree
/// 2n - 1. Rules are cached per n.
inline const GaussRule& gauss_legendre(int n) {
    if (n < 1 || n > 512) throw Error(ErrorCode::invalid_argument, "Gauss-Legendre order must be in [1, 512]");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    const std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussRule>(detail::compute_gauss_legendre(n));
    return *slot;
}

/// Composite Gauss-Legendre over [a, b] split into `panels` equal pieces.
/// f returns double or std::complex<double>.
template <class F>
auto integrate_composite(F&& f, double a, double b, int panels, int order) {
    using T = decltype(f(a));
    if (panels < 1) throw Error(ErrorCode::invalid_argument, "need at least one panel");
    const GaussRule& g = gauss_legendre(order);
    const double h = (b - a) / panels;
    CompensatedSum2 sum;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (std::size_t k = 0; k < g.nodes.size(); ++k) {
            sum += std::complex<double>((0.5 * h * g.weights[k]) * f(mid + 0.5 * h * g.nodes[k]));
        }
    }
    if constexpr (std::is_same_v<T, double>) {
        return sum.first();
    } else {
        return sum.complex();
    }
}

}  // namespace velliptic
