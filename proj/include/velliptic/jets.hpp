#pragma once

// Epsilon-jets lambda^eps = i + eps mu + eps^2 nu + eps^3 rho + ... of the
// spectral parameter of a one-parameter family of structures, and the
// (forced) Cauchy-Riemann equations they satisfy:
//
//   mu_x + i mu_y = 0,
//   nu_x + i nu_y = -mu mu_y,
//   rho_x + i rho_y = -(mu nu_y + nu mu_y).

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "velliptic/epsilon_family.hpp"
#include "velliptic/error.hpp"
#include "velliptic/field.hpp"
#include "velliptic/structure_field.hpp"

namespace velliptic {

using ComplexField = std::function<cplx(Point)>;
using StructureFamily = std::function<StructureField(double)>;

inline StructureFamily epsilon_family() {
    return [](double eps) { return EpsilonStructure(eps).structure(); };
}

inline StructureFamily constant_family(double alpha = 1.0, double beta = 0.0) {
    return [alpha, beta](double) { return StructureField(CoefficientEvaluator::constant(alpha, beta)); };
}

struct JetSample {
    cplx lambda0;
    cplx mu;
    cplx nu;
    cplx rho;
};

/// Central stencils in eps over {0, +-d, +-2d, +-3d}: sixth order for the
/// first and second derivatives, fourth order for the third.
class JetExtractor {
public:
    explicit JetExtractor(StructureFamily family, double eps_step = 1e-2) : eps_step_(eps_step) {
        if (!(eps_step >= 1e-4)) {
            throw Error(ErrorCode::invalid_argument, "eps step below 1e-4 loses the jets to cancellation");
        }
        for (int k = -3; k <= 3; ++k) members_[k + 3] = std::make_shared<StructureField>(family(k * eps_step));
    }

    [[nodiscard]] double eps_step() const noexcept { return eps_step_; }

    [[nodiscard]] JetSample extract(Point p, int order = 3) const {
        if (order < 0 || order > 3) throw Error(ErrorCode::invalid_argument, "jet order must be in [0, 3]");
        std::array<cplx, 7> f{};
        for (int k = 0; k < 7; ++k) {
            if (order == 0 && k != 3) continue;
            f[k] = members_[k]->spectral_lambda(p, false).lambda;
        }
        const double d = eps_step_;
        const auto at = [&](int k) { return f[k + 3]; };
        JetSample j{at(0), {}, {}, {}};
        if (order >= 1) {
            j.mu = (at(3) - 9.0 * at(2) + 45.0 * at(1) - 45.0 * at(-1) + 9.0 * at(-2) - at(-3)) / (60.0 * d);
        }
        if (order >= 2) {
            const cplx f2 = (2.0 * at(3) - 27.0 * at(2) + 270.0 * at(1) - 490.0 * at(0) + 270.0 * at(-1) -
                             27.0 * at(-2) + 2.0 * at(-3)) /
                            (180.0 * d * d);
            j.nu = 0.5 * f2;
        }
        if (order >= 3) {
            const cplx f3 =
                (-at(3) + 8.0 * at(2) - 13.0 * at(1) + 13.0 * at(-1) - 8.0 * at(-2) + at(-3)) / (8.0 * d * d * d);
            j.rho = f3 / 6.0;
        }
        return j;
    }

    [[nodiscard]] ComplexField mu() const {
        return [self = *this](Point p) { return self.extract(p, 1).mu; };
    }
    [[nodiscard]] ComplexField nu() const {
        return [self = *this](Point p) { return self.extract(p, 2).nu; };
    }
    [[nodiscard]] ComplexField rho() const {
        return [self = *this](Point p) { return self.extract(p, 3).rho; };
    }

private:
    double eps_step_;
    std::array<std::shared_ptr<const StructureField>, 7> members_;
};

inline JetSample extract_jets(const StructureFamily& family, Point p, int order = 3, double eps_step = 1e-2) {
    return JetExtractor(family, eps_step).extract(p, order);
}

namespace detail {

/// Fourth-order central difference of a complex field.
inline std::pair<cplx, cplx> complex_gradient(const ComplexField& g, Point p, double h) {
    const auto d = [&](Point e) {
        const auto at = [&](double t) { return g({p.x + t * e.x, p.y + t * e.y}); };
        return (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
    };
    return {d({1, 0}), d({0, 1})};
}

}  // namespace detail

inline constexpr double kJetSpatialStep = 1e-2;

/// mu_x + i mu_y.
inline cplx check_first_jet(const ComplexField& mu, Point p, double h = kJetSpatialStep) {
    const auto [mx, my] = detail::complex_gradient(mu, p, h);
    return mx + cplx{0, 1} * my;
}

/// (nu_x + i nu_y) + mu mu_y.
inline cplx check_second_jet(const ComplexField& mu, const ComplexField& nu, Point p, double h = kJetSpatialStep) {
    const auto [mx, my] = detail::complex_gradient(mu, p, h);
    const auto [nx, ny] = detail::complex_gradient(nu, p, h);
    return nx + cplx{0, 1} * ny + mu(p) * my;
}

/// (rho_x + i rho_y) + (mu nu_y + nu mu_y).
inline cplx check_third_jet(const ComplexField& mu, const ComplexField& nu, const ComplexField& rho, Point p,
                            double h = kJetSpatialStep) {
    const auto [mx, my] = detail::complex_gradient(mu, p, h);
    const auto [nx, ny] = detail::complex_gradient(nu, p, h);
    const auto [rx, ry] = detail::complex_gradient(rho, p, h);
    return rx + cplx{0, 1} * ry + (mu(p) * ny + nu(p) * my);
}

}  // namespace velliptic
