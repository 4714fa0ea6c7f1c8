#pragma once

// Cauchy-Pompeiu representation for a rigid variable structure:
//
//   f(zeta) = (2 pi j)^{-1} \oint f Z^{-1} dz~ - (pi j)^{-1} \iint (D f) Z^{-1} dx dy,
//
// with kernel Z(z, zeta) = (y - eta) - i(z)(x - xi) and dz~ = dy - i(z) dx.
// Integrands live in the moving fiber at z; sums are assembled in the fiber
// at zeta under one of two transports (see Transport).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "velliptic/cr_calculus.hpp"
#include "velliptic/error.hpp"
#include "velliptic/fiber_algebra.hpp"
#include "velliptic/field.hpp"
#include "velliptic/quadrature.hpp"
#include "velliptic/region.hpp"
#include "velliptic/structure_field.hpp"

namespace velliptic {

/// How an element of the fiber at z is carried to the fiber at zeta.
enum class Transport {
    /// Through the standard complex plane: u + v i(z) -> u + v lambda(z),
    /// then pulled back at zeta. Multiplicative and exact for the theorem.
    embedded,
    /// Coefficients (u, v) reused verbatim in the fiber at zeta.
    coefficientwise,
};

constexpr const char* to_string(Transport t) noexcept {
    return t == Transport::embedded ? "embedded" : "coefficientwise";
}

/// Z(z, zeta) in the fiber at z.
inline AlgebraElement kernel(Point z, Point zeta, FiberCoefficients fiber_at_z) {
    return {z.y - zeta.y, -(z.x - zeta.x), fiber_at_z};
}

inline AlgebraElement kernel(const StructureField& s, Point z, Point zeta) { return kernel(z, zeta, s.fiber(z)); }

/// Upper-half-plane root lambda of i^2 + beta i + alpha in the fiber.
inline cplx embedding_root(FiberCoefficients f) {
    const double d = f.discriminant();
    if (!(d > 0.0)) throw Error(ErrorCode::ellipticity_violation, "embedding requires Delta > 0");
    return {-0.5 * f.beta, 0.5 * std::sqrt(d)};
}

inline cplx embed(const AlgebraElement& w) { return w.u + w.v * embedding_root(w.fiber); }

/// Inverse of embed in the fiber f.
inline AlgebraElement pull_back(cplx w, FiberCoefficients f) {
    const cplx lam = embedding_root(f);
    const double v = w.imag() / lam.imag();
    return {w.real() - v * lam.real(), v, f};
}

struct KernelBounds {
    double min_ratio = 0.0;  ///< min of |Z|_z / |z - zeta|
    double max_ratio = 0.0;
};

/// Samples |Z(z, zeta)|_z / |z - zeta| on the annulus r_in <= |z - zeta| <= r_out.
inline KernelBounds kernel_comparability(const StructureField& s, Point zeta, double r_in, double r_out,
                                         int n = 32) {
    KernelBounds b{INFINITY, 0.0};
    for (int i = 0; i <= n; ++i) {
        const double r = r_in + (r_out - r_in) * i / n;
        for (int k = 0; k < 4 * n; ++k) {
            const double t = 2.0 * std::numbers::pi * k / (4 * n);
            const Point z{zeta.x + r * std::cos(t), zeta.y + r * std::sin(t)};
            const double q = magnitude(kernel(s, z, zeta)) / r;
            b.min_ratio = std::min(b.min_ratio, q);
            b.max_ratio = std::max(b.max_ratio, q);
        }
    }
    return b;
}

/// Trapezoid rule for the residue of Z^{-1} dz~ on the circle |z - zeta| = r.
/// With freeze = true the fiber is held at zeta; the limit value is 2 pi j(zeta).
inline AlgebraElement residue_integral(const StructureField& s, Point zeta, double radius, int n_samples, bool freeze,
                                       Transport transport = Transport::embedded) {
    if (n_samples < 3) throw Error(ErrorCode::invalid_argument, "residue needs at least 3 samples");
    const FiberCoefficients f0 = s.elliptic_sample(zeta, 0).fiber();
    const double w = 2.0 * std::numbers::pi / n_samples;
    CompensatedSum2 sum;
    for (int k = 0; k < n_samples; ++k) {
        const double t = w * k;
        const double c = std::cos(t);
        const double sn = std::sin(t);
        const Point z{zeta.x + radius * c, zeta.y + radius * sn};
        const FiberCoefficients fz = freeze ? f0 : s.elliptic_sample(z, 0).fiber();
        // Z = r (sin t - i cos t), dz~/dt = r (cos t + i sin t); r cancels.
        const AlgebraElement h = inverse(AlgebraElement{sn, -c, fz}) * AlgebraElement{c, sn, fz};
        if (transport == Transport::embedded) {
            sum += embed(h);
        } else {
            sum.add(h.u, h.v);
        }
    }
    if (transport == Transport::embedded) return pull_back(w * sum.complex(), f0);
    return {w * sum.first(), w * sum.second(), f0};
}

inline AlgebraElement frozen_residue(const StructureField& s, Point zeta, double radius, int n_samples) {
    return residue_integral(s, zeta, radius, n_samples, true);
}

inline AlgebraElement variable_residue(const StructureField& s, Point zeta, double radius, int n_samples,
                                       Transport transport = Transport::embedded) {
    return residue_integral(s, zeta, radius, n_samples, false, transport);
}

/// Discretisation parameters of the representation formula.
struct CPMesh {
    int cells = 6;               ///< area cells per direction (radial for disks)
    int cell_order = 4;          ///< Gauss points per cell direction
    int patch_radial = 12;       ///< Gauss points in r on the singular patch
    int patch_angular = 24;      ///< trapezoid points in theta on the patch
    int boundary_panels = 8;     ///< panels per boundary segment
    int boundary_order = 8;      ///< Gauss points per panel
    double patch_fraction = 0.5; ///< patch radius / distance(zeta, boundary)

    /// Doubles every resolution parameter.
    [[nodiscard]] CPMesh refined() const {
        CPMesh m = *this;
        m.cells *= 2;
        m.patch_radial *= 2;
        m.patch_angular *= 2;
        m.boundary_panels *= 2;
        return m;
    }
};

namespace detail {

/// Accumulates fiber-valued samples in the fiber at zeta.
class FiberAccumulator {
public:
    FiberAccumulator(FiberCoefficients target, Transport t) : target_(target), transport_(t) {}

    void add(double weight, const AlgebraElement& h) {
        if (transport_ == Transport::embedded) {
            sum_ += weight * embed(h);
        } else {
            sum_.add(weight * h.u, weight * h.v);
        }
    }

    [[nodiscard]] AlgebraElement value() const {
        if (transport_ == Transport::embedded) return pull_back(sum_.complex(), target_);
        return {sum_.first(), sum_.second(), target_};
    }

private:
    FiberCoefficients target_;
    Transport transport_;
    CompensatedSum2 sum_;
};

inline double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / s);
    const double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

/// C-infinity cutoff: 1 for r <= rho/2, 0 for r >= rho.
inline double cutoff(double r, double rho) { return 1.0 - smooth_step(2.0 * r / rho - 1.0); }

/// Element h dz~ evaluated with tangent d = (dx, dy) in the fiber of h:
/// (u dy + v alpha dx) + (v dy - u dx + v beta dx) i.
inline AlgebraElement times_dz_tilde(const AlgebraElement& h, Point d) {
    const FiberCoefficients& f = h.fiber;
    return {h.u * d.y + h.v * f.alpha * d.x, h.v * d.y - h.u * d.x + h.v * f.beta * d.x, f};
}

}  // namespace detail

/// Line integral of f Z^{-1} dz~ over the region boundary.
inline AlgebraElement boundary_integral(const Section& f, const Region& region, const StructureField& s, Point zeta,
                                        const CPMesh& mesh = {}, Transport transport = Transport::embedded,
                                        double tau_boundary = 1e-9) {
    if (!region.contains(zeta) || region.distance_to_boundary(zeta) < tau_boundary) {
        throw Error(ErrorCode::out_of_domain, "zeta " + to_string(zeta) + " is not interior to the region");
    }
    detail::FiberAccumulator acc(s.elliptic_sample(zeta, 0).fiber(), transport);
    const GaussRule& g = gauss_legendre(mesh.boundary_order);
    for (const BoundarySegment& seg : region.boundary()) {
        const double h = 1.0 / mesh.boundary_panels;
        for (int p = 0; p < mesh.boundary_panels; ++p) {
            for (std::size_t k = 0; k < g.nodes.size(); ++k) {
                const double t = (p + 0.5 + 0.5 * g.nodes[k]) * h;
                const Point z = seg.point(t);
                const FiberCoefficients fz = s.elliptic_sample(z, 0).fiber();
                const AlgebraElement integrand = f.at(z, fz) * inverse(kernel(z, zeta, fz));
                acc.add(0.5 * h * g.weights[k], detail::times_dz_tilde(integrand, seg.tangent(t)));
            }
        }
    }
    return acc.value();
}

using FiberFunction = std::function<AlgebraElement(Point)>;

/// Area integral of g Z^{-1} over the region. The kernel singularity is
/// isolated by a smooth cutoff on a polar patch around zeta, where r dr dtheta
/// cancels the 1/r growth; the remainder is smooth and integrated on cells.
inline AlgebraElement area_integral(const FiberFunction& g, const Region& region, const StructureField& s, Point zeta,
                                    const CPMesh& mesh = {}, Transport transport = Transport::embedded) {
    if (!region.contains(zeta)) {
        throw Error(ErrorCode::out_of_domain, "zeta " + to_string(zeta) + " is outside the region");
    }
    detail::FiberAccumulator acc(s.elliptic_sample(zeta, 0).fiber(), transport);
    const double rho = mesh.patch_fraction * region.distance_to_boundary(zeta);
    const auto sample = [&](Point z) {
        const AlgebraElement gz = g(z);
        return gz * inverse(kernel(z, zeta, gz.fiber));
    };

    // Singular patch: chi(r) g/Z r dr dtheta.
    {
        const GaussRule& gr = gauss_legendre(mesh.patch_radial);
        const double wt = 2.0 * std::numbers::pi / mesh.patch_angular;
        for (std::size_t i = 0; i < gr.nodes.size(); ++i) {
            const double r = 0.5 * rho * (1.0 + gr.nodes[i]);
            const double chi = detail::cutoff(r, rho);
            if (chi == 0.0) continue;
            const double wr = 0.5 * rho * gr.weights[i] * r * chi;
            for (int k = 0; k < mesh.patch_angular; ++k) {
                const double t = wt * (k + 0.5);
                acc.add(wr * wt, sample({zeta.x + r * std::cos(t), zeta.y + r * std::sin(t)}));
            }
        }
    }

    // Smooth remainder: (1 - chi) g/Z on cells.
    const GaussRule& gc = gauss_legendre(mesh.cell_order);
    const auto remainder = [&](Point z, double w) {
        const double chi = detail::cutoff(distance(z, zeta), rho);
        if (chi < 1.0) acc.add(w * (1.0 - chi), sample(z));
    };
    if (region.kind() == Region::Kind::rectangle) {
        const Point lo = region.lower();
        const Point hi = region.upper();
        const double hx = (hi.x - lo.x) / mesh.cells;
        const double hy = (hi.y - lo.y) / mesh.cells;
        for (int a = 0; a < mesh.cells; ++a) {
            for (int b = 0; b < mesh.cells; ++b) {
                for (std::size_t i = 0; i < gc.nodes.size(); ++i) {
                    for (std::size_t k = 0; k < gc.nodes.size(); ++k) {
                        const Point z{lo.x + (a + 0.5 + 0.5 * gc.nodes[i]) * hx,
                                      lo.y + (b + 0.5 + 0.5 * gc.nodes[k]) * hy};
                        remainder(z, 0.25 * hx * hy * gc.weights[i] * gc.weights[k]);
                    }
                }
            }
        }
    } else if (region.kind() == Region::Kind::disk) {
        const Point c = region.center();
        const double R = region.radius();
        const int nr = mesh.cells;
        const int nt = 4 * mesh.cells;
        const double hr = R / nr;
        const double ht = 2.0 * std::numbers::pi / nt;
        for (int a = 0; a < nr; ++a) {
            for (int b = 0; b < nt; ++b) {
                for (std::size_t i = 0; i < gc.nodes.size(); ++i) {
                    const double r = (a + 0.5 + 0.5 * gc.nodes[i]) * hr;
                    for (std::size_t k = 0; k < gc.nodes.size(); ++k) {
                        const double t = (b + 0.5 + 0.5 * gc.nodes[k]) * ht;
                        remainder({c.x + r * std::cos(t), c.y + r * std::sin(t)},
                                  0.25 * hr * ht * gc.weights[i] * gc.weights[k] * r);
                    }
                }
            }
        }
    } else {
        throw Error(ErrorCode::invalid_argument, "area quadrature supports disk and rectangle regions");
    }
    return acc.value();
}

struct RigidityGate {
    double max_residual = 0.0;
    Point worst{};
    double tolerance = 0.0;
    std::size_t samples = 0;
};

/// Max |G| over boundary and interior sample points of the region.
inline RigidityGate rigidity_gate(const StructureField& s, const Region& region, double tau_rigid = 1e-6,
                                  int n = 9) {
    RigidityGate g;
    double scale = 1.0;
    for (const Point& p : region.sample_points(n)) {
        const FiberCoefficients f = s.fiber(p);
        scale = std::max({scale, std::abs(f.alpha), std::abs(f.beta)});
        const double r = s.rigidity_residual(p);
        if (r > g.max_residual) {
            g.max_residual = r;
            g.worst = p;
        }
        ++g.samples;
    }
    g.tolerance = tau_rigid * scale;
    return g;
}

struct CPReport {
    Point zeta{};
    Transport transport = Transport::embedded;
    AlgebraElement boundary;
    AlgebraElement area;
    AlgebraElement value;
    AlgebraElement exact;
    double residual = 0.0;
    /// The same formula assembled with the other transport, for comparison.
    AlgebraElement alternate_value;
    double alternate_residual = 0.0;
    RigidityGate rigidity;
    CPMesh mesh;
};

struct CPOptions {
    CPMesh mesh{};
    Transport transport = Transport::embedded;
    double tau_rigid = 1e-6;
    bool compute_alternate = true;
};

namespace detail {

/// (2 pi j)^{-1} B - (pi j)^{-1} A, using j^{-1} = -j.
inline AlgebraElement assemble(const AlgebraElement& B, const AlgebraElement& A) {
    const AlgebraElement mj = -j_element(B.fiber);
    return mj * ((1.0 / (2.0 * std::numbers::pi)) * B - (1.0 / std::numbers::pi) * A);
}

}  // namespace detail

/// Evaluates the representation formula for f at zeta. Refuses structures
/// that are not rigid on the region.
inline CPReport reconstruct(const Section& f, const Region& region, const StructureField& s, Point zeta,
                            const CPOptions& opt = {}) {
    CPReport rep;
    rep.zeta = zeta;
    rep.transport = opt.transport;
    rep.mesh = opt.mesh;
    rep.rigidity = rigidity_gate(s, region, opt.tau_rigid);
    if (rep.rigidity.max_residual > rep.rigidity.tolerance) {
        std::ostringstream os;
        os.precision(6);
        os << "structure is not rigid on the region: max |G| = " << rep.rigidity.max_residual << " at "
           << to_string(rep.rigidity.worst) << " exceeds " << rep.rigidity.tolerance;
        throw Error(ErrorCode::not_rigid, os.str());
    }
    const FiberFunction Df = [&](Point z) { return covariant_D(f, s, z); };
    const auto run = [&](Transport t) {
        const AlgebraElement B = boundary_integral(f, region, s, zeta, opt.mesh, t);
        const AlgebraElement A = area_integral(Df, region, s, zeta, opt.mesh, t);
        return std::tuple{B, A, detail::assemble(B, A)};
    };
    std::tie(rep.boundary, rep.area, rep.value) = run(opt.transport);
    rep.exact = f.at(zeta, s);
    rep.residual = magnitude(rep.value - rep.exact);
    if (opt.compute_alternate) {
        const Transport other =
            opt.transport == Transport::embedded ? Transport::coefficientwise : Transport::embedded;
        rep.alternate_value = std::get<2>(run(other));
        rep.alternate_residual = magnitude(rep.alternate_value - rep.exact);
    } else {
        rep.alternate_value = rep.value;
        rep.alternate_residual = rep.residual;
    }
    return rep;
}

/// Circulation of g dz~ around the square of side `side` centred at c,
/// assembled in the fiber at c. Gauss rule with `order` points per edge.
inline AlgebraElement square_circulation(const Section& g, const StructureField& s, Point c, double side,
                                         Transport transport = Transport::embedded, int order = 8) {
    const Region sq = Region::rectangle({c.x - 0.5 * side, c.y - 0.5 * side}, {c.x + 0.5 * side, c.y + 0.5 * side});
    detail::FiberAccumulator acc(s.elliptic_sample(c, 0).fiber(), transport);
    const GaussRule& gr = gauss_legendre(order);
    for (const BoundarySegment& seg : sq.boundary()) {
        for (std::size_t k = 0; k < gr.nodes.size(); ++k) {
            const double t = 0.5 * (1.0 + gr.nodes[k]);
            const Point z = seg.point(t);
            acc.add(0.5 * gr.weights[k], detail::times_dz_tilde(g.at(z, s), seg.tangent(t)));
        }
    }
    return acc.value();
}

}  // namespace velliptic
