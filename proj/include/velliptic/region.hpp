#pragma once

// Bounded planar regions with piecewise-C1, positively oriented boundaries.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "velliptic/error.hpp"
#include "velliptic/field.hpp"
#include "velliptic/quadrature.hpp"

namespace velliptic {

/// A boundary piece t in [0, 1] -> point, with its tangent d(point)/dt.
struct BoundarySegment {
    std::function<Point(double)> point;
    std::function<Point(double)> tangent;
};

class Region {
public:
    enum class Kind { disk, rectangle, custom };

    static Region disk(Point center, double radius) {
        if (!(radius > 0.0)) throw Error(ErrorCode::invalid_argument, "disk radius must be positive");
        Region r;
        r.kind_ = Kind::disk;
        r.center_ = center;
        r.radius_ = radius;
        const double tau = 2.0 * std::numbers::pi;
        r.segments_.push_back(
            {[center, radius, tau](double t) {
                 return Point{center.x + radius * std::cos(tau * t), center.y + radius * std::sin(tau * t)};
             },
             [radius, tau](double t) {
                 return Point{-tau * radius * std::sin(tau * t), tau * radius * std::cos(tau * t)};
             }});
        return r;
    }

    /// Axis-aligned rectangle given by two opposite corners.
    static Region rectangle(Point a, Point b) {
        Region r;
        r.kind_ = Kind::rectangle;
        r.lo_ = {std::min(a.x, b.x), std::min(a.y, b.y)};
        r.hi_ = {std::max(a.x, b.x), std::max(a.y, b.y)};
        if (!(r.hi_.x > r.lo_.x) || !(r.hi_.y > r.lo_.y)) {
            throw Error(ErrorCode::invalid_argument, "rectangle has zero extent");
        }
        const Point c[4] = {r.lo_, {r.hi_.x, r.lo_.y}, r.hi_, {r.lo_.x, r.hi_.y}};
        for (int k = 0; k < 4; ++k) {
            const Point p0 = c[k];
            const Point p1 = c[(k + 1) % 4];
            r.segments_.push_back({[p0, p1](double t) { return p0 + t * (p1 - p0); },
                                   [p0, p1](double) { return p1 - p0; }});
        }
        return r;
    }

    /// User boundary with its own membership test; validated on construction.
    static Region custom(std::vector<BoundarySegment> segments, std::function<bool(Point)> inside) {
        Region r;
        r.kind_ = Kind::custom;
        r.segments_ = std::move(segments);
        r.inside_ = std::move(inside);
        r.validate();
        return r;
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::vector<BoundarySegment>& boundary() const noexcept { return segments_; }
    [[nodiscard]] Point center() const noexcept {
        return kind_ == Kind::rectangle ? 0.5 * (lo_ + hi_) : center_;
    }
    [[nodiscard]] double radius() const noexcept { return radius_; }
    [[nodiscard]] Point lower() const noexcept { return lo_; }
    [[nodiscard]] Point upper() const noexcept { return hi_; }

    [[nodiscard]] bool contains(Point p) const {
        switch (kind_) {
            case Kind::disk: return distance(p, center_) < radius_;
            case Kind::rectangle: return p.x > lo_.x && p.x < hi_.x && p.y > lo_.y && p.y < hi_.y;
            case Kind::custom: return inside_(p);
        }
        return false;
    }

    /// Distance to the boundary (exact for disks and rectangles, sampled
    /// otherwise).
    [[nodiscard]] double distance_to_boundary(Point p) const {
        switch (kind_) {
            case Kind::disk: return std::abs(radius_ - distance(p, center_));
            case Kind::rectangle: {
                if (contains(p)) return std::min({p.x - lo_.x, hi_.x - p.x, p.y - lo_.y, hi_.y - p.y});
                const double dx = std::max({lo_.x - p.x, 0.0, p.x - hi_.x});
                const double dy = std::max({lo_.y - p.y, 0.0, p.y - hi_.y});
                return std::hypot(dx, dy);
            }
            case Kind::custom: {
                double best = INFINITY;
                for (const auto& s : segments_) {
                    for (int k = 0; k <= 2000; ++k) best = std::min(best, distance(p, s.point(k / 2000.0)));
                }
                return best;
            }
        }
        return 0.0;
    }

    /// Points on the boundary and on a grid inside the region.
    [[nodiscard]] std::vector<Point> sample_points(int n = 9) const {
        std::vector<Point> pts;
        for (const auto& s : segments_) {
            for (int k = 0; k < 4 * n; ++k) pts.push_back(s.point(k / (4.0 * n)));
        }
        Point a = lo_;
        Point b = hi_;
        if (kind_ == Kind::disk) {
            a = {center_.x - radius_, center_.y - radius_};
            b = {center_.x + radius_, center_.y + radius_};
        } else if (kind_ == Kind::custom) {
            a = {INFINITY, INFINITY};
            b = {-INFINITY, -INFINITY};
            for (const Point& p : pts) {
                a = {std::min(a.x, p.x), std::min(a.y, p.y)};
                b = {std::max(b.x, p.x), std::max(b.y, p.y)};
            }
        }
        for (int i = 0; i <= n; ++i) {
            for (int k = 0; k <= n; ++k) {
                const Point p{a.x + (b.x - a.x) * i / n, a.y + (b.y - a.y) * k / n};
                if (contains(p)) pts.push_back(p);
            }
        }
        return pts;
    }

    /// Signed area by the boundary integral of (x dy - y dx) / 2.
    [[nodiscard]] double signed_area() const {
        double a = 0.0;
        for (const auto& s : segments_) {
            a += integrate_composite(
                [&](double t) {
                    const Point p = s.point(t);
                    const Point d = s.tangent(t);
                    return 0.5 * (p.x * d.y - p.y * d.x);
                },
                0.0, 1.0, 16, 8);
        }
        return a;
    }

    /// Throws unless the boundary closes to 1e-12 and is positively oriented.
    void validate() const {
        if (segments_.empty()) throw Error(ErrorCode::invalid_argument, "region has no boundary");
        for (std::size_t k = 0; k < segments_.size(); ++k) {
            const Point end = segments_[k].point(1.0);
            const Point next = segments_[(k + 1) % segments_.size()].point(0.0);
            if (distance(end, next) > 1e-12) {
                throw Error(ErrorCode::invalid_argument,
                            "boundary gap of " + std::to_string(distance(end, next)) + " after segment " +
                                std::to_string(k));
            }
        }
        if (!(signed_area() > 0.0)) throw Error(ErrorCode::invalid_argument, "boundary is not positively oriented");
    }

private:
    Region() = default;

    Kind kind_ = Kind::disk;
    std::vector<BoundarySegment> segments_;
    std::function<bool(Point)> inside_;
    Point center_{};
    double radius_ = 0.0;
    Point lo_{};
    Point hi_{};
};

}  // namespace velliptic
