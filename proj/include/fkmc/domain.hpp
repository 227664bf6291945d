#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fkmc/errors.hpp"
#include "fkmc/vec.hpp"

namespace fkmc {

enum class DomainKind { Interval, SphericalLayer };

/// Bounded state region: an open interval (r1, r2) in one dimension, or the
/// open spherical layer {r1 < |x| < r2} in dimension >= 2 (with r1 > 0).
struct Domain {
    DomainKind kind = DomainKind::Interval;
    double r1 = 0.0;
    double r2 = 1.0;
    std::size_t dim = 1;

    static Domain interval(double a, double b) {
        Domain d{DomainKind::Interval, a, b, 1};
        d.validate();
        return d;
    }
    static Domain spherical_layer(double a, double b, std::size_t n) {
        Domain d{DomainKind::SphericalLayer, a, b, n};
        d.validate();
        return d;
    }

    void validate() const {
        if (!(r1 < r2)) throw ConfigError("domain requires r1 < r2");
        if (kind == DomainKind::Interval) {
            if (dim != 1) throw ConfigError("interval domain requires dim == 1");
        } else {
            if (dim < 2) throw ConfigError("spherical layer requires dim >= 2");
            if (!(r1 > 0.0)) throw ConfigError("spherical layer requires r1 > 0");
            if (dim > kMaxDim) throw ConfigError("dimension exceeds supported maximum");
        }
    }

    /// Radial coordinate used by the membership test.
    double radial(const Vec& x) const {
        return kind == DomainKind::Interval ? x[0] : x.norm();
    }

    bool contains(const Vec& x) const {
        const double r = radial(x);
        return r1 < r && r < r2;
    }

    /// 0 on the boundary set and everywhere outside the open region,
    /// positive inside: membership and distance agree by construction.
    double distance_to_boundary(const Vec& x) const {
        const double r = radial(x);
        if (r <= r1) return 0.0;
        if (r >= r2) return 0.0;
        return std::min(r - r1, r2 - r);
    }

    /// Distances (inner face, outer face) for a point inside the domain.
    std::pair<double, double> face_distances(const Vec& x) const {
        const double r = radial(x);
        return {r - r1, r2 - r};
    }

    /// Projects `to` onto the boundary along the segment from the interior
    /// point `from`; used to snap an overshooting Euler step.
    Vec project_exit(const Vec& from, const Vec& to) const {
        if (kind == DomainKind::Interval) {
            Vec y = to;
            y[0] = to[0] <= r1 ? r1 : r2;
            return y;
        }
        const double rt = to.norm();
        const double target = rt <= r1 ? r1 : r2;
        // smallest alpha in (0,1] with |from + alpha (to-from)| = target
        const Vec d = to - from;
        const double a = d.norm2();
        if (a == 0.0) return from;
        const double b = 2.0 * dot(from, d);
        const double c = from.norm2() - target * target;
        const double disc = std::max(0.0, b * b - 4.0 * a * c);
        const double sd = std::sqrt(disc);
        double alpha = (-b + sd) / (2.0 * a);
        const double alpha2 = (-b - sd) / (2.0 * a);
        if (alpha2 > 0.0 && alpha2 < alpha) alpha = alpha2;
        alpha = std::clamp(alpha, 0.0, 1.0);
        Vec y = from + alpha * d;
        // re-normalise exactly onto the sphere
        const double rn = y.norm();
        if (rn > 0.0) y *= target / rn;
        return y;
    }

    /// Deterministic sample of boundary points (1-D: the two ends; layers:
    /// axis and diagonal directions on both spheres).
    std::vector<Vec> boundary_samples() const {
        std::vector<Vec> out;
        if (kind == DomainKind::Interval) {
            out.push_back(Vec{r1});
            out.push_back(Vec{r2});
            return out;
        }
        std::vector<Vec> dirs;
        for (std::size_t i = 0; i < dim; ++i) {
            Vec e(dim);
            e[i] = 1.0;
            dirs.push_back(e);
            e[i] = -1.0;
            dirs.push_back(e);
        }
        Vec diag(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
        dirs.push_back(diag);
        for (double r : {r1, r2})
            for (const auto& d : dirs) out.push_back(r * d);
        return out;
    }

    std::string describe() const {
        if (kind == DomainKind::Interval)
            return "interval(" + std::to_string(r1) + "," + std::to_string(r2) + ")";
        return "spherical-layer(" + std::to_string(r1) + "," + std::to_string(r2) +
               ",dim=" + std::to_string(dim) + ")";
    }
};

}  // namespace fkmc
