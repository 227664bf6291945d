#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fkmc/domain.hpp"
#include "fkmc/errors.hpp"
#include "fkmc/linalg.hpp"
#include "fkmc/vec.hpp"

namespace fkmc {

/// Coefficient fields of a backward parabolic problem: second-order matrix b,
/// drift f, discount rate lambda (the path weight is exp(-int lambda)), and
/// first-order noise loadings beta_i, together with the completed diffusion
/// directions tilde_beta satisfying
///   2 b = sum_i beta_i beta_i^T + sum_j tilde_beta_j tilde_beta_j^T.
///
/// All fields are deterministic functions of (x, t).
struct CoefficientSet {
    std::size_t n = 1;              ///< state dimension
    MatFn b;                        ///< symmetric n x n second-order field
    VecFn f;                        ///< drift
    ScalarFn lambda;                ///< discount rate: the path weight is exp(-int lambda)
    std::vector<VecFn> beta;        ///< first-order noise loadings (N entries)
    std::vector<VecFn> tilde_beta;  ///< completion loadings (M entries), see complete_diffusion
    double T = 1.0;                 ///< terminal time

    std::size_t n_wiener() const { return beta.size(); }
    std::size_t n_aux() const { return tilde_beta.size(); }

    Mat eval_b(const Vec& x, double t) const {
        Mat m = b ? b(x, t) : Mat(n);
        if (m.size() != n) throw EvaluationError("b(x,t) has wrong dimension");
        return m;
    }
    Vec eval_f(const Vec& x, double t) const {
        if (!f) return Vec(n);
        Vec v = f(x, t);
        if (v.size() != n) throw EvaluationError("f(x,t) has wrong dimension");
        return v;
    }
    double eval_lambda(const Vec& x, double t) const { return lambda ? lambda(x, t) : 0.0; }
};

/// Tensor probe grid used by the structural validations. 33 x 17 by default.
struct SamplingSpec {
    std::size_t space_points = 33;
    std::size_t time_points = 17;
};

/// Deterministic interior probe points of domain x [0, T].
inline std::vector<Vec> probe_space_points(const Domain& domain, std::size_t count) {
    std::vector<Vec> pts;
    if (count == 0) return pts;
    if (domain.kind == DomainKind::Interval) {
        for (std::size_t i = 0; i < count; ++i) {
            const double u = (i + 1.0) / (count + 1.0);
            pts.push_back(Vec{domain.r1 + u * (domain.r2 - domain.r1)});
        }
        return pts;
    }
    // spherical layer: radial grid along each axis plus the main diagonal
    std::vector<Vec> dirs;
    for (std::size_t i = 0; i < domain.dim; ++i) {
        Vec e(domain.dim);
        e[i] = 1.0;
        dirs.push_back(e);
    }
    dirs.push_back(Vec(domain.dim, 1.0 / std::sqrt(static_cast<double>(domain.dim))));
    const std::size_t radial = std::max<std::size_t>(1, count / dirs.size());
    for (const auto& d : dirs) {
        for (std::size_t i = 0; i < radial; ++i) {
            const double u = (i + 1.0) / (radial + 1.0);
            pts.push_back((domain.r1 + u * (domain.r2 - domain.r1)) * d);
        }
    }
    return pts;
}

inline std::vector<double> probe_times(double T, std::size_t count) {
    std::vector<double> ts;
    if (count == 1) {
        ts.push_back(0.0);
        return ts;
    }
    for (std::size_t j = 0; j < count; ++j) ts.push_back(T * j / (count - 1.0));
    return ts;
}

/// exp(T sup max(0, lambda)) with the sup taken over a probe grid; the
/// sup-norm constant of the solution operator.
inline double c_lambda(const CoefficientSet& coeffs, const Domain& domain,
                       const SamplingSpec& probe = {}) {
    double sup = 0.0;
    for (const auto& x : probe_space_points(domain, probe.space_points))
        for (double t : probe_times(coeffs.T, probe.time_points))
            sup = std::max(sup, coeffs.eval_lambda(x, t));
    return std::exp(coeffs.T * sup);
}

struct CoercivityReport {
    double rho_hat = 0.0;  ///< min over probes of lambda_min(b - 1/2 sum beta beta^T)
    Vec worst_x;
    double worst_t = 0.0;
};

/// Smallest coercivity margin over the probe grid. A value below -tolerance
/// means the model is outside the supported class.
inline CoercivityReport validate_coercivity(const CoefficientSet& coeffs, const Domain& domain,
                                            const SamplingSpec& probe = {}) {
    const auto pts = probe_space_points(domain, probe.space_points);
    const auto ts = probe_times(coeffs.T, probe.time_points);
    if (pts.empty() || ts.empty()) throw ConfigError("empty probe grid");

    CoercivityReport rep;
    bool first = true;
    for (const auto& x : pts) {
        for (double t : ts) {
            Mat m = coeffs.eval_b(x, t);
            if (!m.symmetric(1e-9 * std::max(1.0, m.max_abs())))
                throw EvaluationError("b(x,t) is not symmetric at a probe point");
            for (const auto& bi : coeffs.beta) {
                Vec v = bi(x, t);
                if (v.size() != coeffs.n) throw EvaluationError("beta_i(x,t) has wrong dimension");
                m -= 0.5 * outer(v);
            }
            const double lam = smallest_eigenvalue(m);
            if (first || lam < rep.rho_hat) {
                rep.rho_hat = lam;
                rep.worst_x = x;
                rep.worst_t = t;
                first = false;
            }
        }
    }
    return rep;
}

inline constexpr double kPsdClampRelTol = 1e-10;

/// Populates tilde_beta with the columns of the symmetric PSD square root of
/// R(x,t) = 2b - sum beta beta^T, evaluated on demand. M = n columns.
///
/// Throws NotPSD if R has an eigenvalue below -tolerance at a probe point,
/// and checks the reconstruction sum tilde tilde^T = R on the probe grid.
inline CoefficientSet complete_diffusion(const CoefficientSet& coeffs, const Domain& domain,
                                         const SamplingSpec& probe = {}) {
    CoefficientSet out = coeffs;
    out.tilde_beta.clear();

    auto remainder = [coeffs](const Vec& x, double t) {
        Mat r = coeffs.eval_b(x, t);
        r *= 2.0;
        for (const auto& bi : coeffs.beta) r -= outer(bi(x, t));
        return r;
    };
    auto sqrt_at = [remainder](const Vec& x, double t) {
        double min_eig = 0.0;
        Mat r = remainder(x, t);
        Mat s = sqrt_psd_clamped(r, kPsdClampRelTol, &min_eig);
        const double tol = kPsdClampRelTol * std::max(1.0, r.max_abs());
        if (min_eig < -tol)
            throw NotPSD("2b - sum beta beta^T has eigenvalue " + std::to_string(min_eig));
        return s;
    };

    for (std::size_t j = 0; j < coeffs.n; ++j) {
        out.tilde_beta.push_back([sqrt_at, j](const Vec& x, double t) {
            const Mat s = sqrt_at(x, t);
            Vec col(s.size());
            for (std::size_t i = 0; i < s.size(); ++i) col[i] = s(i, j);
            return col;
        });
    }

    // reconstruction check on the probe grid
    const auto pts = probe_space_points(domain, probe.space_points);
    const auto ts = probe_times(coeffs.T, probe.time_points);
    for (const auto& x : pts) {
        for (double t : ts) {
            const Mat r = remainder(x, t);
            Mat rec(coeffs.n);
            for (const auto& tb : out.tilde_beta) rec += outer(tb(x, t));
            const double tol = 64.0 * kPsdClampRelTol * std::max(1.0, r.max_abs());
            if ((rec - r).max_abs() > tol)
                throw NotPSD("diffusion completion failed to reconstruct 2b - sum beta beta^T");
        }
    }
    return out;
}

struct BoundaryVanishingReport {
    std::vector<double> max_abs;  ///< per beta_i, max |beta_i| over boundary samples
    bool pass = true;             ///< true when every entry is ~0
};

/// The supported theory wants beta_i = 0 on the boundary, but the flagship
/// application (beta = sigma x on a price band) violates it; this therefore
/// only warns via pass=false.
inline BoundaryVanishingReport check_boundary_vanishing(const CoefficientSet& coeffs,
                                                        const Domain& domain,
                                                        std::vector<Vec> samples = {}) {
    if (samples.empty()) samples = domain.boundary_samples();
    for (const auto& s : samples) {
        if (domain.distance_to_boundary(s) != 0.0 || domain.contains(s))
            throw ConfigError("boundary sample is not on the boundary");
    }
    BoundaryVanishingReport rep;
    const double t_probe[] = {0.0, 0.5 * coeffs.T, coeffs.T};
    for (const auto& bi : coeffs.beta) {
        double m = 0.0;
        for (const auto& x : samples)
            for (double t : t_probe) m = std::max(m, bi(x, t).norm());
        rep.max_abs.push_back(m);
        if (m > 1e-12) rep.pass = false;
    }
    return rep;
}

}  // namespace fkmc
