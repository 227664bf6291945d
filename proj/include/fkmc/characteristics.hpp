#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fkmc/coefficients.hpp"
#include "fkmc/domain.hpp"
#include "fkmc/errors.hpp"
#include "fkmc/parallel.hpp"
#include "fkmc/rng.hpp"
#include "fkmc/vec.hpp"

namespace fkmc {

struct SimConfig {
    double step_h = 1e-3;           ///< Euler-Maruyama time step
    bool bridge_correction = false; ///< per-step crossing test between grid times
    std::uint64_t base_seed = 0;
    std::size_t path_count = 10000;
    unsigned threads = 0;           ///< 0 = hardware concurrency
    double escape_bound = 1e8;      ///< |y| above this raises NumericalBlowup
};

/// One simulated characteristic: capped exit time, state there, accumulated
/// discount exp(-int lambda), and whether the path left the domain.
struct PathOutcome {
    double tau_T = 0.0;
    Vec y_exit;
    double discount = 1.0;
    bool exited = false;
};

namespace detail {
struct NullObserver {
    void operator()(double /*t*/, const Vec& /*y*/) const {}
};
}  // namespace detail

inline Vec snap_to_face(const Domain& domain, const Vec& y, bool outer) {
    const double target = outer ? domain.r2 : domain.r1;
    if (domain.kind == DomainKind::Interval) return Vec{target};
    Vec out = y;
    const double r = y.norm();
    if (r > 0.0) out *= target / r;
    return out;
}

/// Euler-Maruyama simulation of one characteristic started at (x, s), killed
/// at the first step that leaves the domain (state snapped to the boundary
/// along the last increment) and capped at t_cap.
///
/// Noise is a pure function of (base_seed, path_index, step); `step_offset`
/// shifts the step numbering so a run restarted mid-way consumes the same
/// increments as the original (checkpoint/restart coupling).
///
/// The observer is called as observer(t, y) after every accepted step while
/// the path is still inside the domain.
template <typename Observer = detail::NullObserver>
PathOutcome simulate_path(const CoefficientSet& coeffs, const Domain& domain, const Vec& x,
                          double s, const SimConfig& cfg, std::uint64_t path_index,
                          double t_cap = -1.0, std::uint32_t step_offset = 0,
                          Observer&& observer = Observer{}) {
    if (t_cap < 0.0) t_cap = coeffs.T;
    const std::size_t n = coeffs.n;
    const std::size_t n_beta = coeffs.beta.size();
    const std::size_t n_noise = n_beta + coeffs.tilde_beta.size();

    PathOutcome out;
    out.y_exit = x;
    out.tau_T = s;
    out.discount = 1.0;

    if (!domain.contains(x)) {
        // started on (or outside) the boundary: immediate exit
        out.exited = true;
        return out;
    }
    if (s >= t_cap) {
        out.tau_T = t_cap;
        return out;
    }

    rng::PathStream stream(cfg.base_seed, path_index);
    double draws[2 * kMaxDim];

    Vec y = x;
    double t = s;
    std::uint32_t step = step_offset;
    while (t < t_cap) {
        const double dt = std::min(cfg.step_h, t_cap - t);
        stream.normals(step, draws, n_noise);

        const double lam = coeffs.eval_lambda(y, t);
        const Vec drift = coeffs.eval_f(y, t);

        const double sqrt_dt = std::sqrt(dt);
        Vec y_next = y;
        for (std::size_t i = 0; i < n; ++i) y_next[i] += drift[i] * dt;
        double sigma_sq = 0.0;  // local diffusion magnitude for the bridge test
        for (std::size_t k = 0; k < n_beta; ++k) {
            const Vec bk = coeffs.beta[k](y, t);
            sigma_sq += bk.norm2();
            const double z = sqrt_dt * draws[k];
            for (std::size_t i = 0; i < n; ++i) y_next[i] += bk[i] * z;
        }
        for (std::size_t k = 0; k < coeffs.tilde_beta.size(); ++k) {
            const Vec bk = coeffs.tilde_beta[k](y, t);
            sigma_sq += bk.norm2();
            const double z = sqrt_dt * draws[n_beta + k];
            for (std::size_t i = 0; i < n; ++i) y_next[i] += bk[i] * z;
        }

        if (lam != 0.0) out.discount *= std::exp(-lam * dt);
        const double t_next = t + dt;

        if (y_next.norm2() > cfg.escape_bound * cfg.escape_bound)
            throw NumericalBlowup("simulated state escaped the configured bound");

        if (!domain.contains(y_next)) {
            out.exited = true;
            out.tau_T = t_next;
            out.y_exit = domain.project_exit(y, y_next);
            return out;
        }

        if (cfg.bridge_correction && sigma_sq > 0.0) {
            // conditional crossing probability of each face on [t, t+dt]
            const auto [d1a, d1b] = domain.face_distances(y);
            const auto [d2a, d2b] = domain.face_distances(y_next);
            const double denom = sigma_sq * dt;
            const double p_inner = std::exp(-2.0 * d1a * d2a / denom);
            if (stream.uniform(step, 0) < p_inner) {
                out.exited = true;
                out.tau_T = t_next;
                out.y_exit = snap_to_face(domain, y_next, /*outer=*/false);
                return out;
            }
            const double p_outer = std::exp(-2.0 * d1b * d2b / denom);
            if (stream.uniform(step, 1) < p_outer) {
                out.exited = true;
                out.tau_T = t_next;
                out.y_exit = snap_to_face(domain, y_next, /*outer=*/true);
                return out;
            }
        }

        y = y_next;
        t = t_next;
        ++step;
        observer(t, y);
    }

    out.tau_T = t_cap;
    out.y_exit = y;
    return out;
}

/// Simulates path_index = 0 .. path_count-1; output is independent of thread
/// count and evaluation order.
inline std::vector<PathOutcome> simulate_batch(const CoefficientSet& coeffs, const Domain& domain,
                                               const Vec& x, double s, const SimConfig& cfg,
                                               double t_cap = -1.0) {
    std::vector<PathOutcome> out(cfg.path_count);
    parallel_for(cfg.path_count, cfg.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k)
            out[k] = simulate_path(coeffs, domain, x, s, cfg, k, t_cap);
    });
    return out;
}

}  // namespace fkmc
