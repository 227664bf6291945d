#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fkmc/characteristics.hpp"
#include "fkmc/coefficients.hpp"
#include "fkmc/domain.hpp"
#include "fkmc/errors.hpp"
#include "fkmc/field.hpp"
#include "fkmc/grid.hpp"
#include "fkmc/parallel.hpp"

namespace fkmc {

namespace detail {

/// Single-pass mean / standard error accumulator (Welford).
struct Welford {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        ++count;
        const double d = v - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (v - mean);
    }
    double stderr_of_mean() const {
        if (count < 2) return 0.0;
        const double var = m2 / static_cast<double>(count - 1);
        return std::sqrt(var / static_cast<double>(count));
    }
};

}  // namespace detail

/// Monte Carlo solution of the terminal-value problem on a space-time grid:
///   u(x, s) = E[ discount * xi(y(T ^ tau)) ],
/// with xi read as 0 at boundary exits. Path k reuses stream k at every grid
/// point (common random numbers), so fields solved with the same seed are
/// exactly linear in the terminal data and positively coupled across nearby
/// grid points.
inline SolutionField solve_cauchy(const CoefficientSet& coeffs, const Domain& domain,
                                  const TerminalData& xi, const GridSpec& grid,
                                  const SimConfig& cfg) {
    if (coeffs.n != 1 || domain.kind != DomainKind::Interval)
        throw ConfigError("grid solves require a one-dimensional interval domain");
    grid.validate(domain, coeffs.T);

    SolutionField field;
    field.grid = grid;
    field.allocate();
    field.meta.paths = cfg.path_count;
    field.meta.base_seed = cfg.base_seed;
    field.meta.step_h = cfg.step_h;
    field.meta.c_lambda = c_lambda(coeffs, domain);

    const std::size_t nx = grid.x_nodes.size();
    const std::size_t ns = grid.s_nodes.size();
    std::vector<double> samples(cfg.path_count);

    for (std::size_t i = 0; i < nx; ++i) {
        const double x = grid.x_nodes[i];
        const bool boundary = (i == 0 || i + 1 == nx);
        for (std::size_t j = 0; j < ns; ++j) {
            const double s = grid.s_nodes[j];
            if (boundary) continue;  // u = 0 exactly on the boundary
            if (j + 1 == ns) {
                field.at(i, j) = xi.xi(x);  // zero-length simulation at s = T
                continue;
            }
            parallel_for(cfg.path_count, cfg.threads, [&](std::size_t begin, std::size_t end) {
                for (std::size_t k = begin; k < end; ++k) {
                    const PathOutcome p =
                        simulate_path(coeffs, domain, Vec{x}, s, cfg, k);
                    samples[k] = p.exited ? 0.0 : p.discount * xi.xi(p.y_exit[0]);
                }
            });
            detail::Welford acc;
            for (double v : samples) acc.add(v);
            field.at(i, j) = acc.mean;
            field.err_at(i, j) = acc.stderr_of_mean();
        }
    }
    return field;
}

/// Tower-property diagnostic: at each checkpoint t the discounted field value
/// along freshly simulated paths is re-averaged and compared with u(x, s).
struct MartingaleCheck {
    double reference = 0.0;  ///< u(x, s) interpolated from the field
    struct Point {
        double t = 0.0;
        double estimate = 0.0;
        double drift = 0.0;  ///< estimate - reference
        double stderr_mean = 0.0;
    };
    std::vector<Point> points;
    double max_abs_drift = 0.0;
};

inline MartingaleCheck martingale_check(const CoefficientSet& coeffs, const Domain& domain,
                                        double x, double s, const std::vector<double>& checkpoints,
                                        const SolutionField& field, const SimConfig& cfg) {
    MartingaleCheck rep;
    rep.reference = field.interpolate(x, s);
    std::vector<double> samples(cfg.path_count);
    for (double t : checkpoints) {
        if (t < s || t > coeffs.T) throw ConfigError("checkpoint outside [s, T]");
        parallel_for(cfg.path_count, cfg.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = begin; k < end; ++k) {
                const PathOutcome p = simulate_path(coeffs, domain, Vec{x}, s, cfg, k, t);
                samples[k] = p.exited ? 0.0 : p.discount * field.interpolate(p.y_exit[0], p.tau_T);
            }
        });
        detail::Welford acc;
        for (double v : samples) acc.add(v);
        MartingaleCheck::Point pt;
        pt.t = t;
        pt.estimate = acc.mean;
        pt.drift = acc.mean - rep.reference;
        pt.stderr_mean = acc.stderr_of_mean();
        rep.points.push_back(pt);
        rep.max_abs_drift = std::max(rep.max_abs_drift, std::abs(pt.drift));
    }
    return rep;
}

}  // namespace fkmc
