#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "fkmc/coefficients.hpp"
#include "fkmc/domain.hpp"
#include "fkmc/errors.hpp"
#include "fkmc/field.hpp"
#include "fkmc/grid.hpp"
#include "fkmc/linalg.hpp"

namespace fkmc {

enum class FDScheme { CrankNicolson, ImplicitEuler };

struct FDGrid {
    std::size_t nx = 255;  ///< interior node count
    std::size_t nt = 256;  ///< time step count
    FDScheme scheme = FDScheme::CrankNicolson;
    double ellipticity_floor = 1e-10;
};

/// Deterministic finite-difference solution of the one-dimensional backward
/// problem  u_t + b u_xx + f u_x - lambda u = 0,  u|boundary = 0, u(., T) = xi,
/// marched from T with central differences. Crank-Nicolson runs one implicit
/// Euler startup step (Rannacher smoothing) to damp nonsmooth terminals.
///
/// Falls back to implicit Euler with twice the step count if the implicit
/// matrix loses diagonal dominance.
inline SolutionField solve_backward_pde(const CoefficientSet& coeffs, const Domain& domain,
                                        const TerminalData& xi, const FDGrid& fd) {
    if (coeffs.n != 1 || domain.kind != DomainKind::Interval)
        throw ConfigError("the finite-difference oracle is one-dimensional");
    if (fd.nx < 3 || fd.nt < 1) throw ConfigError("FD grid too small");

    const std::size_t nx = fd.nx;
    const double dx = (domain.r2 - domain.r1) / (nx + 1.0);

    auto node = [&](std::size_t j) { return domain.r1 + dx * static_cast<double>(j); };

    struct Attempt {
        FDScheme scheme;
        std::size_t nt;
    };
    std::vector<Attempt> attempts = {{fd.scheme, fd.nt}};
    if (fd.scheme == FDScheme::CrankNicolson)
        attempts.push_back({FDScheme::ImplicitEuler, 2 * fd.nt});

    std::vector<double> lower(nx - 1), diag(nx), upper(nx - 1), rhs(nx), interior(nx), next(nx);
    std::vector<double> bj(nx), fj(nx), lj(nx);

    for (const Attempt& attempt : attempts) {
        const std::size_t nt = attempt.nt;
        const double dt = coeffs.T / static_cast<double>(nt);

        for (std::size_t j = 0; j < nx; ++j) interior[j] = xi.xi(node(j + 1));

        std::vector<std::vector<double>> history(nt + 1);
        history[nt] = interior;

        auto eval_row = [&](double t) {
            for (std::size_t j = 0; j < nx; ++j) {
                const Vec x{node(j + 1)};
                bj[j] = coeffs.eval_b(x, t)(0, 0);
                if (bj[j] < fd.ellipticity_floor)
                    throw NotElliptic("b(x,t) below the ellipticity floor");
                fj[j] = coeffs.eval_f(x, t)[0];
                lj[j] = coeffs.eval_lambda(x, t);
            }
        };

        bool dominant = true;
        for (std::size_t m = nt; m-- > 0;) {
            const double t_new = coeffs.T * static_cast<double>(m) / static_cast<double>(nt);
            const double t_old = coeffs.T * static_cast<double>(m + 1) / static_cast<double>(nt);
            // Rannacher startup: first step after the terminal is implicit Euler
            const bool startup = (attempt.scheme == FDScheme::CrankNicolson && m + 1 == nt);
            const double theta =
                (attempt.scheme == FDScheme::ImplicitEuler || startup) ? 1.0 : 0.5;

            // explicit part at t_old
            if (theta < 1.0) {
                eval_row(t_old);
                for (std::size_t j = 0; j < nx; ++j) {
                    const double lo = bj[j] / (dx * dx) - fj[j] / (2.0 * dx);
                    const double di = -2.0 * bj[j] / (dx * dx) - lj[j];
                    const double up = bj[j] / (dx * dx) + fj[j] / (2.0 * dx);
                    const double w = (1.0 - theta) * dt;
                    double v = (1.0 + w * di) * interior[j];
                    if (j > 0) v += w * lo * interior[j - 1];
                    if (j + 1 < nx) v += w * up * interior[j + 1];
                    rhs[j] = v;
                }
            } else {
                rhs = interior;
            }

            // implicit part at t_new
            eval_row(t_new);
            for (std::size_t j = 0; j < nx; ++j) {
                const double lo = bj[j] / (dx * dx) - fj[j] / (2.0 * dx);
                const double di = -2.0 * bj[j] / (dx * dx) - lj[j];
                const double up = bj[j] / (dx * dx) + fj[j] / (2.0 * dx);
                diag[j] = 1.0 - theta * dt * di;
                if (j > 0) lower[j - 1] = -theta * dt * lo;
                if (j + 1 < nx) upper[j] = -theta * dt * up;
                const double off = (j > 0 ? std::abs(theta * dt * lo) : 0.0) +
                                   (j + 1 < nx ? std::abs(theta * dt * up) : 0.0);
                if (std::abs(diag[j]) < off) dominant = false;
            }
            if (!dominant && attempt.scheme == FDScheme::CrankNicolson) break;

            std::vector<double> lo_c = lower, di_c = diag, up_c = upper, rhs_c = rhs;
            if (!solve_tridiagonal(lo_c, di_c, up_c, rhs_c, next))
                throw Instability("tridiagonal solve hit a vanishing pivot");
            for (double v : next)
                if (!std::isfinite(v)) throw Instability("non-finite value in FD march");
            interior = next;
            history[m] = interior;
        }
        if (!dominant && attempt.scheme == FDScheme::CrankNicolson) continue;

        SolutionField field;
        field.grid.x_nodes.resize(nx + 2);
        for (std::size_t j = 0; j < nx + 2; ++j) field.grid.x_nodes[j] = node(j);
        field.grid.x_nodes.back() = domain.r2;
        field.grid.s_nodes.resize(nt + 1);
        for (std::size_t m = 0; m <= nt; ++m)
            field.grid.s_nodes[m] = coeffs.T * static_cast<double>(m) / static_cast<double>(nt);
        field.allocate();
        field.meta.step_h = dt;
        field.meta.c_lambda = c_lambda(coeffs, domain);
        for (std::size_t m = 0; m <= nt; ++m)
            for (std::size_t j = 0; j < nx; ++j) field.at(j + 1, m) = history[m][j];
        return field;
    }
    throw Instability("implicit matrix not diagonally dominant");
}

struct FieldComparison {
    double max_abs_diff = 0.0;
    double rms_diff = 0.0;
    double max_abs_z = 0.0;  ///< |diff| / combined stderr, 0 where both vanish
};

/// Differences after resampling both fields onto a common grid.
inline FieldComparison compare_fields(const SolutionField& a, const SolutionField& b,
                                      const GridSpec& on) {
    const SolutionField ra = resample(a, on);
    const SolutionField rb = resample(b, on);
    FieldComparison cmp;
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < ra.nx(); ++i) {
        for (std::size_t j = 0; j < ra.ns(); ++j) {
            const double d = ra.at(i, j) - rb.at(i, j);
            const double e =
                std::sqrt(ra.err_at(i, j) * ra.err_at(i, j) + rb.err_at(i, j) * rb.err_at(i, j));
            cmp.max_abs_diff = std::max(cmp.max_abs_diff, std::abs(d));
            sum_sq += d * d;
            ++count;
            if (d != 0.0) {
                const double z = e > 0.0 ? std::abs(d) / e : std::numeric_limits<double>::infinity();
                cmp.max_abs_z = std::max(cmp.max_abs_z, z);
            }
        }
    }
    cmp.rms_diff = count ? std::sqrt(sum_sq / static_cast<double>(count)) : 0.0;
    return cmp;
}

}  // namespace fkmc
