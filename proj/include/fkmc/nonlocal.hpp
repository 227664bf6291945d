#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "fkmc/errors.hpp"
#include "fkmc/field.hpp"
#include "fkmc/grid.hpp"
#include "fkmc/solver.hpp"

namespace fkmc {

/// Non-local terminal operators Gamma acting on solution fields. The solved
/// problem couples the terminal value to the past: u(., T) - Gamma u = xi.
namespace gamma {

/// kappa * u(., t1)
struct PointScaled {
    double kappa = 0.0;
    double t1 = 0.0;
};

/// alpha1 * u(., t1) + alpha2 * u(., t2)
struct TwoPoint {
    double alpha1 = 0.0;
    double t1 = 0.0;
    double alpha2 = 0.0;
    double t2 = 0.0;
};

/// int_0^theta k(t) u(., t) dt
struct TimeKernel {
    std::function<double(double)> k;
    double theta = 0.0;
};

/// int_0^theta dt int_D k(t, y, x) u(y, t) dy   (one-dimensional D)
struct SpaceTimeKernel {
    std::function<double(double, double, double)> k;  ///< k(t, y, x)
    double theta = 0.0;
    double x_lo = 0.0;  ///< domain bounds for the y-integral and the x ess-sup
    double x_hi = 1.0;
};

struct Combo;

using Kernel = std::variant<PointScaled, TwoPoint, TimeKernel, SpaceTimeKernel, Combo>;

/// Convex combination of catalog operators.
struct Combo {
    std::vector<double> weights;
    std::vector<Kernel> parts;
};

enum class Regime {
    Windowed,      ///< budget <= 1 and the kernel reads u only on [0, theta], theta < T
    Contractive,   ///< budget strictly below 1
    Inadmissible   ///< theta = T at full budget, or a catalog budget violated
};

struct NormBound {
    double bound = 0.0;
    Regime regime = Regime::Inadmissible;
};

/// Latest time at which the kernel reads the field.
inline double support_end(const Kernel& kernel) {
    return std::visit(
        [](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, PointScaled>) return k.t1;
            if constexpr (std::is_same_v<K, TwoPoint>) return std::max(k.t1, k.t2);
            if constexpr (std::is_same_v<K, TimeKernel>) return k.theta;
            if constexpr (std::is_same_v<K, SpaceTimeKernel>) return k.theta;
            if constexpr (std::is_same_v<K, Combo>) {
                double m = 0.0;
                for (const auto& p : k.parts) m = std::max(m, support_end(p));
                return m;
            }
        },
        kernel);
}

namespace detail {

inline double integral_abs(const std::function<double(double)>& f, double lo, double hi,
                           std::size_t panels = 2048) {
    if (hi <= lo) return 0.0;
    const double h = (hi - lo) / static_cast<double>(panels);
    double sum = 0.5 * (std::abs(f(lo)) + std::abs(f(hi)));
    for (std::size_t i = 1; i < panels; ++i) sum += std::abs(f(lo + h * static_cast<double>(i)));
    return sum * h;
}

}  // namespace detail

/// The operator-norm budget of the kernel and its admissibility regime.
/// Integral budgets are evaluated by trapezoid quadrature; a small tolerance
/// absorbs quadrature rounding at the catalog's equality cases.
inline NormBound norm_bound(const Kernel& kernel, double T) {
    constexpr double eps = 1e-9;
    const double theta = support_end(kernel);
    const bool reads_before_T = theta < T - eps;

    const double bound = std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, PointScaled>) return std::abs(k.kappa);
            if constexpr (std::is_same_v<K, TwoPoint>) return std::abs(k.alpha1) + std::abs(k.alpha2);
            if constexpr (std::is_same_v<K, TimeKernel>)
                return detail::integral_abs(k.k, 0.0, k.theta);
            if constexpr (std::is_same_v<K, SpaceTimeKernel>) {
                double sup = 0.0;
                const std::size_t nxp = 65, nyp = 257, ntp = 129;
                for (std::size_t ix = 0; ix <= nxp; ++ix) {
                    const double x = k.x_lo + (k.x_hi - k.x_lo) * ix / static_cast<double>(nxp);
                    double acc = 0.0;
                    for (std::size_t it = 0; it <= ntp; ++it) {
                        const double t = k.theta * it / static_cast<double>(ntp);
                        double inner = 0.0;
                        for (std::size_t iy = 0; iy <= nyp; ++iy) {
                            const double y =
                                k.x_lo + (k.x_hi - k.x_lo) * iy / static_cast<double>(nyp);
                            const double w = (iy == 0 || iy == nyp) ? 0.5 : 1.0;
                            inner += w * std::abs(k.k(t, y, x));
                        }
                        inner *= (k.x_hi - k.x_lo) / static_cast<double>(nyp);
                        const double wt = (it == 0 || it == ntp) ? 0.5 : 1.0;
                        acc += wt * inner;
                    }
                    acc *= k.theta / static_cast<double>(ntp);
                    sup = std::max(sup, acc);
                }
                return sup;
            }
            if constexpr (std::is_same_v<K, Combo>) {
                if (k.weights.size() != k.parts.size())
                    throw InvalidKernel("combo weights/parts mismatch");
                double wsum = 0.0, b = 0.0;
                for (std::size_t i = 0; i < k.parts.size(); ++i) {
                    if (k.weights[i] < -eps) throw InvalidKernel("combo weights must be >= 0");
                    wsum += k.weights[i];
                    b += k.weights[i] * norm_bound(k.parts[i], T).bound;
                }
                if (std::abs(wsum - 1.0) > 1e-9)
                    throw InvalidKernel("combo weights must sum to 1");
                return b;
            }
        },
        kernel);

    NormBound nb;
    nb.bound = bound;
    if (reads_before_T && bound <= 1.0 + eps)
        nb.regime = Regime::Windowed;
    else if (bound < 1.0 - eps)
        nb.regime = Regime::Contractive;
    else
        nb.regime = Regime::Inadmissible;
    return nb;
}

/// Quadrature times for integral kernels: grid s-nodes inside [0, theta],
/// with theta appended when it falls between nodes.
inline std::vector<double> quadrature_times(const std::vector<double>& s_nodes, double theta) {
    std::vector<double> ts;
    for (double s : s_nodes)
        if (s <= theta + 1e-15) ts.push_back(std::min(s, theta));
    if (ts.empty() || ts.back() < theta - 1e-15) ts.push_back(theta);
    return ts;
}

/// Every time at which the kernel reads the field (point reads or quadrature
/// nodes), given the s-grid the quadratures are anchored to.
inline std::vector<double> reading_times(const Kernel& kernel, const std::vector<double>& s_nodes) {
    std::vector<double> ts = std::visit(
        [&](const auto& k) -> std::vector<double> {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, PointScaled>) return {k.t1};
            if constexpr (std::is_same_v<K, TwoPoint>) return {k.t1, k.t2};
            if constexpr (std::is_same_v<K, TimeKernel>) return quadrature_times(s_nodes, k.theta);
            if constexpr (std::is_same_v<K, SpaceTimeKernel>)
                return quadrature_times(s_nodes, k.theta);
            if constexpr (std::is_same_v<K, Combo>) {
                std::vector<double> all;
                for (const auto& p : k.parts) {
                    const auto part = reading_times(p, s_nodes);
                    all.insert(all.end(), part.begin(), part.end());
                }
                return all;
            }
        },
        kernel);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

/// Applies Gamma to a solved field; returns values on the field's x-nodes.
/// Point evaluations interpolate in time; integrals use trapezoid quadrature
/// on the grid s-nodes restricted to [0, theta].
inline std::vector<double> apply(const Kernel& kernel, const SolutionField& field) {
    const auto& xs = field.grid.x_nodes;
    const auto& ss = field.grid.s_nodes;
    std::vector<double> out(xs.size(), 0.0);

    auto check_time = [&](double t) {
        if (t < ss.front() - 1e-12 || t > ss.back() + 1e-12)
            throw SupportOutsideGrid("kernel time outside the field grid");
    };

    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, PointScaled>) {
                check_time(k.t1);
                for (std::size_t i = 0; i < xs.size(); ++i)
                    out[i] = k.kappa * field.interpolate(xs[i], k.t1);
            } else if constexpr (std::is_same_v<K, TwoPoint>) {
                check_time(k.t1);
                check_time(k.t2);
                for (std::size_t i = 0; i < xs.size(); ++i)
                    out[i] = k.alpha1 * field.interpolate(xs[i], k.t1) +
                             k.alpha2 * field.interpolate(xs[i], k.t2);
            } else if constexpr (std::is_same_v<K, TimeKernel>) {
                check_time(k.theta);
                const auto ts = quadrature_times(ss, k.theta);
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    double acc = 0.0;
                    for (std::size_t m = 0; m + 1 < ts.size(); ++m) {
                        const double h = ts[m + 1] - ts[m];
                        const double f0 = k.k(ts[m]) * field.interpolate(xs[i], ts[m]);
                        const double f1 = k.k(ts[m + 1]) * field.interpolate(xs[i], ts[m + 1]);
                        acc += 0.5 * h * (f0 + f1);
                    }
                    out[i] = acc;
                }
            } else if constexpr (std::is_same_v<K, SpaceTimeKernel>) {
                check_time(k.theta);
                const auto ts = quadrature_times(ss, k.theta);
                // inner y-trapezoid over the x-nodes themselves
                auto space_integral = [&](double t, double x) {
                    double acc = 0.0;
                    for (std::size_t a = 0; a + 1 < xs.size(); ++a) {
                        const double h = xs[a + 1] - xs[a];
                        const double f0 = k.k(t, xs[a], x) * field.interpolate(xs[a], t);
                        const double f1 = k.k(t, xs[a + 1], x) * field.interpolate(xs[a + 1], t);
                        acc += 0.5 * h * (f0 + f1);
                    }
                    return acc;
                };
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    double acc = 0.0;
                    for (std::size_t m = 0; m + 1 < ts.size(); ++m) {
                        const double h = ts[m + 1] - ts[m];
                        acc += 0.5 * h * (space_integral(ts[m], xs[i]) +
                                          space_integral(ts[m + 1], xs[i]));
                    }
                    out[i] = acc;
                }
            } else if constexpr (std::is_same_v<K, Combo>) {
                for (std::size_t p = 0; p < k.parts.size(); ++p) {
                    const auto part = apply(k.parts[p], field);
                    for (std::size_t i = 0; i < xs.size(); ++i) out[i] += k.weights[p] * part[i];
                }
            }
        },
        kernel);
    return out;
}

inline std::string describe(const Kernel& kernel) {
    return std::visit(
        [](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, PointScaled>)
                return "point-scaled(kappa=" + format_sig(k.kappa, 6) +
                       ",t1=" + format_sig(k.t1, 6) + ")";
            if constexpr (std::is_same_v<K, TwoPoint>)
                return "two-point(a1=" + format_sig(k.alpha1, 6) + ",t1=" + format_sig(k.t1, 6) +
                       ",a2=" + format_sig(k.alpha2, 6) + ",t2=" + format_sig(k.t2, 6) + ")";
            if constexpr (std::is_same_v<K, TimeKernel>)
                return "time-kernel(theta=" + format_sig(k.theta, 6) + ")";
            if constexpr (std::is_same_v<K, SpaceTimeKernel>)
                return "space-time-kernel(theta=" + format_sig(k.theta, 6) + ")";
            if constexpr (std::is_same_v<K, Combo>) return "combo(" + std::to_string(k.parts.size()) + ")";
        },
        kernel);
}

}  // namespace gamma

struct FixedPointReport {
    std::vector<double> phi_star;          ///< solved terminal data on x-nodes
    std::size_t iterations = 0;
    std::vector<double> residual_history;  ///< sup-norm of successive differences
    double contraction_estimate = 0.0;     ///< max ratio of successive residuals
    double noise_floor = 0.0;              ///< 3 * max stderr of the inner solves

    std::string to_csv(const std::string& kernel_desc, int digits = 12) const {
        std::string out;
        out += "# kernel: " + kernel_desc + "\n";
        out += "# contraction_estimate: " + format_sig(contraction_estimate, digits) + "\n";
        out += "iter,residual\n";
        for (std::size_t i = 0; i < residual_history.size(); ++i) {
            out += std::to_string(i + 1) + "," + format_sig(residual_history[i], digits) + "\n";
        }
        return out;
    }
};

struct NonlocalSolution {
    SolutionField field;
    FixedPointReport report;
};

/// Solves u(., T) - Gamma u = xi by Neumann iteration on the terminal data:
///   Phi_0 = xi,  Phi_{m+1} = xi + Gamma L(Phi_m),
/// where L is the Monte Carlo solution operator under one fixed seed, so the
/// discretized map is an exact contraction and the iteration converges below
/// the statistical error of any single solve.
///
/// Requires an admissible kernel and lambda <= 0 (checked on a probe grid).
inline NonlocalSolution solve_nonlocal(const CoefficientSet& coeffs, const Domain& domain,
                                       const TerminalData& xi, const gamma::Kernel& kernel,
                                       const GridSpec& grid, const SimConfig& cfg, double tol,
                                       std::size_t max_iter = 50,
                                       const std::vector<double>* initial_guess = nullptr) {
    const auto nb = gamma::norm_bound(kernel, coeffs.T);
    if (nb.regime == gamma::Regime::Inadmissible)
        throw InvalidKernel("kernel budget " + format_sig(nb.bound, 6) +
                            " inadmissible for its time support");
    for (const auto& x : probe_space_points(domain, 33))
        for (double t : probe_times(coeffs.T, 17))
            if (coeffs.eval_lambda(x, t) > 1e-12)
                throw RateSignViolation("non-local solves require lambda <= 0");
    grid.validate(domain, coeffs.T);

    // Inner solves only need the field at the kernel's reading times; the
    // grid points are simulated independently, so restricting the s-grid gives
    // bit-identical values at those times.
    const auto reads = gamma::reading_times(kernel, grid.s_nodes);
    GridSpec inner = grid;
    inner.s_nodes = reads;
    if (inner.s_nodes.empty() || inner.s_nodes.front() > 0.0)
        inner.s_nodes.insert(inner.s_nodes.begin(), 0.0);
    if (inner.s_nodes.back() < coeffs.T) inner.s_nodes.push_back(coeffs.T);

    // The returned field keeps the requested grid plus the reading times, so
    // applying the kernel to it reproduces the converged iteration exactly.
    GridSpec final_grid = grid;
    final_grid.s_nodes.insert(final_grid.s_nodes.end(), reads.begin(), reads.end());
    std::sort(final_grid.s_nodes.begin(), final_grid.s_nodes.end());
    final_grid.s_nodes.erase(std::unique(final_grid.s_nodes.begin(), final_grid.s_nodes.end()),
                             final_grid.s_nodes.end());

    const std::size_t nx = grid.x_nodes.size();
    std::vector<double> xi_nodes(nx);
    for (std::size_t i = 0; i < nx; ++i) xi_nodes[i] = xi.xi(grid.x_nodes[i]);
    xi_nodes.front() = 0.0;
    xi_nodes.back() = 0.0;

    // Off-node terminal data: xi itself plus the interpolated node correction,
    // so the smooth part of the terminal is never replaced by its interpolant
    // (and a zero kernel reproduces the plain solve bit for bit).
    auto as_terminal = [&, xi_nodes](const std::vector<double>& phi) {
        auto xs = grid.x_nodes;
        std::vector<double> corr(nx);
        for (std::size_t i = 0; i < nx; ++i) corr[i] = phi[i] - xi_nodes[i];
        auto base = xi.xi;
        return TerminalData::make(
            [xs, corr, base](double x) {
                const std::size_t i = locate_cell(xs, x);
                const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
                return base(x) + (1.0 - w) * corr[i] + w * corr[i + 1];
            },
            grid);
    };

    std::vector<double> phi(nx), phi_next(nx);
    phi = xi_nodes;
    if (initial_guess) {
        if (initial_guess->size() != nx)
            throw ConfigError("initial guess size does not match the x-grid");
        phi = *initial_guess;
        phi.front() = 0.0;
        phi.back() = 0.0;
    }

    FixedPointReport report;
    bool converged = false;
    for (std::size_t m = 0; m < max_iter; ++m) {
        const SolutionField inner_field = solve_cauchy(coeffs, domain, as_terminal(phi), inner, cfg);
        double max_err = 0.0;
        for (double e : inner_field.stderrs) max_err = std::max(max_err, e);
        report.noise_floor = std::max(report.noise_floor, 3.0 * max_err);
        if (m == 0 && tol < report.noise_floor)
            throw NoConvergence("tolerance " + format_sig(tol, 6) +
                                " is below the Monte Carlo noise floor " +
                                format_sig(report.noise_floor, 6) +
                                "; raise tol or the path count");

        const auto gphi = gamma::apply(kernel, inner_field);
        double resid = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            phi_next[i] = xi_nodes[i] + gphi[i];
            resid = std::max(resid, std::abs(phi_next[i] - phi[i]));
        }
        report.residual_history.push_back(resid);
        report.iterations = m + 1;
        if (report.residual_history.size() >= 2) {
            const double prev = report.residual_history[report.residual_history.size() - 2];
            if (prev > 0.0)
                report.contraction_estimate = std::max(report.contraction_estimate, resid / prev);
        }
        phi = phi_next;
        if (resid <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NoConvergence("no convergence after " + std::to_string(report.iterations) +
                            " iterations");

    report.phi_star = phi;
    NonlocalSolution sol;
    sol.report = report;
    sol.field = solve_cauchy(coeffs, domain, as_terminal(phi), final_grid, cfg);
    return sol;
}

}  // namespace fkmc
