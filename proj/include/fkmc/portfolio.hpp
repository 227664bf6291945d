#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fkmc/csv.hpp"
#include "fkmc/errors.hpp"
#include "fkmc/field.hpp"
#include "fkmc/models.hpp"
#include "fkmc/nonlocal.hpp"
#include "fkmc/rng.hpp"
#include "fkmc/solver.hpp"

namespace fkmc {

/// Double-barrier goal-achieving market: a single stock dS = sigma(t) S dw
/// under the martingale measure (zero rates), barriers s_L < S0 < s_U with
/// target wealths W_L, W_U at the exit, and a terminal identity coupling the
/// final wealth to fee/dividend integrals of the past wealth curve:
///   X(T) = int_0^theta k1 X + E int_0^theta k2 X + zeta(S(T))  on {tau > T}.
struct MarketSpec {
    std::function<double(double)> sigma;  ///< volatility, sigma and 1/sigma bounded
    double S0 = 1.5;
    double s_L = 1.0;
    double s_U = 2.0;
    double W_L = 1.0;
    double W_U = 2.0;
    double T = 1.0;
    double theta = 1.0;  ///< fee window end, in (0, T]
    std::function<double(double)> k1;     ///< pathwise fee rate on [0, theta]
    std::function<double(double)> k2;     ///< expectation-leg fee rate on [0, theta]
    std::function<double(double)> zeta;   ///< terminal wealth target

    double eval_sigma(double t) const { return sigma ? sigma(t) : 0.0; }
    double eval_k1(double t) const { return k1 ? k1(t) : 0.0; }
    double eval_k2(double t) const { return k2 ? k2(t) : 0.0; }
};

/// Affine function ell(x) = c1 x + c0.
struct Affine {
    double c1 = 0.0;
    double c0 = 0.0;
    double operator()(double x) const { return c1 * x + c0; }
};

struct GoalProblem {
    CoefficientSet coeffs;   ///< b = 1/2 sigma^2 x^2, beta = sigma x, zero completion
    Domain domain;           ///< (s_L, s_U)
    Affine ell;              ///< barrier interpolant: ell(s_L)=W_L, ell(s_U)=W_U
    gamma::Kernel kernel;    ///< merged time kernel k1 + k2
    double kappa1 = 0.0;     ///< int_0^theta k1
    double kappa2 = 0.0;     ///< int_0^theta k2
    std::function<double(double)> xi;  ///< zeta + (kappa1+kappa2) ell - ell
};

namespace detail {
inline double trapezoid(const std::function<double(double)>& f, double lo, double hi,
                        std::size_t panels = 2048) {
    if (hi <= lo) return 0.0;
    const double h = (hi - lo) / static_cast<double>(panels);
    double sum = 0.5 * (f(lo) + f(hi));
    for (std::size_t i = 1; i < panels; ++i) sum += f(lo + h * static_cast<double>(i));
    return sum * h;
}
}  // namespace detail

/// Casts the goal-achieving problem as a non-local backward problem on the
/// price band: homogeneous boundary data via the split H = u + ell, terminal
/// data xi = zeta + (kappa1 + kappa2) ell - ell (which vanishes at the
/// barriers by the compatibility condition on zeta), and one merged time
/// kernel (the expectation leg collapses onto the same kernel because the
/// solved field is deterministic here).
inline GoalProblem build_goal_problem(const MarketSpec& market) {
    if (!(0.0 < market.s_L && market.s_L < market.S0 && market.S0 < market.s_U))
        throw ConfigError("market requires 0 < s_L < S0 < s_U");
    if (!(market.theta > 0.0 && market.theta <= market.T))
        throw ConfigError("theta must lie in (0, T]");
    for (double t : probe_times(market.T, 17)) {
        const double sv = market.eval_sigma(t);
        if (!(sv > 1e-12) || !(sv < 1e6)) throw ConfigError("sigma and 1/sigma must be bounded");
    }

    GoalProblem gp;
    gp.domain = Domain::interval(market.s_L, market.s_U);

    auto abs_k = [&](double t) { return std::abs(market.eval_k1(t)) + std::abs(market.eval_k2(t)); };
    const double budget = detail::trapezoid(abs_k, 0.0, market.theta);
    const bool theta_is_T = market.theta > market.T - 1e-12;
    if (budget > 1.0 + 1e-9 || (theta_is_T && budget > 1.0 - 1e-9))
        throw KernelBudgetExceeded("fee kernel budget " + format_sig(budget, 6) +
                                   (theta_is_T ? " must stay strictly below 1 when theta = T"
                                               : " exceeds 1"));

    gp.kappa1 = detail::trapezoid([&](double t) { return market.eval_k1(t); }, 0.0, market.theta);
    gp.kappa2 = detail::trapezoid([&](double t) { return market.eval_k2(t); }, 0.0, market.theta);

    gp.ell.c1 = (market.W_U - market.W_L) / (market.s_U - market.s_L);
    gp.ell.c0 = market.W_L - gp.ell.c1 * market.s_L;

    const double scale = 1.0 - gp.kappa1 - gp.kappa2;
    const double tolerance = 1e-8 * std::max({1.0, std::abs(market.W_L), std::abs(market.W_U)});
    if (std::abs(market.zeta(market.s_L) - scale * market.W_L) > tolerance ||
        std::abs(market.zeta(market.s_U) - scale * market.W_U) > tolerance)
        throw ZetaBoundaryViolation(
            "zeta must equal (1 - kappa1 - kappa2) * W at both barriers");

    CoefficientSet c;
    c.n = 1;
    c.T = market.T;
    auto sig = market.sigma;
    c.b = [sig](const Vec& x, double t) {
        const double s = sig(t);
        return Mat::diag({0.5 * s * s * x[0] * x[0]});
    };
    c.f = [](const Vec&, double) { return Vec{0.0}; };
    c.lambda = [](const Vec&, double) { return 0.0; };
    c.beta = {[sig](const Vec& x, double t) { return Vec{sig(t) * x[0]}; }};
    c.tilde_beta = {[](const Vec&, double) { return Vec{0.0}; }};
    gp.coeffs = c;

    auto k1 = market.k1, k2 = market.k2;
    gp.kernel = gamma::TimeKernel{
        [k1, k2](double t) { return (k1 ? k1(t) : 0.0) + (k2 ? k2(t) : 0.0); }, market.theta};

    auto zeta = market.zeta;
    const Affine ell = gp.ell;
    gp.xi = [zeta, ell, scale](double x) { return zeta(x) - scale * ell(x); };
    return gp;
}

struct HedgeResult {
    SolutionField H;       ///< wealth field u + ell (barrier values W_L, W_U)
    SolutionField delta;   ///< dH/dx by central differences (one-sided at barriers)
    double X0 = 0.0;       ///< H(S0, 0)
    double interp_bound = 0.0;  ///< bilinear interpolation error estimate of H
    FixedPointReport fixed_point;
    GoalProblem problem;
};

/// Solves the non-local problem for u, shifts by ell, and differentiates to
/// get the hedge ratio field.
inline HedgeResult solve_hedge(const MarketSpec& market, const GridSpec& grid,
                               const SimConfig& cfg, double tol, std::size_t max_iter = 50) {
    GoalProblem gp = build_goal_problem(market);
    const TerminalData xi = TerminalData::make(gp.xi, grid);
    NonlocalSolution sol = solve_nonlocal(gp.coeffs, gp.domain, xi, gp.kernel, grid, cfg, tol,
                                          max_iter);

    HedgeResult hr;
    hr.problem = gp;
    hr.fixed_point = sol.report;
    hr.H = sol.field;
    for (std::size_t i = 0; i < hr.H.nx(); ++i) {
        const double lx = gp.ell(hr.H.grid.x_nodes[i]);
        for (std::size_t j = 0; j < hr.H.ns(); ++j) hr.H.at(i, j) += lx;
    }

    hr.delta = hr.H;
    const auto& xs = hr.H.grid.x_nodes;
    for (std::size_t j = 0; j < hr.H.ns(); ++j) {
        for (std::size_t i = 0; i < hr.H.nx(); ++i) {
            double d;
            if (i == 0)
                d = (hr.H.at(1, j) - hr.H.at(0, j)) / (xs[1] - xs[0]);
            else if (i + 1 == hr.H.nx())
                d = (hr.H.at(i, j) - hr.H.at(i - 1, j)) / (xs[i] - xs[i - 1]);
            else
                d = (hr.H.at(i + 1, j) - hr.H.at(i - 1, j)) / (xs[i + 1] - xs[i - 1]);
            hr.delta.at(i, j) = d;
            hr.delta.err_at(i, j) = 0.0;
        }
    }
    hr.X0 = hr.H.interpolate(market.S0, 0.0);
    hr.interp_bound = interpolation_error_bound(hr.H);
    return hr;
}

struct ReplicationReport {
    double X0 = 0.0;
    std::size_t barrier_count = 0;
    double barrier_max_abs = 0.0;   ///< max |X(tau) - W_target| over exited paths
    double barrier_mean_abs = 0.0;
    double barrier_mean_sq = 0.0;   ///< shrinks linearly with the step size
    std::size_t survivor_count = 0;
    double survivor_max_abs = 0.0;  ///< terminal-identity residual, see replicate()
    double survivor_rms = 0.0;
    double fee2_mean = 0.0;         ///< cross-path estimate of E int k2 X dt
    double wealth_terminal_mean = 0.0;
    double wealth_terminal_stderr = 0.0;
    double max_abs_delta = 0.0;
    double mean_turnover = 0.0;     ///< mean over paths of sum |position changes|
    double interp_bound = 0.0;

    struct PathDiag {
        std::uint64_t id = 0;
        bool hit = false;
        double hit_time = 0.0;
        double residual = 0.0;
    };
    std::vector<PathDiag> diagnostics;  ///< filled when keep_diagnostics is set

    std::string to_csv(int digits = 12) const {
        std::string out = "metric,value\n";
        auto row = [&](const char* k, double v) {
            out += k;
            out += ',';
            out += format_sig(v, digits);
            out += '\n';
        };
        row("X0", X0);
        row("barrier_count", static_cast<double>(barrier_count));
        row("barrier_max_abs", barrier_max_abs);
        row("barrier_mean_abs", barrier_mean_abs);
        row("barrier_mean_sq", barrier_mean_sq);
        row("survivor_count", static_cast<double>(survivor_count));
        row("survivor_max_abs", survivor_max_abs);
        row("survivor_rms", survivor_rms);
        row("fee2_mean", fee2_mean);
        row("wealth_terminal_mean", wealth_terminal_mean);
        row("wealth_terminal_stderr", wealth_terminal_stderr);
        row("max_abs_delta", max_abs_delta);
        row("mean_turnover", mean_turnover);
        row("interp_bound", interp_bound);
        return out;
    }

    std::string summary() const {
        std::string s;
        s += "initial wealth X0       = " + format_sig(X0, 8) + "\n";
        s += "barrier hits            = " + std::to_string(barrier_count) +
             " (max |X - W| = " + format_sig(barrier_max_abs, 6) +
             ", mean^2 = " + format_sig(barrier_mean_sq, 6) + ")\n";
        s += "survivors               = " + std::to_string(survivor_count) +
             " (max residual = " + format_sig(survivor_max_abs, 6) +
             ", rms = " + format_sig(survivor_rms, 6) + ")\n";
        s += "E int k2 X dt           = " + format_sig(fee2_mean, 8) + "\n";
        s += "mean terminal wealth    = " + format_sig(wealth_terminal_mean, 8) + " +/- " +
             format_sig(wealth_terminal_stderr, 4) + "\n";
        s += "max |delta|             = " + format_sig(max_abs_delta, 6) +
             ", mean turnover = " + format_sig(mean_turnover, 6) + "\n";
        return s;
    }

    std::string paths_csv(int digits = 12) const {
        std::string out = "path_id,hit,hit_time,residual\n";
        for (const auto& d : diagnostics) {
            out += std::to_string(d.id) + ',' + (d.hit ? "1" : "0") + ',' +
                   format_sig(d.hit_time, digits) + ',' + format_sig(d.residual, digits) + '\n';
        }
        return out;
    }
};

/// Simulates the self-financing strategy gamma(t) = delta(S(t), t) against
/// exact log-normal price steps and reports how well the goal conditions are
/// met: wealth pinning at barrier exits, and on surviving paths the terminal
/// identity with the fee legs applied backward to the solved wealth curve at
/// the realized terminal price,
///   X(T) - int_0^theta k1(t) H(S(T), t) dt - E[int k2 X dt] - zeta(S(T)),
/// where the expectation leg is the cross-path sample mean of the realized
/// k2-integral. Position is liquidated and wealth frozen on the first step
/// outside the band; crossing overshoot is reported, not corrected.
inline ReplicationReport replicate(const MarketSpec& market, const HedgeResult& hedge,
                                   std::size_t path_count, const SimConfig& cfg,
                                   bool keep_diagnostics = false) {
    const auto& H = hedge.H;
    if (H.grid.x_nodes.front() > market.s_L || H.grid.x_nodes.back() < market.s_U ||
        H.grid.s_nodes.back() < market.T)
        throw FieldOutOfRange("hedge field does not cover the band x horizon");

    struct PathRecord {
        double x_terminal = 0.0;   ///< X at T (survivors) or frozen at the hit
        double s_terminal = 0.0;   ///< price at T
        bool hit = false;
        double hit_time = 0.0;
        double barrier_gap = 0.0;  ///< X(tau) - W_target
        double fee1_realized = 0.0;
        double fee2_realized = 0.0;
        double turnover = 0.0;
        double max_delta = 0.0;
    };
    std::vector<PathRecord> recs(path_count);

    const std::size_t n_steps =
        static_cast<std::size_t>(std::ceil(market.T / cfg.step_h - 1e-9));

    parallel_for(path_count, cfg.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            rng::PathStream stream(cfg.base_seed, k);
            PathRecord rec;
            double t = 0.0;
            double S = market.S0;
            double X = hedge.X0;
            double pos = hedge.delta.interpolate(S, 0.0);
            double prev_pos = pos;
            rec.max_delta = std::abs(pos);

            for (std::size_t m = 0; m < n_steps; ++m) {
                const double dt = std::min(cfg.step_h, market.T - t);
                if (t < market.theta) {
                    const double w = std::min(dt, market.theta - t);
                    rec.fee1_realized += market.eval_k1(t) * X * w;
                    rec.fee2_realized += market.eval_k2(t) * X * w;
                }
                double z;
                stream.normals(static_cast<std::uint32_t>(m), &z, 1);
                const double sv = market.eval_sigma(t);
                const double S_next = S * std::exp(-0.5 * sv * sv * dt + sv * std::sqrt(dt) * z);
                X += pos * (S_next - S);
                S = S_next;
                t += dt;
                if (S <= market.s_L || S >= market.s_U) {
                    rec.hit = true;
                    rec.hit_time = t;
                    const double target = S <= market.s_L ? market.W_L : market.W_U;
                    rec.barrier_gap = X - target;
                    break;
                }
                if (t < market.T) {
                    const double new_pos = hedge.delta.interpolate(S, t);
                    rec.turnover += std::abs(new_pos - prev_pos);
                    prev_pos = new_pos;
                    pos = new_pos;
                    rec.max_delta = std::max(rec.max_delta, std::abs(pos));
                }
            }
            rec.x_terminal = X;
            rec.s_terminal = S;
            recs[k] = rec;
        }
    });

    // phase 2: cross-path expectation leg, then residuals
    ReplicationReport rep;
    rep.X0 = hedge.X0;
    rep.interp_bound = hedge.interp_bound;
    double fee2_sum = 0.0;
    for (const auto& r : recs) fee2_sum += r.fee2_realized;
    rep.fee2_mean = path_count ? fee2_sum / static_cast<double>(path_count) : 0.0;

    detail::Welford terminal_wealth;
    const auto k1_times = gamma::quadrature_times(H.grid.s_nodes, market.theta);
    auto fee1_curve = [&](double x_terminal) {
        double acc = 0.0;
        for (std::size_t m = 0; m + 1 < k1_times.size(); ++m) {
            const double h = k1_times[m + 1] - k1_times[m];
            const double f0 = market.eval_k1(k1_times[m]) * H.interpolate(x_terminal, k1_times[m]);
            const double f1 =
                market.eval_k1(k1_times[m + 1]) * H.interpolate(x_terminal, k1_times[m + 1]);
            acc += 0.5 * h * (f0 + f1);
        }
        return acc;
    };

    double sq_sum = 0.0, abs_sum = 0.0, resid_sq = 0.0;
    double turnover_sum = 0.0;
    for (std::size_t k = 0; k < path_count; ++k) {
        const auto& r = recs[k];
        terminal_wealth.add(r.x_terminal);
        turnover_sum += r.turnover;
        rep.max_abs_delta = std::max(rep.max_abs_delta, r.max_delta);
        double residual = 0.0;
        if (r.hit) {
            ++rep.barrier_count;
            residual = r.barrier_gap;
            rep.barrier_max_abs = std::max(rep.barrier_max_abs, std::abs(residual));
            abs_sum += std::abs(residual);
            sq_sum += residual * residual;
        } else {
            ++rep.survivor_count;
            residual = r.x_terminal - fee1_curve(r.s_terminal) - rep.fee2_mean -
                       market.zeta(r.s_terminal);
            rep.survivor_max_abs = std::max(rep.survivor_max_abs, std::abs(residual));
            resid_sq += residual * residual;
        }
        if (keep_diagnostics)
            rep.diagnostics.push_back({k, r.hit, r.hit ? r.hit_time : market.T, residual});
    }
    if (rep.barrier_count) {
        rep.barrier_mean_abs = abs_sum / static_cast<double>(rep.barrier_count);
        rep.barrier_mean_sq = sq_sum / static_cast<double>(rep.barrier_count);
    }
    if (rep.survivor_count)
        rep.survivor_rms = std::sqrt(resid_sq / static_cast<double>(rep.survivor_count));
    rep.wealth_terminal_mean = terminal_wealth.mean;
    rep.wealth_terminal_stderr = terminal_wealth.stderr_of_mean();
    rep.mean_turnover = path_count ? turnover_sum / static_cast<double>(path_count) : 0.0;
    return rep;
}

}  // namespace fkmc
