#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fkmc/characteristics.hpp"
#include "fkmc/csv.hpp"
#include "fkmc/solver.hpp"

namespace fkmc {

struct SurvivalEstimate {
    double p_hat = 0.0;  ///< estimated P(tau > s + theta)
    double stderr_mean = 0.0;
};

/// Fraction of simulated paths still inside the domain at s + theta, with
/// binomial standard error. Exit probabilities are the quantity of interest
/// here, so runs typically enable cfg.bridge_correction.
inline SurvivalEstimate estimate_survival(const CoefficientSet& coeffs, const Domain& domain,
                                          const Vec& x, double s, double theta,
                                          const SimConfig& cfg) {
    if (s + theta > coeffs.T + 1e-12) throw ConfigError("survival horizon exceeds terminal time");
    std::vector<unsigned char> survived(cfg.path_count, 0);
    parallel_for(cfg.path_count, cfg.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const PathOutcome p = simulate_path(coeffs, domain, x, s, cfg, k, s + theta);
            survived[k] = p.exited ? 0 : 1;
        }
    });
    std::size_t alive = 0;
    for (unsigned char v : survived) alive += v;
    SurvivalEstimate est;
    const double m = static_cast<double>(cfg.path_count);
    est.p_hat = static_cast<double>(alive) / m;
    est.stderr_mean = std::sqrt(est.p_hat * (1.0 - est.p_hat) / m);
    return est;
}

struct SurvivalCurve {
    struct Entry {
        Vec x;
        double theta = 0.0;
        double p_hat = 0.0;
        double stderr_mean = 0.0;
    };
    std::vector<Entry> entries;

    std::string to_csv(int digits = 12) const {
        std::string out = "x,theta,p_hat,stderr\n";
        for (const auto& e : entries) {
            const double coord = e.x.size() == 1 ? e.x[0] : e.x.norm();
            out += format_sig(coord, digits) + ',' + format_sig(e.theta, digits) + ',' +
                   format_sig(e.p_hat, digits) + ',' + format_sig(e.stderr_mean, digits) + '\n';
        }
        return out;
    }
};

/// Survival probabilities along a sequence of starting points approaching the
/// boundary; callers assert the decay-to-zero trend.
inline SurvivalCurve boundary_decay_curve(const CoefficientSet& coeffs, const Domain& domain,
                                          double s, double theta, const std::vector<Vec>& xs,
                                          const SimConfig& cfg) {
    SurvivalCurve curve;
    for (const auto& x : xs) {
        const auto est = estimate_survival(coeffs, domain, x, s, theta, cfg);
        curve.entries.push_back({x, theta, est.p_hat, est.stderr_mean});
    }
    return curve;
}

struct L1Distance {
    double d_hat = 0.0;  ///< mean |tau_T^a - tau_T^b| under common increments
    double stderr_mean = 0.0;
};

/// Drives both coefficient sets with identical Gaussian increments per path
/// (the per-path coupling that makes exit-time perturbation estimates cheap)
/// and averages |tau_T^a - tau_T^b|. Starting points may differ to probe
/// sensitivity in the initial state.
inline L1Distance exit_time_l1_distance(const CoefficientSet& coeffs_a,
                                        const CoefficientSet& coeffs_b, const Domain& domain,
                                        const Vec& x_a, const Vec& x_b, double s,
                                        const SimConfig& cfg) {
    if (coeffs_a.n != coeffs_b.n || coeffs_a.n_wiener() != coeffs_b.n_wiener() ||
        coeffs_a.n_aux() != coeffs_b.n_aux())
        throw DimensionMismatch("coupled runs need matching noise dimensions");
    if (coeffs_a.T != coeffs_b.T)
        throw DimensionMismatch("coupled runs need matching terminal times");

    std::vector<double> gaps(cfg.path_count);
    parallel_for(cfg.path_count, cfg.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const PathOutcome pa = simulate_path(coeffs_a, domain, x_a, s, cfg, k);
            const PathOutcome pb = simulate_path(coeffs_b, domain, x_b, s, cfg, k);
            gaps[k] = std::abs(pa.tau_T - pb.tau_T);
        }
    });
    detail::Welford acc;
    for (double g : gaps) acc.add(g);
    return {acc.mean, acc.stderr_of_mean()};
}

inline L1Distance exit_time_l1_distance(const CoefficientSet& coeffs_a,
                                        const CoefficientSet& coeffs_b, const Domain& domain,
                                        const Vec& x, double s, const SimConfig& cfg) {
    return exit_time_l1_distance(coeffs_a, coeffs_b, domain, x, x, s, cfg);
}

}  // namespace fkmc
