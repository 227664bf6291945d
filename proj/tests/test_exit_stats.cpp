#include <gtest/gtest.h>

#include <cmath>

#include "fkmc/exit_stats.hpp"
#include "fkmc/models.hpp"
#include "oracles.hpp"

using namespace fkmc;

namespace {

const Domain kSym = Domain::interval(-1.0, 1.0);

SimConfig cfg_for(std::size_t paths, std::uint64_t seed, bool bridge = true) {
    SimConfig cfg;
    cfg.path_count = paths;
    cfg.step_h = 1e-3;
    cfg.base_seed = seed;
    cfg.threads = 1;
    cfg.bridge_correction = bridge;
    return cfg;
}

CoefficientSet frozen_model(double T) {
    CoefficientSet c;
    c.n = 1;
    c.T = T;
    c.b = [](const Vec&, double) { return Mat::diag({0.0}); };
    c.tilde_beta = {[](const Vec&, double) { return Vec{0.0}; }};
    return c;
}

}  // namespace

TEST(EstimateSurvival, BoundaryStartExitsImmediately) {
    const CoefficientSet c = models::brownian(1.0);
    const auto est = estimate_survival(c, kSym, Vec{1.0}, 0.0, 0.5, cfg_for(500, 1));
    EXPECT_EQ(est.p_hat, 0.0);
    EXPECT_EQ(est.stderr_mean, 0.0);
}

TEST(EstimateSurvival, MatchesSeriesOracle) {
    const CoefficientSet c = models::brownian(1.0);
    const SimConfig cfg = cfg_for(20000, 17);
    for (double theta : {0.25, 0.5, 1.0}) {
        const auto est = estimate_survival(c, kSym, Vec{0.0}, 0.0, theta, cfg);
        const double truth = oracles::brownian_survival(0.0, theta, -1.0, 1.0);
        EXPECT_NEAR(est.p_hat, truth, 3.0 * est.stderr_mean) << "theta " << theta;
        EXPECT_NEAR(est.stderr_mean, std::sqrt(truth * (1 - truth) / cfg.path_count), 5e-4);
    }
}

TEST(EstimateSurvival, ShortHorizonSurvivalNearOne) {
    const CoefficientSet c = models::brownian(1.0);
    const auto est = estimate_survival(c, kSym, Vec{0.0}, 0.0, 1e-4, cfg_for(2000, 3));
    EXPECT_GE(est.p_hat, 0.999);
}

TEST(EstimateSurvival, MonotoneInHorizonUnderSharedIncrements) {
    const CoefficientSet c = models::brownian(1.0);
    const SimConfig cfg = cfg_for(4000, 23);
    double prev = 1.0;
    for (double theta : {0.125, 0.25, 0.5, 1.0}) {  // step-aligned nested horizons
        const double p = estimate_survival(c, kSym, Vec{0.3}, 0.0, theta, cfg).p_hat;
        EXPECT_LE(p, prev);
        prev = p;
    }
}

TEST(BoundaryDecay, SurvivalDropsTowardBoundary) {
    const CoefficientSet c = models::brownian(1.0);
    std::vector<Vec> xs;
    for (int j = 1; j <= 6; ++j) xs.push_back(Vec{1.0 - std::pow(2.0, -j)});
    const auto curve = boundary_decay_curve(c, kSym, 0.0, 0.5, xs, cfg_for(8000, 5));
    ASSERT_EQ(curve.entries.size(), 6u);
    for (std::size_t i = 0; i < curve.entries.size(); ++i) {
        const auto& e = curve.entries[i];
        const double truth = oracles::brownian_survival(e.x[0], 0.5, -1.0, 1.0);
        EXPECT_NEAR(e.p_hat, truth, 3.0 * e.stderr_mean + 2e-3);
        if (i > 0) {
            EXPECT_LE(e.p_hat, curve.entries[i - 1].p_hat +
                                   3.0 * (e.stderr_mean + curve.entries[i - 1].stderr_mean));
        }
    }
    EXPECT_LT(curve.entries.back().p_hat, 0.2);
}

TEST(BoundaryDecay, FrozenDynamicsNeverDecay) {
    // no motion at all: every interior start survives; the curve simply does
    // not decay, which diagnoses a degenerate model rather than failing
    const CoefficientSet c = frozen_model(1.0);
    std::vector<Vec> xs;
    for (int j = 1; j <= 4; ++j) xs.push_back(Vec{1.0 - std::pow(2.0, -j)});
    const auto curve = boundary_decay_curve(c, kSym, 0.0, 0.5, xs, cfg_for(200, 5));
    for (const auto& e : curve.entries) EXPECT_EQ(e.p_hat, 1.0);
}

TEST(EstimateSurvival, UniformBoundOverInteriorGrid) {
    // sup over a 9-point interior grid stays below the series bound at the
    // same horizon (the uniform-in-x survival bound is observable)
    const CoefficientSet c = models::brownian(1.0);
    const SimConfig cfg = cfg_for(4000, 29);
    double nu_hat = 0.0;
    for (int i = 1; i <= 9; ++i)
        nu_hat = std::max(nu_hat, oracles::brownian_survival(-1.0 + 0.2 * i, 0.5, -1.0, 1.0));
    double worst = 0.0, worst_err = 0.0;
    for (int i = 1; i <= 9; ++i) {
        const auto est = estimate_survival(c, kSym, Vec{-1.0 + 0.2 * i}, 0.0, 0.5, cfg);
        if (est.p_hat > worst) {
            worst = est.p_hat;
            worst_err = est.stderr_mean;
        }
    }
    EXPECT_LE(worst, nu_hat + 3.0 * worst_err);
    EXPECT_LT(nu_hat, 1.0);
}

TEST(L1Distance, IdenticalModelsGiveExactZero) {
    const CoefficientSet c = models::brownian(0.5);
    const auto d = exit_time_l1_distance(c, c, kSym, Vec{0.2}, 0.0, cfg_for(2000, 7, false));
    EXPECT_EQ(d.d_hat, 0.0);
    EXPECT_EQ(d.stderr_mean, 0.0);
}

TEST(L1Distance, SymmetricUnderSwap) {
    CoefficientSet a = models::brownian(0.5);
    CoefficientSet b = models::brownian(0.5);
    b.tilde_beta = {[](const Vec&, double) { return Vec{std::sqrt(1.2)}; }};
    b.b = [](const Vec&, double) { return Mat::diag({0.6}); };
    const SimConfig cfg = cfg_for(3000, 11, false);
    const auto ab = exit_time_l1_distance(a, b, kSym, Vec{0.0}, 0.0, cfg);
    const auto ba = exit_time_l1_distance(b, a, kSym, Vec{0.0}, 0.0, cfg);
    EXPECT_EQ(ab.d_hat, ba.d_hat);
    EXPECT_GT(ab.d_hat, 0.0);
}

TEST(L1Distance, ShrinksWithPerturbationSize) {
    const CoefficientSet base = models::brownian(0.5);
    const SimConfig cfg = cfg_for(8000, 13, false);
    double prev = 1e9;
    for (double delta : {0.2, 0.1, 0.05}) {
        CoefficientSet pert = base;
        const double scale = std::sqrt(1.0 + delta);
        pert.b = [delta](const Vec&, double) { return Mat::diag({0.5 * (1.0 + delta)}); };
        pert.tilde_beta = {[scale](const Vec&, double) { return Vec{scale}; }};
        const auto d = exit_time_l1_distance(base, pert, kSym, Vec{0.0}, 0.0, cfg);
        EXPECT_LT(d.d_hat, prev + 3.0 * d.stderr_mean);
        EXPECT_GT(d.d_hat, 0.0);
        prev = d.d_hat;
    }
}

TEST(L1Distance, ShrinksWithStartPerturbation) {
    const CoefficientSet c = models::brownian(0.5);
    const SimConfig cfg = cfg_for(8000, 19, false);
    double prev = 1e9;
    for (double eps : {0.1, 0.05, 0.025}) {
        const auto d =
            exit_time_l1_distance(c, c, kSym, Vec{0.0}, Vec{eps}, 0.0, cfg);
        EXPECT_LT(d.d_hat, prev + 3.0 * d.stderr_mean);
        prev = d.d_hat;
    }
    EXPECT_LT(prev, 0.05);
}

TEST(L1Distance, RejectsMismatchedNoiseDimensions) {
    const CoefficientSet a = models::brownian(0.5);
    CoefficientSet b = models::gbm(0.2, 0.5);  // one Wiener + one completion
    EXPECT_THROW(exit_time_l1_distance(a, b, kSym, Vec{0.0}, 0.0, cfg_for(10, 1)),
                 DimensionMismatch);
}

TEST(SurvivalCurve, CsvSchema) {
    SurvivalCurve curve;
    curve.entries.push_back({Vec{0.5}, 0.25, 0.9, 0.003});
    const std::string csv = curve.to_csv();
    EXPECT_EQ(csv.rfind("x,theta,p_hat,stderr\n", 0), 0u);
    EXPECT_NE(csv.find("0.5,0.25,0.9,0.003"), std::string::npos);
}
