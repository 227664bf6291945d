#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fkmc/characteristics.hpp"
#include "fkmc/models.hpp"
#include "oracles.hpp"

using namespace fkmc;

namespace {

SimConfig quick_cfg(std::size_t paths, double h = 1e-3, std::uint64_t seed = 11) {
    SimConfig cfg;
    cfg.path_count = paths;
    cfg.step_h = h;
    cfg.base_seed = seed;
    cfg.threads = 1;
    return cfg;
}

}  // namespace

TEST(SimulatePath, ZeroRateGivesUnitDiscount) {
    const Domain d = Domain::interval(-1.0, 1.0);
    const CoefficientSet c = models::brownian(1.0);
    const auto p = simulate_path(c, d, Vec{0.0}, 0.0, quick_cfg(1), 0);
    EXPECT_EQ(p.discount, 1.0);
}

TEST(SimulatePath, FrozenDynamicsNeverExit) {
    const Domain d = Domain::interval(0.0, 1.0);
    CoefficientSet c;
    c.n = 1;
    c.T = 1.0;
    c.b = [](const Vec&, double) { return Mat::diag({0.0}); };
    c.tilde_beta = {[](const Vec&, double) { return Vec{0.0}; }};
    const auto p = simulate_path(c, d, Vec{0.3}, 0.0, quick_cfg(1), 5);
    EXPECT_FALSE(p.exited);
    EXPECT_DOUBLE_EQ(p.tau_T, 1.0);
    EXPECT_DOUBLE_EQ(p.y_exit[0], 0.3);
}

TEST(SimulatePath, StartOnBoundaryExitsImmediately) {
    const Domain d = Domain::interval(-1.0, 1.0);
    const CoefficientSet c = models::brownian(1.0);
    const auto p = simulate_path(c, d, Vec{1.0}, 0.25, quick_cfg(1), 0);
    EXPECT_TRUE(p.exited);
    EXPECT_DOUBLE_EQ(p.tau_T, 0.25);
    EXPECT_DOUBLE_EQ(p.y_exit[0], 1.0);
}

TEST(SimulatePath, ExitStateSnapsToBoundary) {
    const Domain d = Domain::interval(-1.0, 1.0);
    const CoefficientSet c = models::brownian(1.0);
    SimConfig cfg = quick_cfg(1, 1e-2);
    int exits = 0;
    for (std::uint64_t k = 0; k < 200; ++k) {
        const auto p = simulate_path(c, d, Vec{0.9}, 0.0, cfg, k);
        if (p.exited) {
            ++exits;
            EXPECT_EQ(d.distance_to_boundary(p.y_exit), 0.0);
            EXPECT_TRUE(p.y_exit[0] == -1.0 || p.y_exit[0] == 1.0);
        }
    }
    EXPECT_GT(exits, 100);
}

TEST(SimulatePath, DiscountRespectsRateBounds) {
    const Domain d = Domain::interval(-1.0, 1.0);
    const CoefficientSet c = models::heat(1.0, -1.0);  // negative rate: growth
    for (std::uint64_t k = 0; k < 50; ++k) {
        const auto p = simulate_path(c, d, Vec{0.0}, 0.0, quick_cfg(1), k);
        EXPECT_LE(p.discount, std::exp(p.tau_T) * (1.0 + 1e-12));
        EXPECT_GE(p.discount, 1.0 - 1e-12);
    }
}

TEST(SimulatePath, ObservedStatesStayInsideUntilExit) {
    const Domain d = Domain::interval(-1.0, 1.0);
    const CoefficientSet c = models::brownian(1.0);
    const SimConfig cfg = quick_cfg(1, 5e-3);
    for (std::uint64_t k = 0; k < 100; ++k) {
        std::vector<Vec> states;
        const auto p = simulate_path(c, d, Vec{0.5}, 0.0, cfg, k, -1.0, 0,
                                     [&](double, const Vec& y) { states.push_back(y); });
        for (const auto& y : states) EXPECT_TRUE(d.contains(y));
        if (p.exited) {
            EXPECT_EQ(d.distance_to_boundary(p.y_exit), 0.0);
        }
        EXPECT_GE(p.tau_T, 0.0);
        EXPECT_LE(p.tau_T, c.T + 1e-12);
    }
}

TEST(SimulatePath, CheckpointRestartReproducesDiscount) {
    const Domain d = Domain::interval(-4.0, 4.0);  // wide: exits are irrelevant
    CoefficientSet c = models::heat(1.0, 0.0);
    c.lambda = [](const Vec& x, double) { return 0.5 + 0.2 * x[0] * x[0]; };
    const SimConfig cfg = quick_cfg(1, 1e-2, 77);

    for (std::uint64_t k = 0; k < 20; ++k) {
        const auto full = simulate_path(c, d, Vec{0.0}, 0.0, cfg, k);
        ASSERT_FALSE(full.exited);

        const double t_mid = 0.5;  // 50 whole steps
        const auto first = simulate_path(c, d, Vec{0.0}, 0.0, cfg, k, t_mid);
        const auto second = simulate_path(c, d, first.y_exit, t_mid, cfg, k, -1.0,
                                          /*step_offset=*/50);
        // the restart consumes the same increments; only the trimmed final
        // step can differ by rounding of the accumulated clock
        EXPECT_NEAR(second.y_exit[0], full.y_exit[0], 1e-10);
        EXPECT_NEAR(first.discount * second.discount, full.discount,
                    1e-12 * full.discount);
    }
}

TEST(SimulateBatch, SingletonMatchesSimulatePath) {
    const Domain d = Domain::interval(-1.0, 1.0);
    const CoefficientSet c = models::brownian(1.0);
    SimConfig cfg = quick_cfg(1);
    const auto batch = simulate_batch(c, d, Vec{0.2}, 0.0, cfg);
    const auto single = simulate_path(c, d, Vec{0.2}, 0.0, cfg, 0);
    ASSERT_EQ(batch.size(), 1u);
    EXPECT_EQ(batch[0].tau_T, single.tau_T);
    EXPECT_EQ(batch[0].discount, single.discount);
    EXPECT_EQ(batch[0].y_exit[0], single.y_exit[0]);
}

TEST(SimulateBatch, DeterministicAcrossRunsAndThreads) {
    const Domain d = Domain::interval(-1.0, 1.0);
    const CoefficientSet c = models::brownian(1.0);
    SimConfig cfg = quick_cfg(500, 2e-3, 999);
    const auto a = simulate_batch(c, d, Vec{0.1}, 0.0, cfg);
    const auto b = simulate_batch(c, d, Vec{0.1}, 0.0, cfg);
    SimConfig cfg8 = cfg;
    cfg8.threads = 8;
    const auto c8 = simulate_batch(c, d, Vec{0.1}, 0.0, cfg8);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].tau_T, b[k].tau_T);
        EXPECT_EQ(a[k].tau_T, c8[k].tau_T);
        EXPECT_EQ(a[k].y_exit[0], c8[k].y_exit[0]);
        EXPECT_EQ(a[k].discount, c8[k].discount);
    }
}

TEST(SimulatePath, EscapeBoundRaisesBlowup) {
    const Domain d = Domain::interval(-1.0, 1.0);
    CoefficientSet c;
    c.n = 1;
    c.T = 1.0;
    c.b = [](const Vec&, double) { return Mat::diag({0.0}); };
    c.f = [](const Vec& x, double) { return Vec{1e12 * (1.0 + x[0] * x[0])}; };
    c.tilde_beta = {[](const Vec&, double) { return Vec{0.0}; }};
    SimConfig cfg = quick_cfg(1);
    cfg.escape_bound = 1e6;
    // the huge drift shoots past both the boundary and the escape bound in one step
    EXPECT_THROW(simulate_path(c, d, Vec{0.0}, 0.0, cfg, 0), NumericalBlowup);
}

TEST(Survival, MatchesEigenfunctionSeries) {
    // frozen oracle values for (-1,1) started at 0
    EXPECT_NEAR(oracles::brownian_survival(0.0, 1.0, -1.0, 1.0), 0.37082, 5e-5);
    EXPECT_NEAR(oracles::brownian_survival(0.0, 0.5, -1.0, 1.0), 0.68549, 5e-5);
    EXPECT_NEAR(oracles::brownian_survival(0.0, 0.25, -1.0, 1.0), 0.90898, 5e-5);

    const Domain d = Domain::interval(-1.0, 1.0);
    const CoefficientSet c = models::brownian(1.0);
    SimConfig cfg = quick_cfg(20000, 1e-3, 4242);
    cfg.bridge_correction = true;  // killing probabilities need the crossing test
    for (double theta : {0.25, 0.5, 1.0}) {
        std::size_t alive = 0;
        for (std::uint64_t k = 0; k < cfg.path_count; ++k)
            if (!simulate_path(c, d, Vec{0.0}, 0.0, cfg, k, theta).exited) ++alive;
        const double p_hat = static_cast<double>(alive) / cfg.path_count;
        const double truth = oracles::brownian_survival(0.0, theta, -1.0, 1.0);
        const double se = std::sqrt(truth * (1.0 - truth) / cfg.path_count);
        EXPECT_NEAR(p_hat, truth, 3.0 * se) << "theta = " << theta;
    }
}

TEST(Survival, BridgeCorrectionRemovesDiscreteBias) {
    // without the crossing test the discrete scheme overestimates survival by
    // O(sqrt(h)); with it the estimate drops toward the series value
    const Domain d = Domain::interval(-1.0, 1.0);
    const CoefficientSet c = models::brownian(1.0);
    SimConfig plain = quick_cfg(20000, 4e-3, 7);
    SimConfig bridged = plain;
    bridged.bridge_correction = true;

    auto survival = [&](const SimConfig& cfg) {
        std::size_t alive = 0;
        for (std::uint64_t k = 0; k < cfg.path_count; ++k)
            if (!simulate_path(c, d, Vec{0.0}, 0.0, cfg, k, 1.0).exited) ++alive;
        return static_cast<double>(alive) / cfg.path_count;
    };
    const double truth = oracles::brownian_survival(0.0, 1.0, -1.0, 1.0);
    const double p_plain = survival(plain);
    const double p_bridge = survival(bridged);
    EXPECT_GT(p_plain, truth + 0.01);  // visible discretization bias at h = 4e-3
    EXPECT_LT(std::abs(p_bridge - truth), std::abs(p_plain - truth));
    EXPECT_NEAR(p_bridge, truth, 0.015);
}

TEST(Survival, WeakConvergenceUnderStepRefinement) {
    // double-barrier survival bias shrinks under step refinement (monitored
    // trend, not a sharp order assertion)
    const Domain d = Domain::interval(-1.0, 1.0);
    const CoefficientSet c = models::brownian(1.0);
    const double truth = oracles::brownian_survival(0.0, 0.5, -1.0, 1.0);
    auto bias = [&](double h) {
        SimConfig cfg = quick_cfg(40000, h, 31);
        std::size_t alive = 0;
        for (std::uint64_t k = 0; k < cfg.path_count; ++k)
            if (!simulate_path(c, d, Vec{0.0}, 0.0, cfg, k, 0.5).exited) ++alive;
        return static_cast<double>(alive) / cfg.path_count - truth;
    };
    const double coarse = bias(8e-3);
    const double fine = bias(2e-3);
    ::testing::Test::RecordProperty("bias_coarse", coarse);
    ::testing::Test::RecordProperty("bias_fine", fine);
    EXPECT_GT(coarse, 0.0);
    EXPECT_LT(std::abs(fine), std::abs(coarse));
}

TEST(SimulatePath, SphericalLayerExit) {
    const Domain d = Domain::spherical_layer(1.0, 2.0, 2);
    const CoefficientSet c = models::brownian_nd(2, 2.0);
    const SimConfig cfg = quick_cfg(1, 1e-3, 3);
    int exits = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        const auto p = simulate_path(c, d, Vec{1.5, 0.0}, 0.0, cfg, k);
        if (p.exited) {
            ++exits;
            const double r = p.y_exit.norm();
            EXPECT_TRUE(std::abs(r - 1.0) < 1e-9 || std::abs(r - 2.0) < 1e-9);
        }
    }
    EXPECT_GT(exits, 60);
}
