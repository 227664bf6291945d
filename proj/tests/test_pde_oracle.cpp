#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fkmc/models.hpp"
#include "fkmc/pde_oracle.hpp"
#include "fkmc/solver.hpp"
#include "oracles.hpp"

using namespace fkmc;

namespace {

const Domain kUnit = Domain::interval(0.0, 1.0);
const Domain kBand = Domain::interval(1.0, 2.0);

double max_error_at_start(const SolutionField& f, double T) {
    double err = 0.0;
    for (std::size_t i = 0; i < f.nx(); ++i)
        err = std::max(err, std::abs(f.at(i, 0) -
                                     oracles::heat_eigen_solution(f.grid.x_nodes[i], 0.0, T)));
    return err;
}

}  // namespace

TEST(PdeOracle, ZeroTerminalGivesZeroField) {
    const CoefficientSet c = models::heat(0.5);
    const GridSpec grid = GridSpec::uniform(kUnit, 9, 0.5, 3);
    const TerminalData xi = TerminalData::make([](double) { return 0.0; }, grid);
    const SolutionField u = solve_backward_pde(c, kUnit, xi, {31, 32});
    for (double v : u.values) EXPECT_EQ(v, 0.0);
    for (double e : u.stderrs) EXPECT_EQ(e, 0.0);
}

TEST(PdeOracle, HeatSecondOrderConvergence) {
    const CoefficientSet c = models::heat(0.5);
    const GridSpec grid = GridSpec::uniform(kUnit, 9, 0.5, 3);
    const TerminalData xi =
        TerminalData::make([](double x) { return std::sin(std::numbers::pi * x); }, grid);

    double prev_err = 0.0;
    std::vector<double> errs;
    for (const FDGrid fd : {FDGrid{15, 16}, FDGrid{31, 32}, FDGrid{63, 64}}) {
        const SolutionField u = solve_backward_pde(c, kUnit, xi, fd);
        errs.push_back(max_error_at_start(u, 0.5));
    }
    (void)prev_err;
    const double order1 = std::log2(errs[0] / errs[1]);
    const double order2 = std::log2(errs[1] / errs[2]);
    EXPECT_GE(order1, 1.9);
    EXPECT_GE(order2, 1.9);
    EXPECT_LT(errs[2], 1e-3);
}

TEST(PdeOracle, GbmRichardsonSelfConvergence) {
    const CoefficientSet c = models::gbm(0.2, 1.0);
    const GridSpec grid = GridSpec::uniform(kBand, 17, 1.0, 5);
    const TerminalData xi =
        TerminalData::make([](double x) { return (x - 1.0) * (2.0 - x); }, grid);

    const SolutionField u1 = solve_backward_pde(c, kBand, xi, {63, 64});
    const SolutionField u2 = solve_backward_pde(c, kBand, xi, {127, 128});
    const SolutionField u3 = solve_backward_pde(c, kBand, xi, {255, 256});
    auto diff_on = [&](const SolutionField& a, const SolutionField& b) {
        const FieldComparison cmp = compare_fields(a, b, grid);
        return cmp.max_abs_diff;
    };
    const double d12 = diff_on(u1, u2);
    const double d23 = diff_on(u2, u3);
    EXPECT_GT(d12 / d23, 3.0);  // second order: ratio ~ 4
    EXPECT_LT(d12 / d23, 5.5);
}

TEST(PdeOracle, ImplicitEulerMaxPrinciple) {
    CoefficientSet c = models::heat(0.5, 0.0);
    const GridSpec grid = GridSpec::uniform(kUnit, 9, 0.5, 3);
    const TerminalData xi =
        TerminalData::make([](double x) { return std::sin(std::numbers::pi * x); }, grid);
    FDGrid fd{63, 64, FDScheme::ImplicitEuler};
    const SolutionField u = solve_backward_pde(c, kUnit, xi, fd);
    for (double v : u.values) EXPECT_LE(std::abs(v), xi.sup_norm * (1.0 + 1e-12));
}

TEST(PdeOracle, RejectsDegenerateCoefficient) {
    CoefficientSet c;
    c.n = 1;
    c.T = 1.0;
    c.b = [](const Vec&, double) { return Mat::diag({0.0}); };
    const GridSpec grid = GridSpec::uniform(kUnit, 5, 1.0, 3);
    const TerminalData xi =
        TerminalData::make([](double x) { return x * (1.0 - x); }, grid);
    EXPECT_THROW(solve_backward_pde(c, kUnit, xi, {15, 16}), NotElliptic);
}

TEST(PdeOracle, AdvectionFallbackHalvesStep) {
    // strong drift breaks Crank-Nicolson diagonal dominance; the solve
    // restarts as implicit Euler with twice the step count
    CoefficientSet c = models::heat(0.5);
    c.f = [](const Vec&, double) { return Vec{400.0}; };
    const GridSpec grid = GridSpec::uniform(kUnit, 5, 0.5, 3);
    const TerminalData xi =
        TerminalData::make([](double x) { return x * (1.0 - x); }, grid);
    const FDGrid fd{31, 16};
    const SolutionField u = solve_backward_pde(c, kUnit, xi, fd);
    EXPECT_NEAR(u.meta.step_h, 0.5 / 32.0, 1e-15);
    for (double v : u.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(CompareFields, IdenticalFieldsGiveZeros) {
    const CoefficientSet c = models::heat(0.5);
    const GridSpec grid = GridSpec::uniform(kUnit, 9, 0.5, 3);
    const TerminalData xi =
        TerminalData::make([](double x) { return std::sin(std::numbers::pi * x); }, grid);
    const SolutionField u = solve_backward_pde(c, kUnit, xi, {31, 32});
    const FieldComparison cmp = compare_fields(u, u, grid);
    EXPECT_EQ(cmp.max_abs_diff, 0.0);
    EXPECT_EQ(cmp.rms_diff, 0.0);
    EXPECT_EQ(cmp.max_abs_z, 0.0);
}

TEST(CompareFields, McAgreesWithFdOnHeat) {
    const CoefficientSet c = models::heat(0.5);
    const GridSpec grid = GridSpec::uniform(kUnit, 9, 0.5, 3);
    const TerminalData xi =
        TerminalData::make([](double x) { return std::sin(std::numbers::pi * x); }, grid);
    SimConfig cfg;
    cfg.path_count = 4000;
    cfg.step_h = 1e-3;
    cfg.base_seed = 71;
    cfg.threads = 1;
    cfg.bridge_correction = true;
    const SolutionField mc = solve_cauchy(c, kUnit, xi, grid, cfg);
    const SolutionField fd = solve_backward_pde(c, kUnit, xi, {127, 128});
    const FieldComparison cmp = compare_fields(mc, fd, grid);
    EXPECT_LT(cmp.max_abs_z, 5.0);
    EXPECT_LT(cmp.rms_diff, 0.02);
}

TEST(Resample, OutsideHullRaises) {
    const CoefficientSet c = models::heat(0.5);
    const GridSpec grid = GridSpec::uniform(kUnit, 9, 0.5, 3);
    const TerminalData xi =
        TerminalData::make([](double x) { return std::sin(std::numbers::pi * x); }, grid);
    const SolutionField u = solve_backward_pde(c, kUnit, xi, {15, 16});
    GridSpec wider = grid;
    wider.x_nodes.back() = 1.5;
    EXPECT_THROW(resample(u, wider), GridMismatch);
}
