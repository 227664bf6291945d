#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fkmc/csv.hpp"
#include "fkmc/linalg.hpp"
#include "fkmc/parallel.hpp"
#include "fkmc/rng.hpp"
#include "fkmc/vec.hpp"

using namespace fkmc;

TEST(Vec, BasicOps) {
    Vec a{1.0, 2.0};
    Vec b{3.0, -1.0};
    EXPECT_EQ((a + b), (Vec{4.0, 1.0}));
    EXPECT_DOUBLE_EQ(dot(a, b), 1.0);
    EXPECT_DOUBLE_EQ(a.norm2(), 5.0);
    Mat o = outer(Vec{1.0, 2.0});
    EXPECT_DOUBLE_EQ(o(0, 1), 2.0);
    EXPECT_DOUBLE_EQ(o(1, 1), 4.0);
}

TEST(SymEigen, DiagonalMatrix) {
    const auto eig = sym_eigen(Mat::diag({1.0, 0.25}));
    EXPECT_NEAR(eig.values[0], 0.25, 1e-14);
    EXPECT_NEAR(eig.values[1], 1.0, 1e-14);
}

TEST(SymEigen, KnownEigenvalues) {
    // [[2,1],[1,2]] has eigenvalues 1 and 3
    Mat m(2);
    m(0, 0) = 2.0;
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    m(1, 1) = 2.0;
    const auto eig = sym_eigen(m);
    EXPECT_NEAR(eig.values[0], 1.0, 1e-13);
    EXPECT_NEAR(eig.values[1], 3.0, 1e-13);
}

TEST(SymEigen, RandomReconstruction) {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 1 + gen() % 4;
        Mat m(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = nd(gen);
        const auto eig = sym_eigen(m);
        // V diag(values) V^T == m
        Mat rec(n);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    rec(i, j) += eig.values[k] * eig.vectors(i, k) * eig.vectors(j, k);
        EXPECT_LT((rec - m).max_abs(), 1e-11 * std::max(1.0, m.max_abs()));
    }
}

TEST(SqrtPsd, DiagonalCase) {
    const Mat r = sqrt_psd_clamped(Mat::diag({2.0, 0.5}), 1e-10);
    EXPECT_NEAR(r(0, 0), std::sqrt(2.0), 1e-13);
    EXPECT_NEAR(r(1, 1), std::sqrt(0.5), 1e-13);
    EXPECT_NEAR(r(0, 1), 0.0, 1e-13);
}

TEST(SqrtPsd, ClampsTinyValuesToExactZero) {
    const Mat r = sqrt_psd_clamped(Mat::diag({3e-18}), 1e-10);
    EXPECT_EQ(r(0, 0), 0.0);
}

TEST(SqrtPsd, ReportsNegativeEigenvalue) {
    double min_eig = 0.0;
    sqrt_psd_clamped(Mat::diag({-0.5, 1.0}), 1e-10, &min_eig);
    EXPECT_NEAR(min_eig, -0.5, 1e-13);
}

TEST(Tridiagonal, SolvesKnownSystem) {
    // [[2,1,0],[1,2,1],[0,1,2]] x = [4,8,8] -> x = [1,2,3]
    std::vector<double> lower{1.0, 1.0}, diag{2.0, 2.0, 2.0}, upper{1.0, 1.0};
    std::vector<double> rhs{4.0, 8.0, 8.0}, x;
    ASSERT_TRUE(solve_tridiagonal(lower, diag, upper, rhs, x));
    EXPECT_NEAR(x[0], 1.0, 1e-13);
    EXPECT_NEAR(x[1], 2.0, 1e-13);
    EXPECT_NEAR(x[2], 3.0, 1e-13);
}

TEST(Rng, DeterministicByCounter) {
    rng::PathStream a(42, 7);
    rng::PathStream b(42, 7);
    double za[4], zb[4];
    a.normals(13, za, 4);
    b.normals(13, zb, 4);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(za[i], zb[i]);

    rng::PathStream c(42, 8);
    double zc[4];
    c.normals(13, zc, 4);
    EXPECT_NE(za[0], zc[0]);

    double za2[4];
    a.normals(14, za2, 4);
    EXPECT_NE(za[0], za2[0]);
}

TEST(Rng, NormalMoments) {
    rng::PathStream s(123, 0);
    const std::size_t n = 200000;
    double sum = 0.0, sum_sq = 0.0, sum_cu = 0.0;
    double z[2];
    for (std::size_t step = 0; step < n / 2; ++step) {
        s.normals(static_cast<std::uint32_t>(step), z, 2);
        for (double v : {z[0], z[1]}) {
            sum += v;
            sum_sq += v * v;
            sum_cu += v * v * v;
        }
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    const double skew = sum_cu / n;
    EXPECT_NEAR(mean, 0.0, 0.01);
    EXPECT_NEAR(var, 1.0, 0.02);
    EXPECT_NEAR(skew, 0.0, 0.03);
}

TEST(Rng, UniformsInUnitInterval) {
    rng::PathStream s(9, 1);
    double mn = 1.0, mx = 0.0, sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform(static_cast<std::uint32_t>(i), 0);
        mn = std::min(mn, u);
        mx = std::max(mx, u);
        sum += u;
    }
    EXPECT_GT(mn, 0.0);
    EXPECT_LT(mx, 1.0);
    EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Parallel, MatchesSerialForAnyThreadCount) {
    const std::size_t n = 1000;
    std::vector<double> serial(n), par(n);
    auto work = [](std::size_t k) { return std::sin(static_cast<double>(k)) * 1.5; };
    parallel_for(n, 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) serial[k] = work(k);
    });
    for (unsigned threads : {2u, 3u, 8u}) {
        parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k) par[k] = work(k);
        });
        EXPECT_EQ(par, serial);
    }
}

TEST(Parallel, PropagatesExceptions) {
    EXPECT_THROW(parallel_for(10, 4,
                              [](std::size_t, std::size_t) -> void {
                                  throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(Csv, FormatSigTwelveDigits) {
    EXPECT_EQ(format_sig(1.0), "1");
    EXPECT_EQ(format_sig(0.5), "0.5");
    EXPECT_EQ(format_sig(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(format_sig(-2.5e-7), "-2.5e-07");
}

TEST(Csv, ChecksumStable) {
    EXPECT_EQ(checksum_hex("abc"), checksum_hex("abc"));
    EXPECT_NE(checksum_hex("abc"), checksum_hex("abd"));
}
