#pragma once

#include <cmath>

#include "fkmc/coefficients.hpp"
#include "fkmc/domain.hpp"

namespace fkmc {
namespace models {

/// Standard Brownian motion: b = 1/2, no first-order noise, unit completion.
inline CoefficientSet brownian(double T) {
    CoefficientSet c;
    c.n = 1;
    c.T = T;
    c.b = [](const Vec&, double) { return Mat::diag({0.5}); };
    c.f = [](const Vec&, double) { return Vec{0.0}; };
    c.lambda = [](const Vec&, double) { return 0.0; };
    c.tilde_beta = {[](const Vec&, double) { return Vec{1.0}; }};
    return c;
}

/// Heat model (alias of brownian with an optional discount rate).
inline CoefficientSet heat(double T, double lambda_rate = 0.0) {
    CoefficientSet c = brownian(T);
    c.lambda = [lambda_rate](const Vec&, double) { return lambda_rate; };
    return c;
}

/// Fully degenerate log-normal model: b = 1/2 sigma^2 x^2 carried entirely by
/// the first-order loading beta = sigma x, so the completion is zero.
inline CoefficientSet gbm(double sigma, double T) {
    CoefficientSet c;
    c.n = 1;
    c.T = T;
    c.b = [sigma](const Vec& x, double) { return Mat::diag({0.5 * sigma * sigma * x[0] * x[0]}); };
    c.f = [](const Vec&, double) { return Vec{0.0}; };
    c.lambda = [](const Vec&, double) { return 0.0; };
    c.beta = {[sigma](const Vec& x, double) { return Vec{sigma * x[0]}; }};
    c.tilde_beta = {[](const Vec&, double) { return Vec{0.0}; }};
    return c;
}

/// n-dimensional Brownian motion (for spherical layers).
inline CoefficientSet brownian_nd(std::size_t n, double T) {
    CoefficientSet c;
    c.n = n;
    c.T = T;
    c.b = [n](const Vec&, double) {
        Mat m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 0.5;
        return m;
    };
    c.f = [n](const Vec&, double) { return Vec(n); };
    c.lambda = [](const Vec&, double) { return 0.0; };
    for (std::size_t j = 0; j < n; ++j) {
        c.tilde_beta.push_back([n, j](const Vec&, double) {
            Vec e(n);
            e[j] = 1.0;
            return e;
        });
    }
    return c;
}

}  // namespace models
}  // namespace fkmc
