#pragma once

// Closed-form references used by the tests. These are independent of the
// library implementation: eigenfunction series for killed Brownian motion and
// the Dirichlet heat equation on an interval.

#include <cmath>
#include <numbers>

namespace oracles {

/// P(tau > t) for standard Brownian motion on (a, b) started at x, by the
/// Dirichlet eigenfunction series (terms decay like exp(-k^2), a handful
/// suffice at the horizons used in tests).
inline double brownian_survival(double x, double t, double a, double b) {
    const double L = b - a;
    const double z = x - a;
    double sum = 0.0;
    for (int k = 1; k <= 41; k += 2) {
        const double lam = 0.5 * std::pow(k * std::numbers::pi / L, 2);
        sum += (4.0 / (k * std::numbers::pi)) * std::sin(k * std::numbers::pi * z / L) *
               std::exp(-lam * t);
    }
    return sum;
}

/// Solution of u_s + 1/2 u_xx = 0 on (0,1), u(., T) = sin(pi x), zero
/// boundary data: u(x, s) = exp(-pi^2 (T - s) / 2) sin(pi x).
inline double heat_eigen_solution(double x, double s, double T) {
    return std::exp(-0.5 * std::numbers::pi * std::numbers::pi * (T - s)) *
           std::sin(std::numbers::pi * x);
}

/// Same terminal data with a constant discount rate lambda: the path weight
/// exp(-lambda (T - s)) multiplies the heat decay.
inline double heat_eigen_discounted(double x, double s, double T, double lambda) {
    return std::exp(-(0.5 * std::numbers::pi * std::numbers::pi + lambda) * (T - s)) *
           std::sin(std::numbers::pi * x);
}

}  // namespace oracles
