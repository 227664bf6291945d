#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "fkmc/errors.hpp"
#include "fkmc/vec.hpp"

namespace fkmc {

/// Eigendecomposition of a small symmetric matrix by cyclic Jacobi sweeps.
/// Returns {eigenvalues (ascending), eigenvectors as columns of V}.
struct SymEigen {
    Vec values;
    Mat vectors;
};

inline SymEigen sym_eigen(Mat m) {
    const std::size_t n = m.size();
    Mat v = Mat::identity(n);
    if (n == 0) return {Vec(0), v};

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
        if (off < 1e-300) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    Vec values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = m(i, i);

    // sort ascending, permuting eigenvector columns alongside
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t lo = i;
        for (std::size_t j = i + 1; j < n; ++j)
            if (values[j] < values[lo]) lo = j;
        if (lo != i) {
            std::swap(values.a[i], values.a[lo]);
            for (std::size_t k = 0; k < n; ++k) {
                const double tmp = v(k, i);
                v(k, i) = v(k, lo);
                v(k, lo) = tmp;
            }
        }
    }
    return {values, v};
}

inline double smallest_eigenvalue(const Mat& m) {
    return sym_eigen(m).values[0];
}

/// Symmetric PSD square root with eigenvalues clamped at zero.
///
/// Eigenvalues in [-tol, tol] collapse to exactly zero, where
/// tol = rel_tol * max(lambda_max, 1); anything below -tol is reported
/// through the out-parameter so callers can reject the matrix.
inline Mat sqrt_psd_clamped(const Mat& m, double rel_tol, double* min_eigenvalue = nullptr) {
    const auto eig = sym_eigen(m);
    const std::size_t n = m.size();
    const double lam_max = n ? eig.values[n - 1] : 0.0;
    const double tol = rel_tol * std::max(lam_max, 1.0);
    if (min_eigenvalue) *min_eigenvalue = n ? eig.values[0] : 0.0;

    Mat r(n);
    for (std::size_t k = 0; k < n; ++k) {
        double lam = eig.values[k];
        if (std::abs(lam) <= tol) lam = 0.0;
        if (lam < 0.0) lam = 0.0;  // caller decides whether sub-tolerance negativity is fatal
        const double s = std::sqrt(lam);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) r(i, j) += s * eig.vectors(i, k) * eig.vectors(j, k);
    }
    return r;
}

/// Solves a tridiagonal system in place (Thomas algorithm).
/// lower/upper have length n-1. Returns false on a vanishing pivot.
inline bool solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                              std::vector<double>& upper, std::vector<double>& rhs,
                              std::vector<double>& out) {
    const std::size_t n = diag.size();
    out.resize(n);
    if (n == 0) return true;
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(diag[i - 1]) < 1e-300) return false;
        const double w = lower[i - 1] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if (std::abs(diag[n - 1]) < 1e-300) return false;
    out[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        out[i] = (rhs[i] - upper[i] * out[i + 1]) / diag[i];
    }
    return true;
}

}  // namespace fkmc
