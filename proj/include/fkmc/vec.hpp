#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>

namespace fkmc {

/// Maximum state dimension supported by the simulation kernels.
/// Keeps per-step state on the stack; the problems of interest are
/// intervals (n = 1) and low-dimensional spherical layers.
inline constexpr std::size_t kMaxDim = 8;

/// Fixed-capacity vector with value semantics.
struct Vec {
    std::array<double, kMaxDim> a{};
    std::size_t n = 0;

    Vec() = default;
    explicit Vec(std::size_t dim, double fill = 0.0) : n(dim) {
        assert(dim <= kMaxDim);
        a.fill(0.0);
        for (std::size_t i = 0; i < n; ++i) a[i] = fill;
    }
    Vec(std::initializer_list<double> xs) : n(xs.size()) {
        assert(xs.size() <= kMaxDim);
        a.fill(0.0);
        std::size_t i = 0;
        for (double v : xs) a[i++] = v;
    }

    double& operator[](std::size_t i) { return a[i]; }
    double operator[](std::size_t i) const { return a[i]; }
    std::size_t size() const { return n; }

    double norm2() const {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
        return s;
    }
    double norm() const { return std::sqrt(norm2()); }

    Vec& operator+=(const Vec& o) {
        for (std::size_t i = 0; i < n; ++i) a[i] += o.a[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (std::size_t i = 0; i < n; ++i) a[i] -= o.a[i];
        return *this;
    }
    Vec& operator*=(double c) {
        for (std::size_t i = 0; i < n; ++i) a[i] *= c;
        return *this;
    }
    friend Vec operator+(Vec x, const Vec& y) { return x += y; }
    friend Vec operator-(Vec x, const Vec& y) { return x -= y; }
    friend Vec operator*(double c, Vec x) { return x *= c; }
    friend bool operator==(const Vec& x, const Vec& y) {
        if (x.n != y.n) return false;
        for (std::size_t i = 0; i < x.n; ++i)
            if (x.a[i] != y.a[i]) return false;
        return true;
    }
};

inline double dot(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) s += x[i] * y[i];
    return s;
}

/// Fixed-capacity square matrix, row major.
struct Mat {
    std::array<double, kMaxDim * kMaxDim> a{};
    std::size_t n = 0;

    Mat() = default;
    explicit Mat(std::size_t dim, double fill = 0.0) : n(dim) {
        assert(dim <= kMaxDim);
        a.fill(0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) (*this)(i, j) = fill;
    }
    static Mat identity(std::size_t dim) {
        Mat m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat diag(std::initializer_list<double> d) {
        Mat m(d.size());
        std::size_t i = 0;
        for (double v : d) {
            m(i, i) = v;
            ++i;
        }
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return a[i * kMaxDim + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * kMaxDim + j]; }
    std::size_t size() const { return n; }

    Mat& operator+=(const Mat& o) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) (*this)(i, j) += o(i, j);
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) (*this)(i, j) -= o(i, j);
        return *this;
    }
    Mat& operator*=(double c) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) (*this)(i, j) *= c;
        return *this;
    }
    friend Mat operator+(Mat x, const Mat& y) { return x += y; }
    friend Mat operator-(Mat x, const Mat& y) { return x -= y; }
    friend Mat operator*(double c, Mat x) { return x *= c; }

    bool symmetric(double tol = 1e-12) const {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
        return true;
    }
    double max_abs() const {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m = std::max(m, std::abs((*this)(i, j)));
        return m;
    }
};

/// x x^T
inline Mat outer(const Vec& x) {
    Mat m(x.n);
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < x.n; ++j) m(i, j) = x[i] * x[j];
    return m;
}

inline Vec matvec(const Mat& m, const Vec& x) {
    Vec y(m.n);
    for (std::size_t i = 0; i < m.n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.n; ++j) s += m(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

/// Scalar-valued field of (x, t).
using ScalarFn = std::function<double(const Vec&, double)>;
/// Vector-valued field of (x, t).
using VecFn = std::function<Vec(const Vec&, double)>;
/// Matrix-valued field of (x, t).
using MatFn = std::function<Mat(const Vec&, double)>;

}  // namespace fkmc
