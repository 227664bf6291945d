#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fkmc/csv.hpp"
#include "fkmc/errors.hpp"
#include "fkmc/grid.hpp"

namespace fkmc {

/// Terminal data xi for the backward problem. Must vanish on the boundary.
struct TerminalData {
    std::function<double(double)> xi;
    double sup_norm = 0.0;  ///< sup over the evaluation grid, filled by make()

    static TerminalData make(std::function<double(double)> fn, const GridSpec& grid,
                             double tolerance = 1e-8) {
        TerminalData td;
        td.xi = std::move(fn);
        double sup = 0.0;
        for (double x : grid.x_nodes) sup = std::max(sup, std::abs(td.xi(x)));
        td.sup_norm = sup;
        const double tol = tolerance * std::max(1.0, sup);
        if (std::abs(td.xi(grid.x_nodes.front())) > tol ||
            std::abs(td.xi(grid.x_nodes.back())) > tol)
            throw InvalidTerminal("terminal data does not vanish on the boundary");
        return td;
    }
};

/// u sampled on a space-time grid with Monte Carlo standard errors.
struct SolutionField {
    GridSpec grid;
    std::vector<double> values;  ///< row major: values[i * ns + j] at (x_i, s_j)
    std::vector<double> stderrs;

    struct Meta {
        std::size_t paths = 0;
        std::uint64_t base_seed = 0;
        double step_h = 0.0;
        double c_lambda = 1.0;  ///< exp(T sup max(0, lambda))
    } meta;

    std::size_t nx() const { return grid.x_nodes.size(); }
    std::size_t ns() const { return grid.s_nodes.size(); }
    double& at(std::size_t i, std::size_t j) { return values[i * ns() + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * ns() + j]; }
    double& err_at(std::size_t i, std::size_t j) { return stderrs[i * ns() + j]; }
    double err_at(std::size_t i, std::size_t j) const { return stderrs[i * ns() + j]; }

    void allocate() {
        values.assign(nx() * ns(), 0.0);
        stderrs.assign(nx() * ns(), 0.0);
    }

    bool covers(double x, double s) const {
        return x >= grid.x_nodes.front() - 1e-12 && x <= grid.x_nodes.back() + 1e-12 &&
               s >= grid.s_nodes.front() - 1e-12 && s <= grid.s_nodes.back() + 1e-12;
    }

    /// Bilinear interpolation in (x, s).
    double interpolate(double x, double s) const {
        if (!covers(x, s)) throw InterpolationOutOfRange("point outside field hull");
        return interp_raw(values, x, s);
    }
    double interpolate_stderr(double x, double s) const {
        if (!covers(x, s)) throw InterpolationOutOfRange("point outside field hull");
        return interp_raw(stderrs, x, s);
    }

    /// header `x,s,u,stderr`, one row per grid node, 12 significant digits
    std::string to_csv(int digits = 12) const {
        std::string out = "x,s,u,stderr\n";
        for (std::size_t i = 0; i < nx(); ++i) {
            for (std::size_t j = 0; j < ns(); ++j) {
                out += format_sig(grid.x_nodes[i], digits);
                out += ',';
                out += format_sig(grid.s_nodes[j], digits);
                out += ',';
                out += format_sig(at(i, j), digits);
                out += ',';
                out += format_sig(err_at(i, j), digits);
                out += '\n';
            }
        }
        return out;
    }

private:
    double interp_raw(const std::vector<double>& data, double x, double s) const {
        const std::size_t i = locate_cell(grid.x_nodes, x);
        const std::size_t j = locate_cell(grid.s_nodes, s);
        const double x0 = grid.x_nodes[i], x1 = grid.x_nodes[i + 1];
        const double s0 = grid.s_nodes[j], s1 = grid.s_nodes[j + 1];
        const double wx = x1 == x0 ? 0.0 : std::clamp((x - x0) / (x1 - x0), 0.0, 1.0);
        const double ws = s1 == s0 ? 0.0 : std::clamp((s - s0) / (s1 - s0), 0.0, 1.0);
        const double v00 = data[i * ns() + j], v01 = data[i * ns() + j + 1];
        const double v10 = data[(i + 1) * ns() + j], v11 = data[(i + 1) * ns() + j + 1];
        return (1 - wx) * ((1 - ws) * v00 + ws * v01) + wx * ((1 - ws) * v10 + ws * v11);
    }
};

/// Resamples a field onto another grid by bilinear interpolation.
inline SolutionField resample(const SolutionField& f, const GridSpec& grid) {
    for (double x : grid.x_nodes)
        if (x < f.grid.x_nodes.front() - 1e-12 || x > f.grid.x_nodes.back() + 1e-12)
            throw GridMismatch("resample target x outside source hull");
    for (double s : grid.s_nodes)
        if (s < f.grid.s_nodes.front() - 1e-12 || s > f.grid.s_nodes.back() + 1e-12)
            throw GridMismatch("resample target s outside source hull");
    SolutionField out;
    out.grid = grid;
    out.meta = f.meta;
    out.allocate();
    for (std::size_t i = 0; i < out.nx(); ++i) {
        for (std::size_t j = 0; j < out.ns(); ++j) {
            out.at(i, j) = f.interpolate(grid.x_nodes[i], grid.s_nodes[j]);
            out.err_at(i, j) = f.interpolate_stderr(grid.x_nodes[i], grid.s_nodes[j]);
        }
    }
    return out;
}

/// Crude bilinear interpolation error bound from second differences:
/// max |d2u/dx2| dx^2 / 8 + max |d2u/ds2| ds^2 / 8, estimated on the grid.
inline double interpolation_error_bound(const SolutionField& f) {
    double bx = 0.0, bs = 0.0;
    for (std::size_t i = 0; i + 2 < f.nx(); ++i)
        for (std::size_t j = 0; j < f.ns(); ++j)
            bx = std::max(bx, std::abs(f.at(i, j) - 2.0 * f.at(i + 1, j) + f.at(i + 2, j)));
    for (std::size_t i = 0; i < f.nx(); ++i)
        for (std::size_t j = 0; j + 2 < f.ns(); ++j)
            bs = std::max(bs, std::abs(f.at(i, j) - 2.0 * f.at(i, j + 1) + f.at(i, j + 2)));
    return bx / 8.0 + bs / 8.0;
}

}  // namespace fkmc
