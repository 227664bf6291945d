#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "fkmc/domain.hpp"
#include "fkmc/errors.hpp"

namespace fkmc {

/// Space-time evaluation grid for one-dimensional solution fields.
/// x_nodes include both domain endpoints; s_nodes include 0 and T.
struct GridSpec {
    std::vector<double> x_nodes;
    std::vector<double> s_nodes;

    static GridSpec uniform(const Domain& domain, std::size_t nx, double T, std::size_t ns) {
        if (domain.kind != DomainKind::Interval)
            throw ConfigError("solution grids are defined on interval domains");
        if (nx < 2 || ns < 2) throw ConfigError("grid needs at least 2 nodes per axis");
        GridSpec g;
        g.x_nodes.reserve(nx);
        for (std::size_t i = 0; i < nx; ++i)
            g.x_nodes.push_back(domain.r1 + (domain.r2 - domain.r1) * i / (nx - 1.0));
        g.x_nodes.front() = domain.r1;
        g.x_nodes.back() = domain.r2;
        g.s_nodes.reserve(ns);
        for (std::size_t j = 0; j < ns; ++j) g.s_nodes.push_back(T * j / (ns - 1.0));
        g.s_nodes.front() = 0.0;
        g.s_nodes.back() = T;
        return g;
    }

    void validate(const Domain& domain, double T) const {
        if (x_nodes.size() < 2 || s_nodes.size() < 2)
            throw ConfigError("grid needs at least 2 nodes per axis");
        if (!std::is_sorted(x_nodes.begin(), x_nodes.end()) ||
            std::adjacent_find(x_nodes.begin(), x_nodes.end()) != x_nodes.end())
            throw ConfigError("x_nodes must be strictly increasing");
        if (!std::is_sorted(s_nodes.begin(), s_nodes.end()) ||
            std::adjacent_find(s_nodes.begin(), s_nodes.end()) != s_nodes.end())
            throw ConfigError("s_nodes must be strictly increasing");
        if (x_nodes.front() != domain.r1 || x_nodes.back() != domain.r2)
            throw ConfigError("x_nodes must include both boundary points");
        if (s_nodes.front() != 0.0 || s_nodes.back() != T)
            throw ConfigError("s_nodes must include 0 and T");
    }
};

/// Index of the cell [nodes[i], nodes[i+1]] containing v (clamped to range).
inline std::size_t locate_cell(const std::vector<double>& nodes, double v) {
    if (v <= nodes.front()) return 0;
    if (v >= nodes.back()) return nodes.size() - 2;
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
    return static_cast<std::size_t>(it - nodes.begin()) - 1;
}

}  // namespace fkmc
