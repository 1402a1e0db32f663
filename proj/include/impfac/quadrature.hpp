#pragma once

#include <cstddef>
#include <vector>

#include "impfac/core.hpp"

namespace impfac {

// Composite Gauss-Legendre rule: `order` nodes per panel,
// `panels_per_interval` panels on each inter-impulse interval. Exact for
// polynomials of degree <= 2*order-1 on every panel.
struct QuadratureRule {
    int order = 20;
    int panels_per_interval = 1;

    std::size_t nodes_per_interval() const {
        return static_cast<std::size_t>(order) * static_cast<std::size_t>(panels_per_interval);
    }
    void validate() const;
};

// Nodes and weights on [-1, 1].
void gauss_legendre(int order, Vec& nodes, Vec& weights);

// Shared node grid over one time interval [a, b]: ascending nodes, positive
// weights summing to b - a.
struct IntervalNodes {
    Vec nodes;
    Vec weights;
};

IntervalNodes interval_nodes(double a, double b, const QuadratureRule& rule);

}  // namespace impfac
