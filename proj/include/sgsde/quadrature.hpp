#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sgsde/problem.hpp"

namespace sgsde {

// Quadrature rule (c_i, b_i) on [0,1]. claimed_order is checked at
// construction time against the moment conditions, so a bad rule fails fast.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int claimed_order = 0;

    int stages() const { return static_cast<int>(nodes.size()); }
};

// Largest q (capped at 20) with sum_i b_i c_i^j = 1/(j+1) for all j <= q-1,
// each within 1e-12.
int verify_order(const QuadratureRule& rule);

// Validates weights-sum-to-one and claimed_order, returning the rule.
QuadratureRule make_rule(std::vector<double> nodes, std::vector<double> weights,
                         int claimed_order);

// midpoint (q=2), trapezoid (q=2), simpson (q=4), gauss2 (q=4), gauss3 (q=6).
QuadratureRule builtin_rule(std::string_view name);

// Strategy for the two-point averaged gradient used by the conservative step.
struct DiscreteGradient {
    enum class Kind {
        exact_average,         // Invariant.exact_avg_gradient
        quadrature_average,    // sum_i b_i grad I(x + c_i (y - x))
        separable_coordinate,  // (I_k(y^k) - I_k(x^k)) / (y^k - x^k) per coordinate
    };

    Kind kind = Kind::exact_average;
    QuadratureRule rule;  // quadrature_average only

    static DiscreteGradient exact() { return {Kind::exact_average, {}}; }
    static DiscreteGradient quadrature(QuadratureRule r) {
        return {Kind::quadrature_average, std::move(r)};
    }
    static DiscreteGradient separable() { return {Kind::separable_coordinate, {}}; }
};

// The averaged gradient D(x, y). For exact_average and separable_coordinate
// this is a discrete gradient: D(x,y) . (y - x) = I(y) - I(x) up to rounding;
// for quadrature_average the identity holds to O(|y-x|^{q+1}).
Vec averaged_gradient(const Invariant& invariant, const Vec& x, const Vec& y,
                      const DiscreteGradient& strategy);

}  // namespace sgsde
