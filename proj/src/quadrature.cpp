#include "sgsde/quadrature.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sgsde {

namespace {

constexpr int kMaxVerifiedOrder = 20;

double moment(const QuadratureRule& rule, int j) {
    double s = 0.0;
    for (int i = 0; i < rule.stages(); ++i)
        s += rule.weights[i] * std::pow(rule.nodes[i], j);
    return s;
}

}  // namespace

int verify_order(const QuadratureRule& rule) {
    int q = 0;
    while (q < kMaxVerifiedOrder) {
        // Exactness on tau^q is the condition for order q+1.
        if (std::abs(moment(rule, q) - 1.0 / (q + 1)) > 1e-12) break;
        ++q;
    }
    return q;
}

QuadratureRule make_rule(std::vector<double> nodes, std::vector<double> weights,
                         int claimed_order) {
    if (nodes.size() != weights.size() || nodes.empty())
        throw std::invalid_argument("make_rule: nodes/weights size mismatch");
    QuadratureRule rule{std::move(nodes), std::move(weights), claimed_order};
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    if (std::abs(wsum - 1.0) > 1e-14)
        throw std::invalid_argument("make_rule: weights must sum to 1");
    const int verified = verify_order(rule);
    if (verified < claimed_order) {
        std::ostringstream msg;
        msg << "make_rule: claimed order " << claimed_order << " but verified only " << verified;
        throw std::invalid_argument(msg.str());
    }
    return rule;
}

QuadratureRule builtin_rule(std::string_view name) {
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    const double sqrt35 = std::sqrt(3.0 / 5.0);
    if (name == "midpoint") return make_rule({0.5}, {1.0}, 2);
    if (name == "trapezoid") return make_rule({0.0, 1.0}, {0.5, 0.5}, 2);
    if (name == "simpson") return make_rule({0.0, 0.5, 1.0}, {1.0 / 6, 4.0 / 6, 1.0 / 6}, 4);
    if (name == "gauss2")
        return make_rule({(1.0 - inv_sqrt3) / 2.0, (1.0 + inv_sqrt3) / 2.0}, {0.5, 0.5}, 4);
    if (name == "gauss3")
        return make_rule({(1.0 - sqrt35) / 2.0, 0.5, (1.0 + sqrt35) / 2.0},
                         {5.0 / 18, 8.0 / 18, 5.0 / 18}, 6);
    throw std::invalid_argument("builtin_rule: unknown rule '" + std::string(name) + "'");
}

namespace {

// Per-coordinate difference quotient with the derivative midpoint value as
// the degenerate limit; below eps_dg the quotient has no significant digits.
double separable_component(const SeparablePart& part, double xk, double yk) {
    const double eps_dg = 1e-8 * std::max({1.0, std::abs(xk), std::abs(yk)});
    if (std::abs(yk - xk) <= eps_dg) return part.derivative(0.5 * (xk + yk));
    return (part.value(yk) - part.value(xk)) / (yk - xk);
}

}  // namespace

Vec averaged_gradient(const Invariant& invariant, const Vec& x, const Vec& y,
                      const DiscreteGradient& strategy) {
    switch (strategy.kind) {
        case DiscreteGradient::Kind::exact_average:
            if (!invariant.has_exact_average())
                throw std::invalid_argument(
                    "averaged_gradient: invariant has no exact_avg_gradient");
            if (x == y) return invariant.gradient(x);
            return invariant.exact_avg_gradient(x, y);

        case DiscreteGradient::Kind::quadrature_average: {
            if (strategy.rule.stages() == 0)
                throw std::invalid_argument("averaged_gradient: empty quadrature rule");
            Vec avg(x.size(), 0.0);
            Vec point(x.size());
            for (int i = 0; i < strategy.rule.stages(); ++i) {
                const double c = strategy.rule.nodes[i];
                for (std::size_t k = 0; k < x.size(); ++k) point[k] = x[k] + c * (y[k] - x[k]);
                const Vec g = invariant.gradient(point);
                for (std::size_t k = 0; k < x.size(); ++k) avg[k] += strategy.rule.weights[i] * g[k];
            }
            return avg;
        }

        case DiscreteGradient::Kind::separable_coordinate: {
            if (!invariant.is_separable())
                throw std::invalid_argument("averaged_gradient: invariant is not separable");
            if (invariant.separable_parts.size() != x.size())
                throw std::invalid_argument("averaged_gradient: separable parts/dim mismatch");
            Vec d(x.size());
            for (std::size_t k = 0; k < x.size(); ++k)
                d[k] = separable_component(invariant.separable_parts[k], x[k], y[k]);
            return d;
        }
    }
    throw std::logic_error("averaged_gradient: unreachable");
}

}  // namespace sgsde
