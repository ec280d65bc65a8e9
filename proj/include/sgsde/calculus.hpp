#pragma once

#include <vector>

#include "sgsde/problem.hpp"

namespace sgsde {

// Central-difference step for derivative-free Jacobian action,
// eps = cbrt(machine epsilon) * max(1, |x|).
double fd_step(const Vec& x);

// Jacobian(field)(x) . v by a central directional difference; does not
// assemble the Jacobian.
Vec jacobian_apply(const VectorField& field, const Vec& x, const Vec& v);

// Lambda_i applied to a vector field: Jacobian(field)(x) . g_i(x), evaluated
// as a directional derivative by central differences. Noise index is 0-based.
Vec lambda_op(const SdeProblem& problem, int i, const VectorField& field, const Vec& x);

// Lambda_i g_r with the problem's analytic Jacobians when present, otherwise
// central differences.
Vec lambda_op(const SdeProblem& problem, int i, int diffusion_index, const Vec& x);

struct CommutativityReport {
    bool commutative = true;
    double worst_deviation = 0.0;
    int worst_i = -1;
    int worst_r = -1;
    Vec worst_point;
};

// Tests Lambda_i g_r = Lambda_r g_i over all noise pairs at the given points.
CommutativityReport check_commutativity(const SdeProblem& problem, const std::vector<Vec>& points,
                                        double tol);

// Ito drift of the Stratonovich system: f(x) + 1/2 sum_r Jacobian(g_r)(x) g_r(x).
Vec ito_corrected_drift(const SdeProblem& problem, const Vec& x);

}  // namespace sgsde
