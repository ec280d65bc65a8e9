#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sgsde/linalg.hpp"

namespace sgsde {

using ScalarField = std::function<double(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;
using MatrixField = std::function<Mat(const Vec&)>;

// One coordinate of a separable conserved quantity I(x) = sum_k I_k(x^k).
struct SeparablePart {
    std::function<double(double)> value;       // I_k
    std::function<double(double)> derivative;  // I_k'
};

// Scalar conserved quantity with its gradient. The optional members unlock
// the cheaper/exact discrete-gradient strategies when they are available.
struct Invariant {
    ScalarField value;
    VectorField gradient;

    // Present iff I(x) = sum_k I_k(x^k); one entry per coordinate.
    std::vector<SeparablePart> separable_parts;

    // Closed form of the segment average int_0^1 grad I(x + tau(y-x)) dtau.
    std::function<Vec(const Vec&, const Vec&)> exact_avg_gradient;

    bool is_separable() const { return !separable_parts.empty(); }
    bool has_exact_average() const { return static_cast<bool>(exact_avg_gradient); }
};

// Autonomous Stratonovich SDE
//   dX = f(X) dt + sum_r g_r(X) o dW_r,   X in R^d,
// carrying a scalar conserved quantity.
struct SdeProblem {
    int dim = 0;
    int noise_count = 0;
    VectorField drift;                          // f
    std::vector<VectorField> diffusions;        // g_r, r = 0..m-1
    Invariant invariant;
    std::vector<MatrixField> diffusion_jacobians;  // optional, dg_r/dx

    bool has_jacobians() const { return !diffusion_jacobians.empty(); }
};

// Consistency checks used by tests and the problem catalogue: gradient vs
// central differences, separable parts summing to I, Jacobians vs central
// differences, and the conservation orthogonality grad I . f = grad I . g_r = 0.
struct ValidationReport {
    bool ok = true;
    double worst_deviation = 0.0;
    std::string detail;
};

ValidationReport validate_invariant(const Invariant& inv, const std::vector<Vec>& points,
                                    double rel_tol = 1e-5);
ValidationReport validate_problem(const SdeProblem& problem, const std::vector<Vec>& points,
                                  double rel_tol = 1e-5);

}  // namespace sgsde
