#pragma once

#include <vector>

#include "sgsde/problem.hpp"

namespace sgsde {

// Skew-gradient representation of a conservative SDE,
//   dX = S(X) grad I(X) dt + sum_r T_r(X) grad I(X) o dW_r,
// with S and every T_r skew-symmetric. Conservation of I is manifest here:
// any one-step map whose increment lies in the image of [h S + sum dW_r T_r]
// applied to a discrete gradient of I preserves I exactly.
struct SkewGradientForm {
    int dim = 0;
    int noise_count = 0;
    MatrixField s_matrix;                 // S
    std::vector<MatrixField> t_matrices;  // T_r
    Invariant invariant;

    Vec drift(const Vec& x) const { return matvec(s_matrix(x), invariant.gradient(x)); }
    Vec diffusion(int r, const Vec& x) const {
        return matvec(t_matrices[r](x), invariant.gradient(x));
    }
};

// Builds the skew-gradient form from a problem via
//   S(x)   = (f a^T - a f^T) / (a^T grad I),
//   T_r(x) = (g_r b^T - b g_r^T) / (b^T grad I).
// Defaults a = b = grad I, which maximizes the denominator magnitude.
// Evaluating the resulting matrices where |a^T grad I| < 1e-14 |a| |grad I|
// raises SingularDenominatorError identifying the point.
SkewGradientForm build_skew_gradient_form(const SdeProblem& problem, VectorField a = {},
                                          VectorField b = {});

}  // namespace sgsde
