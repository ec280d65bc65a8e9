#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sgsde/noise.hpp"
#include "sgsde/problem.hpp"
#include "sgsde/quadrature.hpp"
#include "sgsde/skew_gradient.hpp"

namespace sgsde {

// Implicit-solve parameters. The predictor is an explicit Euler step
// x + h f(x) + sum_r dW_r g_r(x); the fixed-point map is a contraction for
// small h and bounded increments, so plain iteration suffices.
struct SolverConfig {
    double abs_tol = 1e-12;
    int max_iterations = 100;
};

enum class SchemeKind {
    conservative,
    milstein,
    euler_maruyama,
    stochastic_midpoint,
};

struct SchemeConfig {
    SchemeKind kind = SchemeKind::conservative;
    DiscreteGradient dg_strategy = DiscreteGradient::exact();  // conservative only
    SolverConfig solver;
    TruncationPolicy truncation;  // applied to increments before each step
};

// Returns z with |map(z) - z| <= cfg.abs_tol, iterating from start.
// Throws NonConvergenceError after max_iterations.
Vec fixed_point_solve(const std::function<Vec(const Vec&)>& map, Vec start,
                      const SolverConfig& cfg);

// One step of the conservative scheme: solves
//   x' = x + [h S(mid) + sum_r dW_r T_r(mid)] . D(x, x'),  mid = (x + x')/2,
// with D the configured averaged gradient. Increments are used as passed;
// truncation, when enabled, is applied by the caller or by make_stepper.
Vec conservative_step(const SkewGradientForm& form, const Vec& x, double h, const Vec& dW,
                      const SchemeConfig& cfg);

// Milstein one-step approximation of the skew-gradient system,
//   x + h S grad I + sum_r dW_r T_r grad I
//     + sum_{i<r} Lambda_i(T_r grad I) dW_i dW_r
//     + 1/2 sum_r Lambda_r(T_r grad I) dW_r^2,
// all coefficient fields evaluated at x; Lambda terms by central differences.
Vec milstein_step(const SkewGradientForm& form, const Vec& x, double h, const Vec& dW);

// Explicit Euler-Maruyama on the Ito-converted drift:
//   x + h (f + 1/2 sum_r Jg_r g_r)(x) + sum_r dW_r g_r(x).
Vec euler_maruyama_step(const SdeProblem& problem, const Vec& x, double h, const Vec& dW);

// Implicit stochastic midpoint: x' = x + h f(mid) + sum_r dW_r g_r(mid).
Vec stochastic_midpoint_step(const SdeProblem& problem, const Vec& x, double h, const Vec& dW,
                             const SolverConfig& solver);

// One-step map as used by path integration: state, step size, raw increments.
using Stepper = std::function<Vec(const Vec&, double, const Vec&)>;

// Binds a scheme to a problem. The conservative and Milstein schemes require
// a skew-gradient form; pass the problem's explicit form when it has one,
// otherwise the constructed default form is used. The returned stepper applies
// cfg.truncation to the increments it receives.
Stepper make_stepper(const SdeProblem& problem, const std::optional<SkewGradientForm>& form,
                     const SchemeConfig& cfg);

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<double> invariant_values;

    const Vec& endpoint() const { return states.back(); }
};

// Iterates a one-step map over increments[r][j], recording I along the way.
// An optional guard runs after every step and may throw DomainError; step
// errors are rethrown with the step index attached.
Trajectory integrate_path(const Stepper& stepper, const Invariant& invariant, const Vec& x0,
                          double h, std::int64_t n_steps,
                          const std::vector<std::vector<double>>& increments,
                          const std::function<void(const Vec&)>& guard = {});

}  // namespace sgsde
