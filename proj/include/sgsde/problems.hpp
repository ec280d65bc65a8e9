#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgsde/problem.hpp"
#include "sgsde/skew_gradient.hpp"

namespace sgsde {

struct WeakFunctional {
    std::string name;
    ScalarField fn;
};

// A benchmark system: the SDE, an explicit skew-gradient form when one is
// known analytically, and the default study setup.
struct ProblemSpec {
    std::string name;
    SdeProblem problem;
    std::optional<SkewGradientForm> explicit_form;
    Vec x0;
    double horizon = 1.0;
    std::vector<WeakFunctional> weak_functionals;

    // Paths are aborted with DomainError when any coordinate drops below this
    // (0 disables the guard; only the Lotka-Volterra system needs it).
    double positivity_floor = 0.0;
};

// Stochastic pendulum: d = 2, m = 2, I(p,q) = p^2/2 - cos(q),
// diffusion channels c1 and c2 times the same skew field. Commutative noise.
ProblemSpec pendulum(double c1 = 1.0, double c2 = 0.5);

// Cyclic Lotka-Volterra: d = 3, m = 3, I(x) = x1 x2 x3, explicit constant S
// and coordinate-singular T_r. Defined on the positive octant.
ProblemSpec cyclic_lotka_volterra();

// Synthetic d = 2, m = 1 system with the quartic separable invariant
// I = ((x1)^4 + (x2)^4)/4 and constant S; exercises the quadrature-order
// boundary (Simpson exact, midpoint rule not).
ProblemSpec quartic_fixture();

// Lookup by CLI name; throws std::invalid_argument for unknown names.
ProblemSpec problem_by_name(const std::string& name, double c1 = 1.0, double c2 = 0.5);

std::vector<std::string> problem_names();

}  // namespace sgsde
