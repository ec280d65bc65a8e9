#pragma once

#include <string>
#include <vector>

#include "sgsde/skew_gradient.hpp"
#include "sgsde/steppers.hpp"

namespace sgsde {

// One skew-symmetric subsystem dX = S^a grad I dt + sum_r T_r^a grad I o dW_r.
// Shares the parent invariant.
struct SubSystem {
    std::string label;  // e.g. "12" for the coordinate pair (1,2)
    SkewGradientForm form;
};

// Ordered decomposition with sum_a S^a = S and sum_a T_r^a = T_r.
struct SplittingPlan {
    SkewGradientForm parent;
    std::vector<SubSystem> subsystems;

    std::size_t size() const { return subsystems.size(); }
};

// Splits by coordinate pairs: subsystem (i,j), i < j lexicographic, keeps only
// entries (i,j) and (j,i) of S and of every T_r. Yields d(d-1)/2 subsystems
// that are skew-symmetric by construction and sum back to the parent.
SplittingPlan pairwise_split(const SkewGradientForm& form);

struct PlanValidation {
    bool ok = true;
    double worst_deviation = 0.0;
    std::string detail;
};

// Checks skew-symmetry of every subsystem and the reconstruction identity at
// the given points.
PlanValidation validate_plan(const SplittingPlan& plan, const std::vector<Vec>& points,
                             double tol);

struct SubStepRecord {
    std::string label;
    double lambda = 0.0;
};

// Palindromic composition step: conservative sub-steps through
// a_1 ... a_{K-1} at lambda = 1/2, a_K at lambda = 1, then back down to a_1
// at lambda = 1/2. Every sub-step sees the same increment vector scaled by
// its lambda; resampling noise per sub-step would destroy the order.
// Truncation from cfg is applied once to dW, not per sub-step.
Vec composition_step(const SplittingPlan& plan, const Vec& x, double h, const Vec& dW,
                     const SchemeConfig& cfg, std::vector<SubStepRecord>* trace = nullptr);

// The composition scheme as a Stepper.
Stepper make_composition_stepper(SplittingPlan plan, SchemeConfig cfg);

}  // namespace sgsde
