#include "sgsde/splitting.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "sgsde/errors.hpp"

namespace sgsde {

namespace {

// Keeps only the (i,j)/(j,i) entries of the parent matrix; skew-symmetry of
// the parent makes every such restriction skew-symmetric.
MatrixField pair_restriction(MatrixField parent, int i, int j) {
    return [parent = std::move(parent), i, j](const Vec& x) -> Mat {
        const Mat full = parent(x);
        Mat sub(full.rows, full.cols);
        sub(i, j) = full(i, j);
        sub(j, i) = full(j, i);
        return sub;
    };
}

}  // namespace

SplittingPlan pairwise_split(const SkewGradientForm& form) {
    if (form.dim < 2) throw std::invalid_argument("pairwise_split: dim must be >= 2");

    SplittingPlan plan;
    plan.parent = form;
    for (int i = 0; i < form.dim; ++i) {
        for (int j = i + 1; j < form.dim; ++j) {
            SubSystem sub;
            sub.label = std::to_string(i + 1) + std::to_string(j + 1);
            sub.form.dim = form.dim;
            sub.form.noise_count = form.noise_count;
            sub.form.invariant = form.invariant;
            sub.form.s_matrix = pair_restriction(form.s_matrix, i, j);
            sub.form.t_matrices.reserve(form.t_matrices.size());
            for (const MatrixField& t : form.t_matrices)
                sub.form.t_matrices.push_back(pair_restriction(t, i, j));
            plan.subsystems.push_back(std::move(sub));
        }
    }
    return plan;
}

PlanValidation validate_plan(const SplittingPlan& plan, const std::vector<Vec>& points,
                             double tol) {
    if (points.empty()) throw std::invalid_argument("validate_plan: no points");

    PlanValidation result;
    auto record = [&](double dev, const std::string& what) {
        if (dev > result.worst_deviation) result.worst_deviation = dev;
        if (dev > tol && result.ok) {
            result.ok = false;
            std::ostringstream msg;
            msg << what << " deviates by " << dev << " (tol " << tol << ")";
            result.detail = msg.str();
        }
    };

    for (const Vec& x : points) {
        Mat s_sum = Mat::zero(plan.parent.dim);
        std::vector<Mat> t_sums(plan.parent.noise_count, Mat::zero(plan.parent.dim));
        for (const SubSystem& sub : plan.subsystems) {
            const Mat s = sub.form.s_matrix(x);
            record(max_skew_defect(s), "skew-symmetry of S^" + sub.label);
            s_sum = s_sum + s;
            for (int r = 0; r < plan.parent.noise_count; ++r) {
                const Mat t = sub.form.t_matrices[r](x);
                record(max_skew_defect(t), "skew-symmetry of T^" + sub.label);
                t_sums[r] = t_sums[r] + t;
            }
        }
        const Mat s_parent = plan.parent.s_matrix(x);
        double dev = 0.0;
        for (std::size_t k = 0; k < s_sum.data.size(); ++k)
            dev = std::max(dev, std::abs(s_sum.data[k] - s_parent.data[k]));
        record(dev, "reconstruction of S");
        for (int r = 0; r < plan.parent.noise_count; ++r) {
            const Mat t_parent = plan.parent.t_matrices[r](x);
            dev = 0.0;
            for (std::size_t k = 0; k < t_sums[r].data.size(); ++k)
                dev = std::max(dev, std::abs(t_sums[r].data[k] - t_parent.data[k]));
            record(dev, "reconstruction of T_" + std::to_string(r + 1));
        }
    }
    return result;
}

Vec composition_step(const SplittingPlan& plan, const Vec& x, double h, const Vec& dW,
                     const SchemeConfig& cfg, std::vector<SubStepRecord>* trace) {
    if (plan.subsystems.empty()) throw std::invalid_argument("composition_step: empty plan");
    if (static_cast<int>(dW.size()) != plan.parent.noise_count)
        throw std::invalid_argument("composition_step: increment count != noise_count");

    // The whole palindrome shares one increment vector; truncate once here.
    Vec dw = dW;
    if (cfg.truncation.enabled)
        for (double& w : dw) w = truncate_increment(w, h, cfg.truncation);

    const std::size_t count = plan.subsystems.size();
    std::vector<std::pair<std::size_t, double>> schedule;  // (subsystem, lambda)
    schedule.reserve(2 * count - 1);
    for (std::size_t a = 0; a + 1 < count; ++a) schedule.emplace_back(a, 0.5);
    schedule.emplace_back(count - 1, 1.0);
    for (std::size_t a = count - 1; a-- > 0;) schedule.emplace_back(a, 0.5);

    Vec state = x;
    for (const auto& [index, lambda] : schedule) {
        const SubSystem& sub = plan.subsystems[index];
        if (trace) trace->push_back({sub.label, lambda});
        try {
            state = conservative_step(sub.form, state, lambda * h, lambda * dw, cfg);
        } catch (const NonConvergenceError& e) {
            throw NonConvergenceError("subsystem " + sub.label + ": " + e.what(),
                                      e.last_residual, e.iterations_used);
        }
    }
    return state;
}

Stepper make_composition_stepper(SplittingPlan plan, SchemeConfig cfg) {
    auto shared = std::make_shared<SplittingPlan>(std::move(plan));
    return [shared, cfg](const Vec& x, double h, const Vec& dW) {
        return composition_step(*shared, x, h, dW, cfg);
    };
}

}  // namespace sgsde
