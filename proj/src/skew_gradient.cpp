#include "sgsde/skew_gradient.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "sgsde/errors.hpp"

namespace sgsde {

namespace {

[[noreturn]] void throw_singular(const Vec& x, double denom, double scale) {
    std::ostringstream msg;
    msg << "skew-gradient denominator is singular at x = (";
    for (std::size_t i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x[i];
    msg << "): |a^T grad I| = " << std::abs(denom) << " < 1e-14 * " << scale;
    throw SingularDenominatorError(msg.str());
}

// (u v^T - v u^T) / denom
Mat rank2_skew(const Vec& u, const Vec& v, double denom) {
    const int d = static_cast<int>(u.size());
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = (u[i] * v[j] - v[i] * u[j]) / denom;
    return m;
}

MatrixField make_skew_field(VectorField field, VectorField aux, VectorField grad) {
    return [field = std::move(field), aux = std::move(aux),
            grad = std::move(grad)](const Vec& x) -> Mat {
        const Vec u = field(x);
        const Vec a = aux(x);
        const Vec g = grad(x);
        const double denom = dot(a, g);
        const double scale = norm(a) * norm(g);
        if (std::abs(denom) < 1e-14 * scale || scale == 0.0) throw_singular(x, denom, scale);
        return rank2_skew(u, a, denom);
    };
}

}  // namespace

SkewGradientForm build_skew_gradient_form(const SdeProblem& problem, VectorField a,
                                          VectorField b) {
    if (!a) a = problem.invariant.gradient;
    if (!b) b = problem.invariant.gradient;

    SkewGradientForm form;
    form.dim = problem.dim;
    form.noise_count = problem.noise_count;
    form.invariant = problem.invariant;
    form.s_matrix = make_skew_field(problem.drift, a, problem.invariant.gradient);
    form.t_matrices.reserve(problem.diffusions.size());
    for (const VectorField& g_r : problem.diffusions)
        form.t_matrices.push_back(make_skew_field(g_r, b, problem.invariant.gradient));
    return form;
}

}  // namespace sgsde
