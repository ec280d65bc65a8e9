#include "sgsde/calculus.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgsde {

double fd_step(const Vec& x) {
    static const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
    return cbrt_eps * std::max(1.0, norm(x));
}

Vec jacobian_apply(const VectorField& field, const Vec& x, const Vec& v) {
    const double vn = norm(v);
    if (vn == 0.0) return Vec(x.size(), 0.0);
    const double eps = fd_step(x);
    Vec xp = x, xm = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double u = v[j] / vn;
        xp[j] += eps * u;
        xm[j] -= eps * u;
    }
    Vec d = field(xp) - field(xm);
    for (double& c : d) c *= vn / (2.0 * eps);
    return d;
}

Vec lambda_op(const SdeProblem& problem, int i, const VectorField& field, const Vec& x) {
    if (i < 0 || i >= problem.noise_count) throw std::out_of_range("lambda_op: bad noise index");
    return jacobian_apply(field, x, problem.diffusions[i](x));
}

Vec lambda_op(const SdeProblem& problem, int i, int diffusion_index, const Vec& x) {
    if (i < 0 || i >= problem.noise_count || diffusion_index < 0 ||
        diffusion_index >= problem.noise_count)
        throw std::out_of_range("lambda_op: bad noise index");
    if (problem.has_jacobians())
        return matvec(problem.diffusion_jacobians[diffusion_index](x), problem.diffusions[i](x));
    return lambda_op(problem, i, problem.diffusions[diffusion_index], x);
}

CommutativityReport check_commutativity(const SdeProblem& problem, const std::vector<Vec>& points,
                                        double tol) {
    if (points.empty()) throw std::invalid_argument("check_commutativity: no points");
    CommutativityReport report;
    for (const Vec& x : points) {
        for (int i = 0; i < problem.noise_count; ++i) {
            for (int r = i + 1; r < problem.noise_count; ++r) {
                const Vec lhs = lambda_op(problem, i, r, x);
                const Vec rhs = lambda_op(problem, r, i, x);
                const double dev = max_abs(lhs - rhs);
                if (dev > report.worst_deviation) {
                    report.worst_deviation = dev;
                    report.worst_i = i;
                    report.worst_r = r;
                    report.worst_point = x;
                }
            }
        }
    }
    report.commutative = report.worst_deviation <= tol;
    return report;
}

Vec ito_corrected_drift(const SdeProblem& problem, const Vec& x) {
    Vec a = problem.drift(x);
    for (int r = 0; r < problem.noise_count; ++r) {
        const Vec corr = lambda_op(problem, r, r, x);
        for (std::size_t k = 0; k < a.size(); ++k) a[k] += 0.5 * corr[k];
    }
    return a;
}

}  // namespace sgsde
