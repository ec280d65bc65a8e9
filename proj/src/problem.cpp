#include "sgsde/problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sgsde/calculus.hpp"

namespace sgsde {

namespace {

// Central-difference gradient of a scalar field, coordinate by coordinate.
Vec fd_gradient(const ScalarField& f, const Vec& x) {
    const double eps = fd_step(x);
    Vec g(x.size());
    Vec xp = x, xm = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + eps;
        xm[j] = x[j] - eps;
        g[j] = (f(xp) - f(xm)) / (2.0 * eps);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return g;
}

Mat fd_jacobian(const VectorField& f, const Vec& x) {
    const double eps = fd_step(x);
    const int d = static_cast<int>(x.size());
    Mat jac(d, d);
    Vec xp = x, xm = x;
    for (int j = 0; j < d; ++j) {
        xp[j] = x[j] + eps;
        xm[j] = x[j] - eps;
        const Vec fp = f(xp);
        const Vec fm = f(xm);
        for (int i = 0; i < d; ++i) jac(i, j) = (fp[i] - fm[i]) / (2.0 * eps);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return jac;
}

void record(ValidationReport& report, double deviation, double tol, const std::string& what) {
    if (deviation > report.worst_deviation) report.worst_deviation = deviation;
    if (deviation > tol && report.ok) {
        report.ok = false;
        std::ostringstream msg;
        msg << what << " deviates by " << deviation << " (tol " << tol << ")";
        report.detail = msg.str();
    }
}

}  // namespace

ValidationReport validate_invariant(const Invariant& inv, const std::vector<Vec>& points,
                                    double rel_tol) {
    ValidationReport report;
    for (const Vec& x : points) {
        const Vec g = inv.gradient(x);
        const Vec g_fd = fd_gradient(inv.value, x);
        const double scale = std::max(1.0, norm(g));
        record(report, norm(g - g_fd) / scale, rel_tol, "gradient vs finite differences");

        if (inv.is_separable()) {
            double sum = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) sum += inv.separable_parts[k].value(x[k]);
            const double iv = inv.value(x);
            record(report, std::abs(sum - iv) / std::max(1.0, std::abs(iv)), 1e-12,
                   "separable parts vs value");
        }
        if (inv.has_exact_average()) {
            // At y = x the segment average must collapse to the gradient.
            record(report, norm(inv.exact_avg_gradient(x, x) - g) / scale, 1e-10,
                   "exact average at degenerate segment");
        }
    }
    return report;
}

ValidationReport validate_problem(const SdeProblem& problem, const std::vector<Vec>& points,
                                  double rel_tol) {
    ValidationReport report = validate_invariant(problem.invariant, points, rel_tol);
    for (const Vec& x : points) {
        const Vec g = problem.invariant.gradient(x);
        const Vec f = problem.drift(x);
        const double fscale = std::max(1.0, norm(f) * norm(g));

        // Conservation is orthogonality: dI = grad I . f dt + sum grad I . g_r o dW.
        record(report, std::abs(dot(g, f)) / fscale, 1e-10, "grad I . f");
        for (int r = 0; r < problem.noise_count; ++r) {
            const Vec gr = problem.diffusions[r](x);
            record(report, std::abs(dot(g, gr)) / std::max(1.0, norm(gr) * norm(g)), 1e-10,
                   "grad I . g_r");
        }

        if (problem.has_jacobians()) {
            for (int r = 0; r < problem.noise_count; ++r) {
                const Mat ja = problem.diffusion_jacobians[r](x);
                const Mat jn = fd_jacobian(problem.diffusions[r], x);
                double dev = 0.0;
                double scale = 1.0;
                for (std::size_t i = 0; i < ja.data.size(); ++i) {
                    dev = std::max(dev, std::abs(ja.data[i] - jn.data[i]));
                    scale = std::max(scale, std::abs(ja.data[i]));
                }
                record(report, dev / scale, rel_tol, "diffusion jacobian vs finite differences");
            }
        }
    }
    return report;
}

}  // namespace sgsde
