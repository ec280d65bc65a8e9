#include "sgsde/steppers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "sgsde/calculus.hpp"
#include "sgsde/errors.hpp"

namespace sgsde {

Vec fixed_point_solve(const std::function<Vec(const Vec&)>& map, Vec start,
                      const SolverConfig& cfg) {
    if (cfg.abs_tol <= 0.0 || cfg.max_iterations < 1)
        throw std::invalid_argument("fixed_point_solve: bad solver config");

    Vec z = std::move(start);
    double residual = 0.0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        Vec next = map(z);
        residual = norm(next - z);
        z = std::move(next);
        if (residual <= cfg.abs_tol) return z;
    }
    std::ostringstream msg;
    msg << "fixed_point_solve: no convergence after " << cfg.max_iterations
        << " iterations, residual " << residual;
    throw NonConvergenceError(msg.str(), residual, cfg.max_iterations);
}

namespace {

// Damped Newton on F(z) = z - map(z) with a central-difference Jacobian.
// Fallback for steps where plain iteration is expansive (coarse h, large
// increments); needs no derivatives of I beyond map evaluations. Probe points
// where the map itself fails (singular SG denominators off the domain) are
// treated as infinite residual and damped away.
Vec newton_solve(const std::function<Vec(const Vec&)>& map, Vec z, const SolverConfig& cfg) {
    const int d = static_cast<int>(z.size());
    // Probes may leave the map's domain (singular SG denominators); treat any
    // such point as infinitely bad rather than aborting the solve.
    const auto protected_map = [&](const Vec& at, Vec& out) -> bool {
        try {
            out = map(at);
            return true;
        } catch (const std::exception&) {
            return false;
        }
    };

    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.max_iterations; ++it) {
        Vec mapped;
        if (!protected_map(z, mapped)) break;
        const Vec res = mapped - z;  // -F(z)
        residual = norm(res);
        if (residual <= cfg.abs_tol) return z;

        Mat jac(d, d);
        const double eps = fd_step(z);
        Vec zp = z, zm = z;
        bool jac_ok = true;
        for (int c = 0; c < d && jac_ok; ++c) {
            zp[c] += eps;
            zm[c] -= eps;
            Vec fp, fm;
            jac_ok = protected_map(zp, fp) && protected_map(zm, fm);
            if (jac_ok)
                for (int r = 0; r < d; ++r)
                    jac(r, c) = (r == c ? 1.0 : 0.0) - (fp[r] - fm[r]) / (2.0 * eps);
            zp[c] = z[c];
            zm[c] = z[c];
        }
        Vec delta;
        if (!jac_ok || !solve_linear(jac, res, delta)) break;

        double t = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 25; ++ls) {
            const Vec trial = z + t * delta;
            Vec trial_mapped;
            if (protected_map(trial, trial_mapped) && norm(trial_mapped - trial) < residual) {
                z = trial;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if (!improved) break;
    }
    std::ostringstream msg;
    msg << "newton fallback: no convergence after " << cfg.max_iterations
        << " iterations, residual " << residual;
    throw NonConvergenceError(msg.str(), residual, cfg.max_iterations);
}

// Plain iteration with early divergence detection, then the Newton fallback.
// If Newton stalls from the predictor, retry it from sign-flipped copies of
// the predictor: for Cayley-like implicit maps of multiplicative noise the
// root flips the sign of a coordinate once its accumulated shock passes 2,
// and those roots sit in the mirrored orthants. Restart order is fixed
// (fewest flips first), so the solve stays deterministic.
Vec implicit_solve(const std::function<Vec(const Vec&)>& map, const Vec& start,
                   const SolverConfig& cfg) {
    Vec z = start;
    double prev_residual = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        Vec next = map(z);
        const double residual = norm(next - z);
        z = std::move(next);
        if (residual <= cfg.abs_tol) return z;
        if (residual > prev_residual) {
            if (++growth_streak >= 3) break;
        } else {
            growth_streak = 0;
        }
        prev_residual = residual;
    }

    const int d = static_cast<int>(start.size());
    std::vector<unsigned> masks = {0u};
    if (d <= 8) {
        for (unsigned m = 1; m < (1u << d); ++m) masks.push_back(m);
        std::stable_sort(masks.begin(), masks.end(),
                         [](unsigned a, unsigned b) { return std::popcount(a) < std::popcount(b); });
    }
    NonConvergenceError last("implicit solve failed", 0.0, 0);
    for (unsigned mask : masks) {
        Vec restart = start;
        for (int k = 0; k < d; ++k)
            if (mask & (1u << k)) restart[k] = -restart[k];
        try {
            return newton_solve(map, restart, cfg);
        } catch (const NonConvergenceError& e) {
            last = e;
        }
    }
    throw last;
}

// h S(x) + sum_r dW_r T_r(x)
Mat step_matrix(const SkewGradientForm& form, const Vec& x, double h, const Vec& dW) {
    Mat a = h * form.s_matrix(x);
    for (int r = 0; r < form.noise_count; ++r) {
        const Mat t = form.t_matrices[r](x);
        for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += dW[r] * t.data[i];
    }
    return a;
}

void check_increments(int noise_count, const Vec& dW, const char* where) {
    if (static_cast<int>(dW.size()) != noise_count)
        throw std::invalid_argument(std::string(where) + ": increment count != noise_count");
}

Vec apply_truncation(Vec dW, double h, const TruncationPolicy& policy) {
    if (policy.enabled)
        for (double& w : dW) w = truncate_increment(w, h, policy);
    return dW;
}

}  // namespace

Vec conservative_step(const SkewGradientForm& form, const Vec& x, double h, const Vec& dW,
                      const SchemeConfig& cfg) {
    check_increments(form.noise_count, dW, "conservative_step");

    const auto make_map = [&](const Vec& inc) {
        return [&form, &cfg, &x, h, inc](const Vec& z) -> Vec {
            Vec mid = x;
            for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = 0.5 * (x[k] + z[k]);
            const Vec d = averaged_gradient(form.invariant, x, z, cfg.dg_strategy);
            return x + matvec(step_matrix(form, mid, h, inc), d);
        };
    };

    // Explicit Euler predictor.
    const Vec predictor = x + matvec(step_matrix(form, x, h, dW), form.invariant.gradient(x));
    try {
        return implicit_solve(make_map(dW), predictor, cfg.solver);
    } catch (const NonConvergenceError&) {
        // Walk the root branch by adaptive continuation in the increments;
        // large shocks push the solution across orthants and far from the
        // predictor, so the branch is followed from the deterministic step,
        // bisecting the continuation step where it stalls.
        Vec z = x;
        double lambda = 0.0;
        double stride = 0.125;
        for (int attempts = 0; lambda < 1.0; ++attempts) {
            const double next = std::min(1.0, lambda + stride);
            bool advanced = false;
            try {
                z = implicit_solve(make_map(next * dW), z, cfg.solver);
                advanced = true;
            } catch (const NonConvergenceError&) {
                // The branch may pass through infinity (orthant flip). Probe
                // remote starts: sign patterns and magnitude escalations of
                // the current offset, in a fixed order.
                const Vec offset = (norm(z - x) > 0.0) ? z - x : 0.1 * Vec(x.size(), 1.0);
                const int d = static_cast<int>(x.size());
                for (double scale : {4.0, 16.0, 64.0, 256.0}) {
                    for (unsigned mask = 0; mask < (1u << d) && !advanced; ++mask) {
                        Vec start = x;
                        for (int k = 0; k < d; ++k) {
                            const double flip = (mask & (1u << k)) ? -1.0 : 1.0;
                            start[k] = flip * (x[k] + scale * offset[k]);
                        }
                        try {
                            z = newton_solve(make_map(next * dW), start, cfg.solver);
                            advanced = true;
                        } catch (const NonConvergenceError&) {
                        }
                    }
                    if (advanced) break;
                }
            }
            if (advanced) {
                lambda = next;
                stride = std::min(0.125, 2.0 * stride);
            } else {
                stride *= 0.5;
                if (stride < 1.0 / 1024.0 || attempts > 256)
                    throw NonConvergenceError(
                        "conservative_step: continuation stalled at lambda = " +
                            std::to_string(lambda),
                        stride, attempts);
            }
        }
        return z;
    }
}

Vec milstein_step(const SkewGradientForm& form, const Vec& x, double h, const Vec& dW) {
    check_increments(form.noise_count, dW, "milstein_step");

    const Vec grad = form.invariant.gradient(x);
    Vec out = x + matvec(h * form.s_matrix(x), grad);

    std::vector<VectorField> fields(form.noise_count);  // x -> T_r(x) grad I(x)
    std::vector<Vec> g(form.noise_count);
    for (int r = 0; r < form.noise_count; ++r) {
        const MatrixField* t_r = &form.t_matrices[r];
        const VectorField* gradient = &form.invariant.gradient;
        fields[r] = [t_r, gradient](const Vec& z) { return matvec((*t_r)(z), (*gradient)(z)); };
        g[r] = matvec((*t_r)(x), grad);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += dW[r] * g[r][k];
    }
    for (int i = 0; i < form.noise_count; ++i) {
        for (int r = i; r < form.noise_count; ++r) {
            // Cross terms dW_i dW_r for i < r, plus the diagonal dW_r^2 / 2.
            const double coeff = (i == r) ? 0.5 * dW[r] * dW[r] : dW[i] * dW[r];
            const Vec lambda = jacobian_apply(fields[r], x, g[i]);
            for (std::size_t k = 0; k < out.size(); ++k) out[k] += coeff * lambda[k];
        }
    }
    return out;
}

Vec euler_maruyama_step(const SdeProblem& problem, const Vec& x, double h, const Vec& dW) {
    check_increments(problem.noise_count, dW, "euler_maruyama_step");
    Vec out = x + h * ito_corrected_drift(problem, x);
    for (int r = 0; r < problem.noise_count; ++r) {
        const Vec g = problem.diffusions[r](x);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += dW[r] * g[k];
    }
    return out;
}

Vec stochastic_midpoint_step(const SdeProblem& problem, const Vec& x, double h, const Vec& dW,
                             const SolverConfig& solver) {
    check_increments(problem.noise_count, dW, "stochastic_midpoint_step");

    const auto rhs = [&](const Vec& at) -> Vec {
        Vec inc = h * problem.drift(at);
        for (int r = 0; r < problem.noise_count; ++r) {
            const Vec g = problem.diffusions[r](at);
            for (std::size_t k = 0; k < inc.size(); ++k) inc[k] += dW[r] * g[k];
        }
        return inc;
    };
    const auto map = [&](const Vec& z) -> Vec {
        Vec mid = x;
        for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = 0.5 * (x[k] + z[k]);
        return x + rhs(mid);
    };
    return implicit_solve(map, x + rhs(x), solver);
}

Stepper make_stepper(const SdeProblem& problem, const std::optional<SkewGradientForm>& form,
                     const SchemeConfig& cfg) {
    switch (cfg.kind) {
        case SchemeKind::conservative: {
            auto f = std::make_shared<SkewGradientForm>(
                form ? *form : build_skew_gradient_form(problem));
            return [f, cfg](const Vec& x, double h, const Vec& dW) {
                return conservative_step(*f, x, h, apply_truncation(dW, h, cfg.truncation), cfg);
            };
        }
        case SchemeKind::milstein: {
            auto f = std::make_shared<SkewGradientForm>(
                form ? *form : build_skew_gradient_form(problem));
            return [f, cfg](const Vec& x, double h, const Vec& dW) {
                return milstein_step(*f, x, h, apply_truncation(dW, h, cfg.truncation));
            };
        }
        case SchemeKind::euler_maruyama: {
            auto p = std::make_shared<SdeProblem>(problem);
            return [p, cfg](const Vec& x, double h, const Vec& dW) {
                return euler_maruyama_step(*p, x, h, apply_truncation(dW, h, cfg.truncation));
            };
        }
        case SchemeKind::stochastic_midpoint: {
            auto p = std::make_shared<SdeProblem>(problem);
            return [p, cfg](const Vec& x, double h, const Vec& dW) {
                return stochastic_midpoint_step(*p, x, h,
                                                apply_truncation(dW, h, cfg.truncation),
                                                cfg.solver);
            };
        }
    }
    throw std::logic_error("make_stepper: unreachable");
}

Trajectory integrate_path(const Stepper& stepper, const Invariant& invariant, const Vec& x0,
                          double h, std::int64_t n_steps,
                          const std::vector<std::vector<double>>& increments,
                          const std::function<void(const Vec&)>& guard) {
    const int m = static_cast<int>(increments.size());
    for (const auto& row : increments)
        if (static_cast<std::int64_t>(row.size()) < n_steps)
            throw std::invalid_argument("integrate_path: increments shorter than n_steps");

    Trajectory traj;
    traj.times.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    traj.invariant_values.reserve(n_steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    traj.invariant_values.push_back(invariant.value(x0));

    Vec x = x0;
    Vec dW(m);
    for (std::int64_t j = 0; j < n_steps; ++j) {
        for (int r = 0; r < m; ++r) dW[r] = increments[r][j];
        try {
            x = stepper(x, h, dW);
            if (guard) guard(x);
        } catch (const NonConvergenceError& e) {
            throw NonConvergenceError("step " + std::to_string(j) + ": " + e.what(),
                                      e.last_residual, e.iterations_used);
        } catch (const DomainError& e) {
            throw DomainError("step " + std::to_string(j) + ": " + e.what());
        }
        traj.times.push_back(static_cast<double>(j + 1) * h);
        traj.states.push_back(x);
        traj.invariant_values.push_back(invariant.value(x));
    }
    return traj;
}

}  // namespace sgsde
