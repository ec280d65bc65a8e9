#include "sgsde/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sgsde/errors.hpp"

namespace sgsde {

double fit_slope(const std::vector<double>& h_list, const std::vector<double>& errors) {
    if (h_list.size() != errors.size() || h_list.size() < 2)
        throw std::invalid_argument("fit_slope: need >= 2 matching points");
    const std::size_t n = h_list.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (h_list[i] <= 0.0 || errors[i] <= 0.0 || !std::isfinite(errors[i]))
            throw std::invalid_argument("fit_slope: values must be positive and finite");
        lx[i] = std::log(h_list[i]);
        ly[i] = std::log(errors[i]);
    }
    const double mx = pairwise_sum(lx) / n;
    const double my = pairwise_sum(ly) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::int64_t exact_divide(double numerator, double denominator, const char* what) {
    const double ratio = numerator / denominator;
    const std::int64_t n = std::llround(ratio);
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument(std::string("study config: ") + what +
                                    " must divide evenly (ratio " + std::to_string(ratio) + ")");
    return n;
}

struct RunStats {
    Vec endpoint;
    double max_drift = 0.0;
    double sum_sq_step_drift = 0.0;
    std::int64_t steps = 0;
};

// Endpoint-and-drift path runner; avoids storing whole trajectories.
RunStats run_light(const Stepper& stepper, const Invariant& invariant, const Vec& x0, double h,
                   std::int64_t n_steps, const std::vector<std::vector<double>>& increments,
                   const std::function<void(const Vec&)>& guard) {
    RunStats stats;
    Vec x = x0;
    const double i0 = invariant.value(x0);
    double prev = i0;
    Vec dW(increments.size());
    for (std::int64_t j = 0; j < n_steps; ++j) {
        for (std::size_t r = 0; r < increments.size(); ++r) dW[r] = increments[r][j];
        x = stepper(x, h, dW);
        if (guard) guard(x);
        const double iv = invariant.value(x);
        stats.max_drift = std::max(stats.max_drift, std::abs(iv - i0));
        stats.sum_sq_step_drift += (iv - prev) * (iv - prev);
        prev = iv;
    }
    stats.endpoint = std::move(x);
    stats.steps = n_steps;
    return stats;
}

struct PathOutcome {
    bool failed = false;
    std::string error;
    Vec ref_endpoint;
    std::vector<RunStats> per_h;
};

struct Engine {
    const StudyConfig& cfg;
    double horizon;
    std::vector<double> h_list;        // descending
    std::vector<std::int64_t> n_steps;
    std::vector<std::int64_t> factors;  // h / h_ref
    std::int64_t n_ref = 0;
    bool need_reference = false;
    Stepper scheme;
    Stepper reference;
    std::function<void(const Vec&)> guard;
    std::vector<WeakFunctional> psi;

    explicit Engine(const StudyConfig& config) : cfg(config) {
        if (cfg.h_list.empty()) throw std::invalid_argument("study config: empty h list");
        if (cfg.paths < 1) throw std::invalid_argument("study config: paths must be >= 1");
        if (cfg.use_composition && cfg.scheme.kind != SchemeKind::conservative)
            throw std::invalid_argument("study config: composition requires conservative scheme");

        horizon = cfg.horizon > 0.0 ? cfg.horizon : cfg.spec.horizon;
        h_list = cfg.h_list;
        std::sort(h_list.begin(), h_list.end(), std::greater<>());
        need_reference = cfg.mode != StudyMode::invariant;
        for (double h : h_list) {
            if (h <= 0.0) throw std::invalid_argument("study config: h must be > 0");
            n_steps.push_back(exact_divide(horizon, h, "every h into the horizon"));
            if (need_reference) factors.push_back(exact_divide(h, cfg.h_ref, "h_ref into every h"));
        }
        if (need_reference) n_ref = exact_divide(horizon, cfg.h_ref, "h_ref into the horizon");

        const SdeProblem& problem = cfg.spec.problem;
        if (cfg.use_composition) {
            const SkewGradientForm form = cfg.spec.explicit_form
                                              ? *cfg.spec.explicit_form
                                              : build_skew_gradient_form(problem);
            scheme = make_composition_stepper(pairwise_split(form), cfg.scheme);
        } else {
            scheme = make_stepper(problem, cfg.spec.explicit_form, cfg.scheme);
        }
        if (need_reference) {
            SchemeConfig ref_cfg;
            ref_cfg.kind = cfg.ref_scheme;
            reference = make_stepper(problem, cfg.spec.explicit_form, ref_cfg);
        }
        if (cfg.spec.positivity_floor > 0.0) {
            // Guards the singular set of the SG matrices: what must stay finite
            // is 1/x^k, so the abort condition is distance to the coordinate
            // planes, not the sign.
            const double floor = cfg.spec.positivity_floor;
            guard = [floor](const Vec& x) {
                for (double v : x)
                    if (std::abs(v) < floor)
                        throw DomainError("coordinate entered the singular neighbourhood");
            };
        }
        psi = cfg.weak_functionals.empty() ? cfg.spec.weak_functionals : cfg.weak_functionals;
    }

    PathOutcome run_path(std::uint64_t p) const {
        const SdeProblem& problem = cfg.spec.problem;
        const Invariant& invariant = problem.invariant;
        PathOutcome out;
        out.per_h.resize(h_list.size());
        try {
            if (need_reference) {
                const BrownianLattice lattice =
                    generate_lattice(cfg.seed, problem.noise_count, cfg.h_ref, n_ref, p, 0);
                out.ref_endpoint = run_light(reference, invariant, cfg.spec.x0, cfg.h_ref, n_ref,
                                             lattice.increments, guard)
                                       .endpoint;
                for (std::size_t i = 0; i < h_list.size(); ++i) {
                    const auto increments =
                        cfg.common_random_numbers
                            ? coarsen(lattice, factors[i])
                            : generate_lattice(cfg.seed, problem.noise_count, h_list[i],
                                               n_steps[i], p, 1)
                                  .increments;
                    out.per_h[i] = run_light(scheme, invariant, cfg.spec.x0, h_list[i],
                                             n_steps[i], increments, guard);
                }
            } else {
                for (std::size_t i = 0; i < h_list.size(); ++i) {
                    const BrownianLattice lattice = generate_lattice(
                        cfg.seed, problem.noise_count, h_list[i], n_steps[i], p, 0);
                    out.per_h[i] = run_light(scheme, invariant, cfg.spec.x0, h_list[i],
                                             n_steps[i], lattice.increments, guard);
                }
            }
        } catch (const std::exception& e) {
            out.failed = true;
            out.error = e.what();
        }
        return out;
    }
};

double mean_of(const std::vector<double>& v) { return pairwise_sum(v) / v.size(); }

double stderr_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(sq) / (v.size() - 1);
    return std::sqrt(var / v.size());
}

}  // namespace

StudyReport run_study(const StudyConfig& cfg) {
    const Engine engine(cfg);

    const int paths = cfg.paths;
    std::vector<PathOutcome> outcomes(paths);
    const int workers = std::max(1, std::min(cfg.threads, paths));
    if (workers == 1) {
        for (int p = 0; p < paths; ++p) outcomes[p] = engine.run_path(p);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int p = w; p < paths; p += workers)
                    outcomes[p] = engine.run_path(static_cast<std::uint64_t>(p));
            });
        for (std::thread& t : pool) t.join();
    }

    std::vector<int> ok;
    ok.reserve(paths);
    std::string first_error;
    for (int p = 0; p < paths; ++p) {
        if (outcomes[p].failed) {
            if (first_error.empty()) first_error = outcomes[p].error;
        } else {
            ok.push_back(p);
        }
    }
    const int failed = paths - static_cast<int>(ok.size());
    if (static_cast<double>(failed) > 0.001 * paths || ok.empty())
        throw StudyFailureError("study: " + std::to_string(failed) + "/" +
                                std::to_string(paths) + " paths failed; first: " + first_error);

    StudyReport report;
    report.mode = cfg.mode;
    report.total_paths = paths;
    report.failed_paths = failed;
    const bool has_strong = engine.need_reference && cfg.common_random_numbers;
    const bool has_weak = engine.need_reference && cfg.mode != StudyMode::strong;
    if (has_weak)
        for (const WeakFunctional& f : engine.psi) report.weak_names.push_back(f.name);

    // Reference magnitudes, shared by every h.
    double ref_norm = 0.0;
    std::vector<double> psi_ref_mean(engine.psi.size(), 0.0);
    if (engine.need_reference) {
        std::vector<double> buf(ok.size());
        for (std::size_t j = 0; j < ok.size(); ++j)
            buf[j] = dot(outcomes[ok[j]].ref_endpoint, outcomes[ok[j]].ref_endpoint);
        ref_norm = std::sqrt(mean_of(buf));
        for (std::size_t q = 0; q < engine.psi.size(); ++q) {
            for (std::size_t j = 0; j < ok.size(); ++j)
                buf[j] = engine.psi[q].fn(outcomes[ok[j]].ref_endpoint);
            psi_ref_mean[q] = mean_of(buf);
        }
    }

    for (std::size_t i = 0; i < engine.h_list.size(); ++i) {
        StudyRow row;
        row.h = engine.h_list[i];
        row.strong_error = kNan;
        row.strong_rel_error = kNan;
        row.invariant_drift = kNan;
        row.rms_step_drift = kNan;
        row.mc_stderr = kNan;

        std::vector<double> buf(ok.size());

        if (has_strong) {
            for (std::size_t j = 0; j < ok.size(); ++j) {
                const Vec diff =
                    outcomes[ok[j]].ref_endpoint - outcomes[ok[j]].per_h[i].endpoint;
                buf[j] = dot(diff, diff);
            }
            const double mean_sq = mean_of(buf);
            row.strong_error = std::sqrt(mean_sq);
            row.strong_rel_error = ref_norm > 0.0 ? row.strong_error / ref_norm : kNan;
            // Delta method: stderr of sqrt(mean of e^2).
            row.mc_stderr = row.strong_error > 0.0
                                ? stderr_of(buf, mean_sq) / (2.0 * row.strong_error)
                                : 0.0;
        }

        if (has_weak) {
            for (std::size_t q = 0; q < engine.psi.size(); ++q) {
                double err = 0.0, se = 0.0;
                if (cfg.common_random_numbers) {
                    for (std::size_t j = 0; j < ok.size(); ++j)
                        buf[j] = engine.psi[q].fn(outcomes[ok[j]].ref_endpoint) -
                                 engine.psi[q].fn(outcomes[ok[j]].per_h[i].endpoint);
                    const double mean = mean_of(buf);
                    err = std::abs(mean);
                    se = stderr_of(buf, mean);
                } else {
                    for (std::size_t j = 0; j < ok.size(); ++j)
                        buf[j] = engine.psi[q].fn(outcomes[ok[j]].per_h[i].endpoint);
                    const double mean_scheme = mean_of(buf);
                    const double se_scheme = stderr_of(buf, mean_scheme);
                    err = std::abs(psi_ref_mean[q] - mean_scheme);
                    se = std::sqrt(se_scheme * se_scheme);  // reference noise shared over h
                }
                if (cfg.relative_errors && psi_ref_mean[q] != 0.0) {
                    err /= std::abs(psi_ref_mean[q]);
                    se /= std::abs(psi_ref_mean[q]);
                }
                if (se > 0.3 * err) {
                    std::ostringstream warning;
                    warning << "weak error for " << engine.psi[q].name << " at h = " << row.h
                            << " has MC stderr above 30% of the estimate; bias not resolved at "
                            << ok.size() << " paths";
                    report.warnings.push_back(warning.str());
                }
                row.weak_errors.push_back(err);
                row.weak_stderrs.push_back(se);
            }
            if (!has_strong && !row.weak_stderrs.empty()) row.mc_stderr = row.weak_stderrs[0];
        }

        for (std::size_t j = 0; j < ok.size(); ++j) buf[j] = outcomes[ok[j]].per_h[i].max_drift;
        row.invariant_drift = mean_of(buf);
        if (cfg.mode == StudyMode::invariant) {
            row.mc_stderr = stderr_of(buf, row.invariant_drift);
            double total_sq = 0.0;
            std::int64_t total_steps = 0;
            for (std::size_t j = 0; j < ok.size(); ++j) {
                buf[j] = outcomes[ok[j]].per_h[i].sum_sq_step_drift;
                total_steps += outcomes[ok[j]].per_h[i].steps;
            }
            total_sq = pairwise_sum(buf);
            row.rms_step_drift = total_steps > 0 ? std::sqrt(total_sq / total_steps) : kNan;
        }

        report.rows.push_back(std::move(row));
    }

    auto try_fit = [&](const std::string& name, auto getter) {
        std::vector<double> values;
        for (const StudyRow& row : report.rows) {
            const double v = getter(row);
            if (!(v > 0.0) || !std::isfinite(v)) return;
            values.push_back(v);
        }
        if (values.size() >= 2) report.slopes[name] = fit_slope(engine.h_list, values);
    };
    try_fit("strong_error", [](const StudyRow& r) { return r.strong_error; });
    try_fit("strong_rel_error", [](const StudyRow& r) { return r.strong_rel_error; });
    for (std::size_t q = 0; q < report.weak_names.size(); ++q)
        try_fit("weak_error_" + report.weak_names[q],
                [q](const StudyRow& r) { return r.weak_errors[q]; });
    try_fit("invariant_drift", [](const StudyRow& r) { return r.invariant_drift; });
    try_fit("rms_step_drift", [](const StudyRow& r) { return r.rms_step_drift; });

    return report;
}

StudyReport strong_error_study(StudyConfig cfg) {
    cfg.mode = StudyMode::strong;
    return run_study(cfg);
}

StudyReport weak_error_study(StudyConfig cfg) {
    cfg.mode = StudyMode::weak;
    return run_study(cfg);
}

StudyReport invariant_drift_study(StudyConfig cfg) {
    cfg.mode = StudyMode::invariant;
    return run_study(cfg);
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string to_csv(const StudyReport& report) {
    std::ostringstream out;
    out << "h,strong_error,strong_rel_error";
    for (const std::string& name : report.weak_names) out << ",weak_error_" << name;
    out << ",invariant_drift";
    const bool rms = report.mode == StudyMode::invariant;
    if (rms) out << ",rms_step_drift";
    out << ",mc_stderr\n";

    for (const StudyRow& row : report.rows) {
        out << fmt(row.h) << ',' << fmt(row.strong_error) << ',' << fmt(row.strong_rel_error);
        for (double w : row.weak_errors) out << ',' << fmt(w);
        out << ',' << fmt(row.invariant_drift);
        if (rms) out << ',' << fmt(row.rms_step_drift);
        out << ',' << fmt(row.mc_stderr) << '\n';
    }
    for (const auto& [column, slope] : report.slopes)
        out << "# slope_" << column << '=' << fmt(slope) << '\n';
    return out.str();
}

void write_csv(const StudyReport& report, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("write_csv: cannot open '" + path + "'");
    file << to_csv(report);
    if (!file) throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

std::string to_csv(const Trajectory& trajectory) {
    std::ostringstream out;
    const std::size_t dim = trajectory.states.empty() ? 0 : trajectory.states.front().size();
    out << "t";
    for (std::size_t k = 1; k <= dim; ++k) out << ",x" << k;
    out << ",invariant\n";
    for (std::size_t j = 0; j < trajectory.times.size(); ++j) {
        out << fmt(trajectory.times[j]);
        for (double v : trajectory.states[j]) out << ',' << fmt(v);
        out << ',' << fmt(trajectory.invariant_values[j]) << '\n';
    }
    return out.str();
}

void write_csv(const Trajectory& trajectory, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("write_csv: cannot open '" + path + "'");
    file << to_csv(trajectory);
    if (!file) throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

}  // namespace sgsde
