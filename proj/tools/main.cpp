#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgsde/errors.hpp"
#include "sgsde/problems.hpp"
#include "sgsde/study.hpp"

namespace {

using namespace sgsde;

SchemeKind parse_scheme(const std::string& name) {
    if (name == "conservative") return SchemeKind::conservative;
    if (name == "milstein") return SchemeKind::milstein;
    if (name == "euler_maruyama") return SchemeKind::euler_maruyama;
    if (name == "stochastic_midpoint") return SchemeKind::stochastic_midpoint;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

DiscreteGradient parse_dg(const std::string& name) {
    if (name == "exact") return DiscreteGradient::exact();
    if (name == "separable") return DiscreteGradient::separable();
    if (name.rfind("quadrature:", 0) == 0)
        return DiscreteGradient::quadrature(builtin_rule(name.substr(11)));
    throw std::invalid_argument("unknown discrete-gradient strategy '" + name +
                                "' (expected exact, separable or quadrature:<rule>)");
}

std::vector<double> parse_h_list(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string token = csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (!token.empty()) out.push_back(std::stod(token));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty h list");
    return out;
}

std::vector<WeakFunctional> select_psi(const ProblemSpec& spec,
                                       const std::vector<std::string>& names) {
    if (names.empty()) return {};
    std::vector<WeakFunctional> out;
    for (const std::string& name : names) {
        bool found = false;
        for (const WeakFunctional& f : spec.weak_functionals) {
            if (f.name == name) {
                out.push_back(f);
                found = true;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("problem '" + spec.name + "' has no functional '" +
                                        name + "'");
    }
    return out;
}

struct StudyOptions {
    std::string problem;
    double c1 = 1.0, c2 = 0.5;
    std::string scheme = "conservative";
    std::string dg = "exact";
    std::string h_list;
    int paths = 1000;
    std::string ref_scheme = "stochastic_midpoint";
    double h_ref = 6.103515625e-05;
    std::uint64_t seed = 0;
    std::string mode = "both";
    std::vector<std::string> psi;
    std::string out;
    int truncate_k = -1;
    bool relative = false;
    bool no_crn = false;
    int threads = 1;
};

void add_study_flags(CLI::App* cmd, StudyOptions& opt, bool with_reference) {
    cmd->add_option("--problem", opt.problem, "problem name (see list-problems)")->required();
    cmd->add_option("--c1", opt.c1, "pendulum noise intensity c1");
    cmd->add_option("--c2", opt.c2, "pendulum noise intensity c2");
    cmd->add_option("--scheme", opt.scheme,
                    "conservative | milstein | euler_maruyama | stochastic_midpoint");
    cmd->add_option("--dg", opt.dg, "exact | separable | quadrature:<rule>");
    cmd->add_option("--h-list", opt.h_list, "comma-separated step sizes")->required();
    cmd->add_option("--paths", opt.paths, "Monte Carlo path count");
    cmd->add_option("--seed", opt.seed, "base RNG seed");
    cmd->add_option("--truncate-k", opt.truncate_k, "enable increment truncation with this k");
    cmd->add_option("--threads", opt.threads, "worker threads (result is thread-count independent)");
    cmd->add_option("--out", opt.out, "output CSV path")->required();
    if (with_reference) {
        cmd->add_option("--ref-scheme", opt.ref_scheme, "stochastic_midpoint | milstein");
        cmd->add_option("--h-ref", opt.h_ref, "reference (fine) step size");
        cmd->add_option("--mode", opt.mode, "strong | weak | both");
        cmd->add_option("--psi", opt.psi, "weak functionals by name (default: all built-ins)");
        cmd->add_flag("--relative", opt.relative, "report relative errors");
        cmd->add_flag("--no-crn", opt.no_crn, "independent randomness for scheme vs reference");
    }
}

StudyConfig build_study_config(const StudyOptions& opt, StudyMode mode, bool composition) {
    StudyConfig cfg;
    cfg.spec = problem_by_name(opt.problem, opt.c1, opt.c2);
    cfg.scheme.kind = parse_scheme(opt.scheme);
    cfg.scheme.dg_strategy = parse_dg(opt.dg);
    if (opt.truncate_k >= 0) cfg.scheme.truncation = TruncationPolicy{true, opt.truncate_k};
    cfg.use_composition = composition;
    cfg.h_list = parse_h_list(opt.h_list);
    cfg.paths = opt.paths;
    cfg.ref_scheme = parse_scheme(opt.ref_scheme);
    cfg.h_ref = opt.h_ref;
    cfg.seed = opt.seed;
    cfg.mode = mode;
    cfg.weak_functionals = select_psi(cfg.spec, opt.psi);
    cfg.relative_errors = opt.relative;
    cfg.common_random_numbers = !opt.no_crn;
    cfg.threads = opt.threads;
    return cfg;
}

StudyMode parse_mode(const std::string& name) {
    if (name == "strong") return StudyMode::strong;
    if (name == "weak") return StudyMode::weak;
    if (name == "both") return StudyMode::both;
    throw std::invalid_argument("unknown mode '" + name + "' (expected strong, weak or both)");
}

void report_summary(const StudyReport& report, const std::string& out_path) {
    for (const std::string& warning : report.warnings) std::cerr << "warning: " << warning << "\n";
    if (report.failed_paths > 0)
        std::cerr << "note: " << report.failed_paths << "/" << report.total_paths
                  << " paths failed and were excluded\n";
    for (const auto& [column, slope] : report.slopes)
        std::cout << "slope " << column << " = " << slope << "\n";
    std::cout << "wrote " << out_path << "\n";
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Invariant-preserving integrators for Stratonovich SDEs with a conserved "
                 "quantity: single trajectories and Monte Carlo order studies"};
    app.require_subcommand(1);
    // --h is a step size everywhere here, so help lives on --help alone.
    app.set_help_flag("--help", "print help and exit");

    auto* list_cmd = app.add_subcommand("list-problems", "print built-in problems");
    list_cmd->set_help_flag("--help", "print help and exit");

    // Single trajectory.
    struct {
        std::string problem;
        double c1 = 1.0, c2 = 0.5;
        std::string scheme = "conservative";
        std::string dg = "exact";
        double h = 0.015625;
        std::int64_t steps = 64;
        std::uint64_t seed = 0;
        int truncate_k = -1;
        std::string out;
    } run_opt;
    auto* run_cmd = app.add_subcommand("run", "integrate one path and write t,x,invariant CSV");
    run_cmd->set_help_flag("--help", "print help and exit");
    run_cmd->add_option("--problem", run_opt.problem)->required();
    run_cmd->add_option("--c1", run_opt.c1);
    run_cmd->add_option("--c2", run_opt.c2);
    run_cmd->add_option("--scheme", run_opt.scheme);
    run_cmd->add_option("--dg", run_opt.dg);
    run_cmd->add_option("--h", run_opt.h)->required();
    run_cmd->add_option("--steps", run_opt.steps)->required();
    run_cmd->add_option("--seed", run_opt.seed);
    run_cmd->add_option("--truncate-k", run_opt.truncate_k);
    run_cmd->add_option("--out", run_opt.out)->required();

    StudyOptions order_opt;
    auto* order_cmd = app.add_subcommand("order-study",
                                         "strong/weak convergence orders vs a fine reference");
    order_cmd->set_help_flag("--help", "print help and exit");
    add_study_flags(order_cmd, order_opt, true);

    StudyOptions drift_opt;
    auto* drift_cmd = app.add_subcommand("invariant-study",
                                         "invariant drift and RMS step increment per h");
    drift_cmd->set_help_flag("--help", "print help and exit");
    add_study_flags(drift_cmd, drift_opt, false);

    StudyOptions split_opt;
    std::string split_plan = "pairwise";
    auto* split_cmd = app.add_subcommand("split-study",
                                         "order study for the pairwise composition scheme");
    split_cmd->set_help_flag("--help", "print help and exit");
    add_study_flags(split_cmd, split_opt, true);
    split_cmd->add_option("--plan", split_plan, "splitting plan (pairwise)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*list_cmd) {
        std::cout << "pendulum        d=2 m=2  I = p^2/2 - cos q         params: --c1 --c2\n"
                  << "lotka_volterra  d=3 m=3  I = x1 x2 x3              positive octant\n"
                  << "quartic         d=2 m=1  I = (x1^4 + x2^4)/4       synthetic fixture\n";
        return 0;
    }

    if (*run_cmd) {
        const ProblemSpec spec = problem_by_name(run_opt.problem, run_opt.c1, run_opt.c2);
        SchemeConfig scheme;
        scheme.kind = parse_scheme(run_opt.scheme);
        scheme.dg_strategy = parse_dg(run_opt.dg);
        if (run_opt.truncate_k >= 0)
            scheme.truncation = TruncationPolicy{true, run_opt.truncate_k};
        const Stepper stepper = make_stepper(spec.problem, spec.explicit_form, scheme);
        const BrownianLattice lattice = generate_lattice(
            run_opt.seed, spec.problem.noise_count, run_opt.h, run_opt.steps);
        const Trajectory traj = integrate_path(stepper, spec.problem.invariant, spec.x0,
                                               run_opt.h, run_opt.steps, lattice.increments);
        write_csv(traj, run_opt.out);
        std::cout << "wrote " << run_opt.out << "\n";
        return 0;
    }

    if (*order_cmd) {
        const StudyConfig cfg = build_study_config(order_opt, parse_mode(order_opt.mode), false);
        const StudyReport report = run_study(cfg);
        write_csv(report, order_opt.out);
        report_summary(report, order_opt.out);
        return 0;
    }

    if (*drift_cmd) {
        const StudyConfig cfg = build_study_config(drift_opt, StudyMode::invariant, false);
        const StudyReport report = run_study(cfg);
        write_csv(report, drift_opt.out);
        report_summary(report, drift_opt.out);
        return 0;
    }

    if (*split_cmd) {
        if (split_plan != "pairwise")
            throw std::invalid_argument("unknown plan '" + split_plan + "'");
        const StudyConfig cfg = build_study_config(split_opt, parse_mode(split_opt.mode), true);
        const StudyReport report = run_study(cfg);
        write_csv(report, split_opt.out);
        report_summary(report, split_opt.out);
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const SingularDenominatorError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const NonConvergenceError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const DomainError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const StudyFailureError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
