#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgsde/problems.hpp"
#include "sgsde/splitting.hpp"
#include "sgsde/steppers.hpp"

namespace sgsde {

enum class StudyMode { strong, weak, both, invariant };

// Monte Carlo convergence study over a list of step sizes. The reference
// solution is integrated once per path on the fine lattice at h_ref and the
// scheme runs on block-summed (coarsened) increments of the same lattice, so
// scheme and reference see the same Brownian path.
struct StudyConfig {
    ProblemSpec spec;
    SchemeConfig scheme;
    bool use_composition = false;  // pairwise-split composition of the conservative scheme

    std::vector<double> h_list;
    int paths = 1000;
    SchemeKind ref_scheme = SchemeKind::stochastic_midpoint;
    double h_ref = 6.103515625e-05;  // 2^-14
    std::uint64_t seed = 0;
    StudyMode mode = StudyMode::both;

    // Defaults to spec.weak_functionals when empty.
    std::vector<WeakFunctional> weak_functionals;

    bool relative_errors = false;        // divide by reference magnitudes
    bool common_random_numbers = true;   // couple scheme paths to the reference
    int threads = 1;
    double horizon = 0.0;  // 0 -> spec.horizon
};

struct StudyRow {
    double h = 0.0;
    double strong_error = 0.0;
    double strong_rel_error = 0.0;
    std::vector<double> weak_errors;
    std::vector<double> weak_stderrs;
    double invariant_drift = 0.0;  // mean over paths of max_n |I(X_n) - I(X_0)|
    double rms_step_drift = 0.0;   // RMS over paths and steps of I(X_{n+1}) - I(X_n)
    double mc_stderr = 0.0;        // stderr of the row's primary error column
};

struct StudyReport {
    std::vector<std::string> weak_names;
    std::vector<StudyRow> rows;  // sorted by descending h
    std::map<std::string, double> slopes;
    std::vector<std::string> warnings;
    StudyMode mode = StudyMode::both;
    int total_paths = 0;
    int failed_paths = 0;

    double slope(const std::string& column) const { return slopes.at(column); }
};

// Engine behind the four study entry points. Throws std::invalid_argument on
// configuration errors (non-dividing step sizes, empty h list) and
// StudyFailureError when more than 0.1% of paths fail.
StudyReport run_study(const StudyConfig& cfg);

StudyReport strong_error_study(StudyConfig cfg);
StudyReport weak_error_study(StudyConfig cfg);
StudyReport invariant_drift_study(StudyConfig cfg);

// Least-squares slope of ln(error) against ln(h); requires >= 2 positive
// points.
double fit_slope(const std::vector<double>& h_list, const std::vector<double>& errors);

// CSV with the fixed header
//   h,strong_error,strong_rel_error,weak_error_<name>...,invariant_drift,mc_stderr
// (invariant studies insert rms_step_drift before mc_stderr), all values at
// full double precision, and one trailing "# slope_<column>=<value>" comment
// per fitted column. Byte-identical for identical configs.
std::string to_csv(const StudyReport& report);
void write_csv(const StudyReport& report, const std::string& path);

// Single-trajectory CSV: t, x1..xd, invariant.
std::string to_csv(const Trajectory& trajectory);
void write_csv(const Trajectory& trajectory, const std::string& path);

}  // namespace sgsde
