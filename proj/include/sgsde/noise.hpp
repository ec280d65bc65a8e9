#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace sgsde {

// Increment truncation from the scheme definition: the standardized increment
// xi = w / sqrt(h) is clamped to [-A_h, A_h] with A_h = sqrt(2 k |ln h|).
struct TruncationPolicy {
    bool enabled = false;
    int k = 2;
};

// A_h; defined for 0 < h < 1. h >= 1 degenerates (|ln h| = 0 at h = 1) and is
// treated as "no truncation" by truncate_increment.
double truncation_bound(double h, int k);

double truncate_increment(double w, double h, const TruncationPolicy& policy);

// Philox 4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
// every random number is a pure function of (key, counter), which makes the
// Monte Carlo studies independent of worker count and scheduling.
struct Philox4x32 {
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key);
};

// Standard normal drawn from the Philox block keyed by
// (seed; step, path, channel, stream). Identical keys give identical values.
double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint32_t channel,
                       std::uint64_t step, std::uint32_t stream = 0);

// Seeded fine-grid Brownian increments, one row per noise channel, each entry
// ~ N(0, h_fine). Regeneration from the same key tuple is bit-identical.
struct BrownianLattice {
    std::uint64_t seed = 0;
    std::uint64_t path = 0;
    int noise_count = 0;
    double fine_step = 0.0;
    std::int64_t n_fine = 0;
    std::vector<std::vector<double>> increments;  // [noise_count][n_fine]
};

BrownianLattice generate_lattice(std::uint64_t seed, int noise_count, double h_fine,
                                 std::int64_t n_fine, std::uint64_t path = 0,
                                 std::uint32_t stream = 0);

// Block sums of factor consecutive fine increments; factor must divide n_fine.
std::vector<std::vector<double>> coarsen(const BrownianLattice& lattice, std::int64_t factor);

// Empirical moments of truncated increments against the Kh^l bounds:
// odd moments vanish, the second moment tracks h, and the mean-square
// truncation gap E|tr(w) - w|^2 stays below K h^3 for k = 2.
struct MomentReport {
    std::int64_t samples = 0;
    double h = 0.0;
    int k = 0;
    double bound = 0.0;            // sqrt(h) * A_h
    double mean = 0.0;             // E dW_hat
    double second_moment = 0.0;    // E dW_hat^2
    double third_moment = 0.0;     // E dW_hat^3
    double truncation_gap = 0.0;   // E |dW_hat - dW|^2
    double clipped_fraction = 0.0;
};

// raw_increments are N(0, h) samples; the policy with the given k is applied
// internally so the report can compare pre- and post-truncation.
MomentReport moment_report(const std::vector<double>& raw_increments, double h, int k);

}  // namespace sgsde
