#include "sgsde/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sgsde/linalg.hpp"

namespace sgsde {

double truncation_bound(double h, int k) {
    if (k < 0) throw std::invalid_argument("truncation_bound: k must be >= 0");
    return std::sqrt(2.0 * k * std::abs(std::log(h)));
}

double truncate_increment(double w, double h, const TruncationPolicy& policy) {
    if (!policy.enabled) return w;
    // A_h degenerates for h >= 1; studies never step that coarsely.
    if (h >= 1.0) return w;
    const double bound = truncation_bound(h, policy.k);
    const double sqrt_h = std::sqrt(h);
    double xi = w / sqrt_h;
    if (xi > bound) xi = bound;
    if (xi < -bound) xi = -bound;
    return sqrt_h * xi;
}

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> philox_round(const std::array<std::uint32_t, 4>& ctr,
                                                 const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
            static_cast<std::uint32_t>(p0)};
}

}  // namespace

std::array<std::uint32_t, 4> Philox4x32::block(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key) {
    for (int round = 0;;) {
        counter = philox_round(counter, key);
        if (++round == 10) break;
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return counter;
}

double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint32_t channel,
                       std::uint64_t step, std::uint32_t stream) {
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    const std::array<std::uint32_t, 4> counter = {
        static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
        static_cast<std::uint32_t>(path),
        (channel & 0xffu) | ((stream & 0xffu) << 8) |
            (static_cast<std::uint32_t>(path >> 32) << 16)};
    const auto block = Philox4x32::block(counter, key);

    const std::uint64_t bits_a = (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
    const std::uint64_t bits_b = (static_cast<std::uint64_t>(block[2]) << 32) | block[3];
    // (0,1) uniforms at 53-bit resolution, offset half a ulp away from 0.
    const double u1 = (static_cast<double>(bits_a >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (static_cast<double>(bits_b >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

BrownianLattice generate_lattice(std::uint64_t seed, int noise_count, double h_fine,
                                 std::int64_t n_fine, std::uint64_t path,
                                 std::uint32_t stream) {
    if (h_fine <= 0.0) throw std::invalid_argument("generate_lattice: h_fine must be > 0");
    if (n_fine < 1) throw std::invalid_argument("generate_lattice: n_fine must be >= 1");

    BrownianLattice lattice;
    lattice.seed = seed;
    lattice.path = path;
    lattice.noise_count = noise_count;
    lattice.fine_step = h_fine;
    lattice.n_fine = n_fine;
    lattice.increments.assign(noise_count, std::vector<double>(n_fine));

    const double sqrt_h = std::sqrt(h_fine);
    for (int r = 0; r < noise_count; ++r)
        for (std::int64_t j = 0; j < n_fine; ++j)
            lattice.increments[r][j] =
                sqrt_h * standard_normal(seed, path, static_cast<std::uint32_t>(r),
                                         static_cast<std::uint64_t>(j), stream);
    return lattice;
}

std::vector<std::vector<double>> coarsen(const BrownianLattice& lattice, std::int64_t factor) {
    if (factor < 1 || lattice.n_fine % factor != 0)
        throw std::invalid_argument("coarsen: factor must divide n_fine");

    const std::int64_t n_coarse = lattice.n_fine / factor;
    std::vector<std::vector<double>> coarse(lattice.noise_count, std::vector<double>(n_coarse));
    for (int r = 0; r < lattice.noise_count; ++r) {
        const std::vector<double>& fine = lattice.increments[r];
        for (std::int64_t j = 0; j < n_coarse; ++j) {
            double sum = 0.0;
            for (std::int64_t i = j * factor; i < (j + 1) * factor; ++i) sum += fine[i];
            coarse[r][j] = sum;
        }
    }
    return coarse;
}

MomentReport moment_report(const std::vector<double>& raw_increments, double h, int k) {
    if (raw_increments.size() < 10000)
        throw std::invalid_argument("moment_report: need at least 1e4 samples");

    const std::size_t n = raw_increments.size();
    const TruncationPolicy policy{true, k};

    MomentReport report;
    report.samples = static_cast<std::int64_t>(n);
    report.h = h;
    report.k = k;
    report.bound = std::sqrt(h) * truncation_bound(h, k);

    std::vector<double> m1(n), m2(n), m3(n), gap(n);
    std::size_t clipped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = raw_increments[i];
        const double t = truncate_increment(w, h, policy);
        if (t != w) ++clipped;
        m1[i] = t;
        m2[i] = t * t;
        m3[i] = t * t * t;
        gap[i] = (t - w) * (t - w);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    report.mean = pairwise_sum(m1) * inv_n;
    report.second_moment = pairwise_sum(m2) * inv_n;
    report.third_moment = pairwise_sum(m3) * inv_n;
    report.truncation_gap = pairwise_sum(gap) * inv_n;
    report.clipped_fraction = static_cast<double>(clipped) * inv_n;
    return report;
}

}  // namespace sgsde
