#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sgsde/linalg.hpp"
#include "sgsde/noise.hpp"

using namespace sgsde;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Reference vectors from the Random123 distribution (kat_vectors).
    auto out = Philox4x32::block({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);

    out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                            {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);

    out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("lattice regeneration is bit-identical") {
    const BrownianLattice a = generate_lattice(42, 2, 0.01, 128, 7);
    const BrownianLattice b = generate_lattice(42, 2, 0.01, 128, 7);
    REQUIRE(a.increments.size() == 2);
    for (int r = 0; r < 2; ++r)
        for (int j = 0; j < 128; ++j) CHECK(a.increments[r][j] == b.increments[r][j]);

    // Distinct paths and channels give different draws.
    const BrownianLattice c = generate_lattice(42, 2, 0.01, 128, 8);
    CHECK(a.increments[0][0] != c.increments[0][0]);
    CHECK(a.increments[0][0] != a.increments[1][0]);
}

TEST_CASE("increment sample moments match N(0, h_fine)") {
    const double h = 0.01;
    const std::int64_t n = 1000000;
    const BrownianLattice lattice = generate_lattice(2024, 1, h, n);
    const std::vector<double>& w = lattice.increments[0];

    const double mean = pairwise_sum(w) / static_cast<double>(n);
    CHECK(std::abs(mean) < 4e-4);  // 4 sigma of sd/sqrt(N) = 0.1/1000

    std::vector<double> sq(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) sq[i] = w[i] * w[i];
    const double var = pairwise_sum(sq) / static_cast<double>(n);
    CHECK(var == doctest::Approx(h).epsilon(0.01));
}

TEST_CASE("streams for distinct paths are uncorrelated") {
    const std::int64_t n = 100000;
    const BrownianLattice a = generate_lattice(5, 1, 1.0, n, 0);
    const BrownianLattice b = generate_lattice(5, 1, 1.0, n, 1);
    std::vector<double> prod(n);
    for (std::int64_t j = 0; j < n; ++j) prod[j] = a.increments[0][j] * b.increments[0][j];
    const double corr = pairwise_sum(prod) / static_cast<double>(n);
    CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("coarsen block sums") {
    BrownianLattice lattice;
    lattice.noise_count = 1;
    lattice.fine_step = 0.25;
    lattice.n_fine = 4;
    lattice.increments = {{0.1, -0.2, 0.3, 0.4}};

    SUBCASE("factor 1 is the identity") {
        const auto coarse = coarsen(lattice, 1);
        CHECK(coarse[0] == lattice.increments[0]);
    }
    SUBCASE("factor n_fine leaves the total displacement") {
        const auto coarse = coarsen(lattice, 4);
        REQUIRE(coarse[0].size() == 1);
        CHECK(coarse[0][0] == doctest::Approx(0.6).epsilon(1e-15));
    }
    SUBCASE("hand-computed block sums") {
        const auto coarse = coarsen(lattice, 2);
        REQUIRE(coarse[0].size() == 2);
        CHECK(coarse[0][0] == doctest::Approx(-0.1).epsilon(1e-15));
        CHECK(coarse[0][1] == doctest::Approx(0.7).epsilon(1e-15));
    }
    SUBCASE("non-divisible factor is rejected") {
        CHECK_THROWS_AS(coarsen(lattice, 3), std::invalid_argument);
    }
}

TEST_CASE("coarsening preserves the total displacement") {
    const BrownianLattice lattice = generate_lattice(11, 1, 0.5, 1024);
    const double fine_total = pairwise_sum(lattice.increments[0]);
    for (std::int64_t f : {2, 8, 1024}) {
        const auto coarse = coarsen(lattice, f);
        const double total = pairwise_sum(coarse[0]);
        CHECK(std::abs(total - fine_total) <= 1e-15 * std::max(1.0, std::abs(fine_total)));
    }
}

TEST_CASE("truncation clamps the standardized increment") {
    const TruncationPolicy off{false, 2};
    CHECK(truncate_increment(3.7, 0.25, off) == 3.7);

    const TruncationPolicy on{true, 2};
    // h = 0.25, k = 2: A_h = sqrt(4 ln 4) = 2.3548200450309493
    const double w = std::sqrt(0.25) * 3.0;
    CHECK(truncate_increment(w, 0.25, on) == doctest::Approx(1.1774100225154747).epsilon(1e-12));

    // inside the clamp: unchanged
    const double small = std::sqrt(0.25) * 1.5;
    CHECK(truncate_increment(small, 0.25, on) == small);

    // odd and monotone in w
    for (double v : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        CHECK(truncate_increment(-v, 0.25, on) == -truncate_increment(v, 0.25, on));
        CHECK(std::abs(truncate_increment(v, 0.25, on)) <=
              std::abs(truncate_increment(v + 0.1, 0.25, on)) + 1e-15);
    }

    // h >= 1 degenerates to the identity
    CHECK(truncate_increment(2.5, 1.0, on) == 2.5);
    CHECK(truncate_increment(2.5, 4.0, on) == 2.5);
}

TEST_CASE("truncation bound grows as h shrinks") {
    double prev = 0.0;
    for (double h : {0.5, 0.25, 0.125, 0.0625, 0.001}) {
        const double bound = truncation_bound(h, 2);
        CHECK(bound >= prev);
        prev = bound;
    }
    CHECK(truncation_bound(0.5, 0) == 0.0);
    CHECK_THROWS_AS((void)truncation_bound(0.5, -1), std::invalid_argument);
}

TEST_CASE("moment report tracks the truncated-increment bounds") {
    const std::int64_t n = 1000000;
    for (double h : {std::pow(2.0, -4), std::pow(2.0, -6)}) {
        const BrownianLattice lattice = generate_lattice(99, 1, h, n);
        const MomentReport report = moment_report(lattice.increments[0], h, 2);

        // CLT bound: sd of the mean is sqrt(h)/1e3.
        CHECK(std::abs(report.mean) <= 4.0 * std::sqrt(h) / 1000.0);
        CHECK(report.second_moment >= 0.99 * h);
        CHECK(report.second_moment <= 1.01 * h);
        // odd third moment within 4 sigma of 0: Var(w^3) <= E w^6 = 15 h^3
        CHECK(std::abs(report.third_moment) <=
              4.0 * std::sqrt(15.0 * h * h * h / static_cast<double>(n)));
        // mean-square truncation gap below h^3 (observed constant K <= 1)
        CHECK(report.truncation_gap <= h * h * h);
        CHECK(report.bound == doctest::Approx(std::sqrt(h) * truncation_bound(h, 2)));
    }
    CHECK_THROWS_AS(moment_report(std::vector<double>(100, 0.0), 0.25, 2),
                    std::invalid_argument);
}
