#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "kdv/errors.hpp"
#include "kdv/grid.hpp"
#include "kdv/ops.hpp"

using namespace kdv;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(n);
    for (auto& x : a) x = u(rng);
    return a;
}

} // namespace

TEST_CASE("grid constructor validates and fixes dx") {
    CHECK_THROWS_AS(PeriodicGrid(0.0, 8), UsageError);
    CHECK_THROWS_AS(PeriodicGrid(-1.0, 8), UsageError);
    CHECK_THROWS_AS(PeriodicGrid(1.0, 3), UsageError);

    const PeriodicGrid g(1.0, 4);
    CHECK(g.dx == 0.25);
    CHECK(g.x(3) == 0.75);
    // dx*J reproduces L to a rounding error
    const PeriodicGrid h(50.0, 1600);
    CHECK(std::abs(h.dx * 1600.0 - 50.0) <= 1e-15 * 50.0);
}

TEST_CASE("shift is the periodic index map") {
    const PeriodicGrid g(4.0, 4);
    const std::vector<double> a{1.0, 2.0, 3.0, 4.0};

    CHECK(shift(g, a, 0) == a);
    CHECK(shift(g, a, 1) == std::vector<double>{2.0, 3.0, 4.0, 1.0});
    CHECK(shift(g, a, -1) == std::vector<double>{4.0, 1.0, 2.0, 3.0});
    // offsets wrap modulo J, in both directions
    CHECK(shift(g, a, 4) == a);
    CHECK(shift(g, a, 5) == shift(g, a, 1));
    CHECK(shift(g, a, -9) == shift(g, a, -1));
}

TEST_CASE("first differences: constants, one-hot, centered identity") {
    const PeriodicGrid g(2.0, 4); // dx = 0.5

    const std::vector<double> k(4, 3.7);
    for (double d : d_plus(g, k)) CHECK(d == 0.0);
    for (double d : d_minus(g, k)) CHECK(d == 0.0);

    const std::vector<double> e1{0.0, 1.0, 0.0, 0.0};
    CHECK(d_plus(g, e1) == std::vector<double>{2.0, -2.0, 0.0, 0.0});
    CHECK(d_minus(g, e1) == std::vector<double>{0.0, 2.0, -2.0, 0.0});

    // d_center is (shift(+1) - shift(-1)) / (2 dx), entry by entry
    const std::vector<double> a = random_vector(64, 11);
    const PeriodicGrid g64(3.0, 64);
    const std::vector<double> dc = d_center(g64, a);
    const std::vector<double> up = shift(g64, a, 1);
    const std::vector<double> dn = shift(g64, a, -1);
    for (std::size_t j = 0; j < 64; ++j) CHECK(dc[j] == (up[j] - dn[j]) / (2.0 * g64.dx));
}

TEST_CASE("third difference: constants exactly annihilated, one-hot stencil") {
    const PeriodicGrid g(8.0, 8); // dx = 1

    // exact zero, not just small: the stencil must cancel before dividing
    // by dx^3, otherwise constants pick up noise of order eps/dx^3
    const PeriodicGrid gfine(0.5, 256);
    const std::vector<double> k(256, 0.371);
    for (double d : d3(gfine, k)) CHECK(d == 0.0);

    std::vector<double> e0(8, 0.0);
    e0[0] = 1.0;
    const std::vector<double> expected{3.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -3.0};
    CHECK(d3(g, e0) == expected);
}

TEST_CASE("fused third difference matches the composed route") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const PeriodicGrid g(1.0, 64);
        const std::vector<double> a = random_vector(64, seed);
        const std::vector<double> fused = d3(g, a);
        const std::vector<double> composed = d3_composed(g, a);
        const double scale = std::max(1.0, norm_linf(fused));
        for (std::size_t j = 0; j < 64; ++j)
            CHECK(std::abs(fused[j] - composed[j]) <= 1e-13 * scale);
    }
}

TEST_CASE("inner product and norms") {
    const PeriodicGrid g(2.0, 4); // dx = 0.5
    const std::vector<double> z(4, 0.0);
    CHECK(norm_l2_delta(g, z) == 0.0);
    CHECK(norm_linf(z) == 0.0);

    const std::vector<double> a{3.0, 4.0, 0.0, 0.0};
    CHECK(norm_l2_delta(g, a) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));

    const PeriodicGrid h(1.0, 4); // dx = 0.25
    const std::vector<double> p{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> q{4.0, 3.0, 2.0, 1.0};
    CHECK(inner(h, p, q) == doctest::Approx(5.0).epsilon(1e-15));

    CHECK(norm_linf(std::vector<double>{-3.0, 1.0, 2.0}) == 3.0);
}

TEST_CASE("summation by parts: <D+ a, b> = -<a, D- b>") {
    const PeriodicGrid g(7.0, 128);
    const std::vector<double> a = random_vector(128, 21);
    const std::vector<double> b = random_vector(128, 22);
    const double lhs = inner(g, d_plus(g, a), b);
    const double rhs = -inner(g, a, d_minus(g, b));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("compensated sum survives catastrophic cancellation") {
    const std::vector<double> a{1e100, 1.0, -1e100};
    CHECK(compensated_sum(a) == 1.0);
    const std::vector<double> b{1.0, 1e100, -1e100};
    CHECK(compensated_sum(b) == 1.0);
    CHECK(mean(std::vector<double>{1.0, 2.0, 3.0, 4.0}) == 2.5);
}
