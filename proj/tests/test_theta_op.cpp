#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "kdv/errors.hpp"
#include "kdv/grid.hpp"
#include "kdv/ops.hpp"
#include "kdv/theta_op.hpp"

using namespace kdv;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(n);
    for (auto& x : a) x = u(rng);
    return a;
}

// Brute-force spectral application: a_hat(xi_k) = sum_j a_j e^{+2 pi i j k/J},
// multiplied by the operator symbol, transformed back. O(J^2), used only as
// an oracle against the stencil path.
std::vector<double> apply_via_dft(const ThetaOperator& op, const std::vector<double>& a) {
    const std::size_t J = a.size();
    const std::complex<double> i2pi(0.0, 2.0 * std::numbers::pi / static_cast<double>(J));
    std::vector<std::complex<double>> hat(J);
    for (std::size_t k = 0; k < J; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < J; ++j)
            acc += a[j] * std::exp(i2pi * static_cast<double>(j * k % J));
        hat[k] = acc * op.symbol(k);
    }
    std::vector<double> out(J);
    for (std::size_t j = 0; j < J; ++j) {
        std::complex<double> acc = 0.0;
        for (std::size_t k = 0; k < J; ++k)
            acc += hat[k] * std::exp(-i2pi * static_cast<double>(j * k % J));
        out[j] = acc.real() / static_cast<double>(J);
    }
    return out;
}

} // namespace

TEST_CASE("symbol: zero frequency, Nyquist value, modulus lower bound") {
    const PeriodicGrid g(1.0, 64);
    for (double theta : {0.0, 0.3, 1.0}) {
        for (double r : {0.01, 1.0, 100.0}) {
            const double dt = r * g.dx * g.dx * g.dx;
            const ThetaOperator op(g, theta, dt);
            CHECK(op.r() == doctest::Approx(r).epsilon(1e-14));

            CHECK(op.symbol(0) == std::complex<double>(1.0, 0.0));

            // xi = 1/2: e^{-i pi/2} sin^3 = -i, so the symbol is real 1 + 8 theta r
            const std::complex<double> nyq = op.symbol(32);
            CHECK(nyq.real() == doctest::Approx(1.0 + 8.0 * theta * r).epsilon(1e-13));
            CHECK(std::abs(nyq.imag()) <= 1e-12 * (1.0 + 8.0 * theta * r));

            for (std::size_t k = 0; k < 64; ++k) {
                const double mod2 = std::norm(op.symbol(k));
                CHECK(mod2 >= 1.0 - 1e-14);
                // |symbol|^2 = 1 + 16 theta r sin^4 (1 + 4 theta r sin^2)
                const double s = std::sin(std::numbers::pi * static_cast<double>(k) / 64.0);
                const double s2 = s * s;
                const double closed = 1.0 + 16.0 * theta * r * s2 * s2 * (1.0 + 4.0 * theta * r * s2);
                CHECK(mod2 == doctest::Approx(closed).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("theta = 0 degenerates to the identity") {
    const PeriodicGrid g(2.0, 32);
    const ThetaOperator op(g, 0.0, 0.5);
    const std::vector<double> a = random_vector(32, 5);
    CHECK(op.apply(a) == a);
    const std::vector<double> s = op.solve(a);
    for (std::size_t j = 0; j < 32; ++j)
        CHECK(std::abs(s[j] - a[j]) <= 1e-14 * std::max(1.0, std::abs(a[j])));
    const std::vector<double> sb = op.solve(a, SolvePath::Banded);
    for (std::size_t j = 0; j < 32; ++j)
        CHECK(std::abs(sb[j] - a[j]) <= 1e-14 * std::max(1.0, std::abs(a[j])));
}

TEST_CASE("constants pass through apply untouched for any theta") {
    const PeriodicGrid g(0.5, 128);
    const std::vector<double> k(128, -2.25);
    for (double theta : {0.0, 0.5, 1.0}) {
        const ThetaOperator op(g, theta, 1.0); // r = dt/dx^3 is huge on purpose
        CHECK(op.apply(k) == k);
    }
}

TEST_CASE("stencil application matches the spectral oracle") {
    const PeriodicGrid g(1.0, 64);
    for (double theta : {0.25, 1.0}) {
        for (double r : {0.1, 10.0}) {
            const ThetaOperator op(g, theta, r * g.dx * g.dx * g.dx);
            const std::vector<double> a = random_vector(64, 17);
            const std::vector<double> direct = op.apply(a);
            const std::vector<double> spectral = apply_via_dft(op, a);
            const double scale = std::max(1.0, norm_linf(direct));
            for (std::size_t j = 0; j < 64; ++j)
                CHECK(std::abs(direct[j] - spectral[j]) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("solve inverts apply on both paths") {
    const PeriodicGrid g(1.0, 128);
    for (double theta : {0.5, 1.0}) {
        for (double r : {0.01, 1.0, 100.0}) {
            const ThetaOperator op(g, theta, r * g.dx * g.dx * g.dx);
            const std::vector<double> a = random_vector(128, 31);
            const std::vector<double> rhs = op.apply(a);
            const double scale = std::max(1.0, norm_linf(a));

            for (SolvePath path : {SolvePath::Spectral, SolvePath::Banded}) {
                const std::vector<double> rec = op.solve(rhs, path);
                for (std::size_t j = 0; j < 128; ++j)
                    CHECK(std::abs(rec[j] - a[j]) <= 1e-12 * scale);
            }

            // residual of the forward problem
            const std::vector<double> x = op.solve(a);
            const std::vector<double> back = op.apply(x);
            const double rhs_norm = norm_l2_delta(g, a);
            std::vector<double> res(128);
            for (std::size_t j = 0; j < 128; ++j) res[j] = back[j] - a[j];
            CHECK(norm_l2_delta(g, res) <= 1e-12 * std::max(1.0, rhs_norm));
        }
    }
}

TEST_CASE("spectral and banded routes agree on J = 512") {
    const PeriodicGrid g(3.0, 512);
    const ThetaOperator op(g, 1.0, 10.0 * g.dx * g.dx * g.dx);
    const std::vector<double> rhs = random_vector(512, 77);
    const std::vector<double> xs = op.solve(rhs, SolvePath::Spectral);
    const std::vector<double> xb = op.solve(rhs, SolvePath::Banded);
    const double scale = std::max(1.0, norm_linf(xs));
    for (std::size_t j = 0; j < 512; ++j) CHECK(std::abs(xs[j] - xb[j]) <= 1e-11 * scale);
}

TEST_CASE("norm relations: zero input, theta = 0, random sweep") {
    const PeriodicGrid g(1.0, 256);

    const ThetaOperator op0(g, 0.0, 1e-3);
    const std::vector<double> z(256, 0.0);
    const NormBoundsReport zr = verify_norm_bounds(op0, z);
    CHECK(zr.norm_a_sq == 0.0);
    CHECK(zr.norm_Aa_sq == 0.0);
    CHECK(zr.lower_slack == 0.0);
    CHECK(zr.upper_slack == 0.0);
    CHECK(zr.decomp_residual == 0.0);

    const std::vector<double> a = random_vector(256, 41);
    const NormBoundsReport id = verify_norm_bounds(op0, a);
    CHECK(id.lower_slack == 0.0); // apply is the identity at theta = 0
    CHECK(id.upper_slack == 0.0);
    CHECK(id.decomp_residual <= 1e-15);

    const ThetaOperator op(g, 1.0, 10.0 * g.dx * g.dx * g.dx);
    const NormBoundsReport rep = verify_norm_bounds(op, a);
    const double scale = std::max(1.0, rep.norm_Aa_sq);
    CHECK(rep.lower_slack >= -1e-12 * scale);
    CHECK(rep.upper_slack >= -1e-12 * scale);
    CHECK(rep.decomp_residual <= 1e-12);
}

TEST_CASE("set_dt rescales without rebuilding") {
    const PeriodicGrid g(1.0, 64);
    ThetaOperator op(g, 1.0, 1e-3);
    const std::vector<double> rhs = random_vector(64, 53);
    op.solve(rhs); // force the plan into existence at the old dt

    op.set_dt(2e-3);
    CHECK(op.dt() == 2e-3);
    CHECK(op.r() == doctest::Approx(2e-3 / (g.dx * g.dx * g.dx)).epsilon(1e-14));

    const ThetaOperator fresh(g, 1.0, 2e-3);
    const std::vector<double> a = op.solve(rhs);
    const std::vector<double> b = fresh.solve(rhs);
    for (std::size_t j = 0; j < 64; ++j)
        CHECK(std::abs(a[j] - b[j]) <= 1e-14 * std::max(1.0, std::abs(b[j])));

    CHECK_THROWS_AS(op.set_dt(-1.0), UsageError);
    CHECK_THROWS_AS(ThetaOperator(g, 1.0, std::nan("")), UsageError);
}

TEST_CASE("explicit part is dominated by the implicit part under the dt bound") {
    // I - (1-theta) dt D3 never outgrows I + theta dt D3 in l2 as long as
    // dt (1 - 2 theta) <= dx^3 / 4; checked through apply with the negated
    // weight, which realizes the explicit operator
    const PeriodicGrid g(1.0, 64);
    const double dx3 = g.dx * g.dx * g.dx;
    for (double theta : {0.0, 0.25, 0.49}) {
        const double dt = 0.999 * dx3 / (4.0 * (1.0 - 2.0 * theta));
        const ThetaOperator implicit_op(g, theta, dt);
        const ThetaOperator explicit_op(g, -(1.0 - theta), dt);
        for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
            const std::vector<double> a = random_vector(64, 1000 + seed);
            const double num = norm_l2_delta(g, explicit_op.apply(a));
            const double den = norm_l2_delta(g, implicit_op.apply(a));
            CHECK(num <= den * (1.0 + 1e-12));
        }
    }
}
