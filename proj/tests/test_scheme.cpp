#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kdv/errors.hpp"
#include "kdv/grid.hpp"
#include "kdv/ops.hpp"
#include "kdv/scheme.hpp"

using namespace kdv;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(n);
    for (auto& x : a) x = u(rng);
    return a;
}

// Straight-line transcription of one full step, kept deliberately naive:
// assemble the right-hand side term by term, then solve the implicit system
// densely. Any disagreement with step_kdv is a transcription bug in one of
// the two.
std::vector<double> reference_step(const PeriodicGrid& g, const std::vector<double>& v, double dt,
                                   double theta, double c) {
    const std::size_t J = g.J;
    const double dx = g.dx;
    std::vector<double> rhs(J);
    for (std::size_t j = 0; j < J; ++j) {
        const double vm1 = v[(j + J - 1) % J];
        const double vp1 = v[(j + 1) % J];
        const double vp2 = v[(j + 2) % J];
        const double flux = (vp1 * vp1 / 2.0 - vm1 * vm1 / 2.0) / (2.0 * dx);
        const double d3v = (vp2 - 3.0 * vp1 + 3.0 * v[j] - vm1) / (dx * dx * dx);
        const double visc = (vp1 - 2.0 * v[j] + vm1) / (dx * dx);
        rhs[j] = v[j] - dt * flux - (1.0 - theta) * dt * d3v + 0.5 * c * dt * dx * visc;
    }

    // dense solve of (I + theta dt D3) x = rhs
    const double w = theta * dt / (dx * dx * dx);
    std::vector<double> A(J * J, 0.0);
    for (std::size_t i = 0; i < J; ++i) {
        A[i * J + i] += 1.0 + 3.0 * w;
        A[i * J + (i + 1) % J] += -3.0 * w;
        A[i * J + (i + 2) % J] += w;
        A[i * J + (i + J - 1) % J] += -w;
    }
    std::vector<double> x = rhs;
    for (std::size_t k = 0; k < J; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < J; ++i)
            if (std::abs(A[i * J + k]) > std::abs(A[p * J + k])) p = i;
        if (p != k) {
            for (std::size_t col = 0; col < J; ++col) std::swap(A[k * J + col], A[p * J + col]);
            std::swap(x[k], x[p]);
        }
        REQUIRE(A[k * J + k] != 0.0);
        for (std::size_t i = k + 1; i < J; ++i) {
            const double f = A[i * J + k] / A[k * J + k];
            if (f == 0.0) continue;
            for (std::size_t col = k; col < J; ++col) A[i * J + col] -= f * A[k * J + col];
            x[i] -= f * x[k];
        }
    }
    for (std::size_t k = J; k-- > 0;) {
        for (std::size_t col = k + 1; col < J; ++col) x[k] -= A[k * J + col] * x[col];
        x[k] /= A[k * J + k];
    }
    return x;
}

} // namespace

TEST_CASE("Rusanov coefficient policies") {
    const std::vector<double> v{-3.0, 1.0, 2.0};
    CHECK(RusanovPolicy::fixed(2.5).coefficient(v) == 2.5);
    CHECK(RusanovPolicy::adaptive().coefficient(v) == 3.0);
    const std::vector<double> z(8, 0.0);
    CHECK(RusanovPolicy::adaptive().coefficient(z) == 1e-12); // floor keeps dt finite
}

TEST_CASE("time step selection") {
    const PeriodicGrid g1(16.0, 1600); // dx = 0.01
    CHECK(select_dt(CflPolicy::theoretical(0.1), 1.5, g1, 1.0, 1.0) ==
          doctest::Approx(4.5e-3).epsilon(1e-14));

    const PeriodicGrid g2(16.0, 160); // dx = 0.1
    CHECK(select_dt(CflPolicy::theoretical(0.2), 1.0, g2, 0.0, 1.0) ==
          doctest::Approx(2.0e-4).epsilon(1e-12));

    CHECK(select_dt(CflPolicy::experimental(), 2.0, g1, 1.0, 1.0) ==
          doctest::Approx(5e-3).epsilon(1e-14));

    // the cap wins when dx/c exceeds it
    CHECK(select_dt(CflPolicy::experimental(), 0.5, g1, 1.0, 0.01) == 0.01);
    // vanishing c: the cap is the only bound left
    CHECK(select_dt(CflPolicy::experimental(), 0.0, g1, 1.0, 0.01) == 0.01);
}

TEST_CASE("scheme config validation") {
    SchemeConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    cfg.theta = -0.1;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg.theta = 1.1;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg.theta = 1.0;

    cfg.t_final = -1.0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg.t_final = 0.0; // a zero-length run is a valid degenerate case
    CHECK_NOTHROW(cfg.validate());
    cfg.t_final = 0.1;

    cfg.cfl = CflPolicy::theoretical(1.0);
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg.cfl = CflPolicy::experimental();

    cfg.rusanov = RusanovPolicy::fixed(0.0);
    CHECK_THROWS_AS(cfg.validate(), UsageError);
}

TEST_CASE("Burgers step: fixed points and the hand-evaluated update") {
    const PeriodicGrid g(4.0, 4); // dx = 1
    const std::vector<double> k(4, 1.75);
    CHECK(step_burgers(g, k, 1.0, 1.0) == k);

    const std::vector<double> v{1.0, 0.0, -1.0, 0.0};
    CHECK(step_burgers(g, v, 1.0, 1.0) == std::vector<double>{0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("Burgers step obeys the maximum principle at c dt = dx") {
    const PeriodicGrid g(1.0, 32);
    std::mt19937_64 rng(515);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(32);
        for (auto& x : v) x = u(rng);
        const double c = norm_linf(v);
        const double dt = g.dx / c;
        const std::vector<double> next = step_burgers(g, v, dt, c);
        CHECK(norm_linf(next) <= norm_linf(v));
    }
}

TEST_CASE("full step: zero and constant states are fixed points") {
    const PeriodicGrid g(2.0, 64);
    const std::vector<double> z(64, 0.0);
    CHECK(step_kdv(g, z, 0.01, 1.0, 1.0) == z);

    const std::vector<double> k(64, -0.75);
    const std::vector<double> out = step_kdv(g, k, 0.01, 1.0, 1.0);
    for (double x : out) CHECK(x == doctest::Approx(-0.75).epsilon(1e-14));
}

TEST_CASE("full step matches the dense transcription oracle") {
    {
        const PeriodicGrid g(8.0, 8); // dx = 1
        std::vector<double> e0(8, 0.0);
        e0[0] = 1.0;
        const std::vector<double> ref = reference_step(g, e0, 0.1, 1.0, 1.0);
        for (SolvePath path : {SolvePath::Spectral, SolvePath::Banded}) {
            const std::vector<double> got = step_kdv(g, e0, 0.1, 1.0, 1.0, path);
            for (std::size_t j = 0; j < 8; ++j)
                CHECK(std::abs(got[j] - ref[j]) <= 1e-12);
        }
    }

    const PeriodicGrid g(1.0, 32);
    const double dx3 = g.dx * g.dx * g.dx;
    for (double theta : {0.0, 0.5, 1.0}) {
        for (double r : {0.5, 20.0}) {
            const std::vector<double> v = random_vector(32, 600 + static_cast<int>(10 * theta));
            const double c = norm_linf(v);
            const double dt = r * dx3;
            const std::vector<double> ref = reference_step(g, v, dt, theta, c);
            const double scale = std::max(1.0, norm_linf(ref));
            for (SolvePath path : {SolvePath::Spectral, SolvePath::Banded}) {
                const std::vector<double> got = step_kdv(g, v, dt, theta, c, path);
                for (std::size_t j = 0; j < 32; ++j)
                    CHECK(std::abs(got[j] - ref[j]) <= 1e-12 * scale);
            }
        }
    }
}

TEST_CASE("full step conserves the mean to rounding") {
    const PeriodicGrid g(5.0, 128);
    const std::vector<double> v = random_vector(128, 808);
    const double c = norm_linf(v);
    const double dx3 = g.dx * g.dx * g.dx;
    // stable dt for each theta so the output stays O(1) and the comparison
    // is against rounding, not amplified noise
    const std::pair<double, double> cases[] = {{0.0, 0.2 * dx3}, {0.5, 0.5 * g.dx}, {1.0, 0.5 * g.dx}};
    for (const auto& [theta, dt] : cases) {
        const std::vector<double> next = step_kdv(g, v, dt, theta, c);
        CHECK(std::abs(mean(next) - mean(v)) <= 1e-13 * std::max(1.0, norm_linf(v)));
    }
}

TEST_CASE("dispersion-only step: constants, spectral oracle, contraction at theta = 1") {
    const PeriodicGrid g(1.0, 64);
    const std::vector<double> k(64, 2.5);
    const std::vector<double> kk = step_airy(g, k, 1.0, 1.0);
    for (double x : kk) CHECK(x == doctest::Approx(2.5).epsilon(1e-14));

    // one step equals multiplying each Fourier mode by the amplification
    // factor; the DFT here uses the e^{+2 pi i j k / J} forward convention
    // the amplification formula is written in
    const double r = 3.0;
    const double dt = r * g.dx * g.dx * g.dx;
    const std::vector<double> v = random_vector(64, 99);
    for (double theta : {0.3, 1.0}) {
        const std::vector<double> got = step_airy(g, v, dt, theta);
        const std::size_t J = 64;
        const std::complex<double> i2pi(0.0, 2.0 * std::numbers::pi / static_cast<double>(J));
        std::vector<std::complex<double>> hat(J);
        for (std::size_t kk2 = 0; kk2 < J; ++kk2) {
            std::complex<double> acc = 0.0;
            for (std::size_t j = 0; j < J; ++j)
                acc += v[j] * std::exp(i2pi * static_cast<double>(j * kk2 % J));
            hat[kk2] = acc * airy_amplification(theta, r, static_cast<double>(kk2) / static_cast<double>(J));
        }
        for (std::size_t j = 0; j < J; ++j) {
            std::complex<double> acc = 0.0;
            for (std::size_t kk2 = 0; kk2 < J; ++kk2)
                acc += hat[kk2] * std::exp(-i2pi * static_cast<double>(j * kk2 % J));
            const double oracle = acc.real() / static_cast<double>(J);
            CHECK(std::abs(got[j] - oracle) <= 1e-12 * std::max(1.0, norm_linf(got)));
        }
    }

    // theta = 1 contracts the l2 norm for any dt
    std::vector<double> state = random_vector(64, 1234);
    double prev = norm_l2_delta(g, state);
    for (int n = 0; n < 20; ++n) {
        state = step_airy(g, state, 100.0 * g.dx * g.dx * g.dx, 1.0);
        const double cur = norm_l2_delta(g, state);
        CHECK(cur <= prev * (1.0 + 1e-14));
        prev = cur;
    }
}

TEST_CASE("amplification factor: limits, critical point, stability window") {
    CHECK(airy_amplification(1.0, 10.0, 0.0) == std::complex<double>(1.0, 0.0));
    CHECK(std::abs(airy_amplification(0.3, 5.0, 1e-9) - 1.0) <= 1e-6);

    // theta = 0 at the critical ratio r = 1/4: the Nyquist mode flips sign
    // with modulus exactly one
    const std::complex<double> edge = airy_amplification(0.0, 0.25, 0.5);
    CHECK(edge.real() == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::abs(edge) == doctest::Approx(1.0).epsilon(1e-14));

    for (double theta : {0.0, 0.25, 0.49}) {
        const double r_crit = 1.0 / (4.0 * (1.0 - 2.0 * theta));
        for (double factor : {0.95, 1.0}) {
            double worst = 0.0;
            for (int i = 0; i <= 4096; ++i)
                worst = std::max(worst,
                                 std::abs(airy_amplification(theta, factor * r_crit,
                                                             i / 4096.0)));
            CHECK(worst <= 1.0 + 1e-12);
        }
        double worst = 0.0;
        for (int i = 0; i <= 4096; ++i)
            worst = std::max(worst,
                             std::abs(airy_amplification(theta, 1.05 * r_crit, i / 4096.0)));
        CHECK(worst > 1.0 + 1e-9);
    }

    // theta >= 1/2 is unconditionally stable
    for (double r : {0.1, 10.0, 1e4}) {
        double worst = 0.0;
        for (int i = 0; i <= 4096; ++i)
            worst = std::max(worst, std::abs(airy_amplification(1.0, r, i / 4096.0)));
        CHECK(worst <= 1.0 + 1e-12);
    }
}

TEST_CASE("run: degenerate lengths and the zero datum") {
    const PeriodicGrid g(1.0, 16);
    SchemeConfig cfg;
    cfg.t_final = 0.0;
    const std::vector<double> v0 = random_vector(16, 31);
    const RunResult res = run(g, v0, cfg);
    CHECK(res.steps == 0);
    CHECK(res.final_state.v == v0);
    REQUIRE(res.stamps.t.size() == 1);
    CHECK(res.stamps.t[0] == 0.0);

    cfg.t_final = 0.1;
    const RunResult zr = run(g, std::vector<double>(16, 0.0), cfg);
    for (double x : zr.final_state.v) CHECK(x == 0.0);

    CHECK_THROWS_AS(run(g, std::vector<double>(8, 0.0), cfg), UsageError);
}

TEST_CASE("run: lands exactly on t_final with increasing stamps") {
    const PeriodicGrid g(50.0, 256);
    SchemeConfig cfg;
    cfg.t_final = 0.1;
    std::vector<double> v0(256);
    for (std::size_t j = 0; j < 256; ++j) v0[j] = std::cos(2.0 * std::numbers::pi * g.x(j) / 50.0);

    std::vector<std::pair<std::size_t, double>> seen;
    const RunResult res = run(g, v0, cfg, [&](std::size_t n, double t, std::span<const double> v) {
        seen.emplace_back(n, t);
        CHECK(v.size() == 256);
    });

    CHECK(res.steps >= 1);
    CHECK(res.stamps.t.back() == 0.1);
    CHECK(seen.size() == res.steps + 1);
    CHECK(seen.front().first == 0);
    CHECK(seen.front().second == 0.0);
    for (std::size_t i = 1; i < seen.size(); ++i) {
        CHECK(seen[i].first == i);
        CHECK(seen[i].second > seen[i - 1].second);
    }
    CHECK(res.max_mean_drift_rel <= 1e-12);
}

TEST_CASE("run: smooth datum stays bounded over the full interval") {
    const PeriodicGrid g(50.0, 1600);
    SchemeConfig cfg; // theta = 1, Experimental CFL, T = 0.1 by default
    std::vector<double> v0(1600);
    for (std::size_t j = 0; j < 1600; ++j)
        v0[j] = std::cos(2.0 * std::numbers::pi * g.x(j) / 50.0);
    const RunResult res = run(g, v0, cfg);
    CHECK(norm_linf(res.final_state.v) <= 1.5);
    CHECK(res.warning.empty());
    CHECK(!res.fixed_c_exceeded);
    CHECK(res.max_mean_drift_rel <= 1e-12);
}

TEST_CASE("run: fixed Rusanov coefficient below max|v| is flagged") {
    const PeriodicGrid g(1.0, 64);
    SchemeConfig cfg;
    cfg.t_final = 0.01;
    cfg.rusanov = RusanovPolicy::fixed(0.5);
    std::vector<double> v0(64);
    for (std::size_t j = 0; j < 64; ++j) v0[j] = std::cos(2.0 * std::numbers::pi * g.x(j));
    const RunResult res = run(g, v0, cfg);
    CHECK(res.fixed_c_exceeded);
    CHECK(res.warning.find("Rusanov") != std::string::npos);
}

TEST_CASE("run: spectral and banded paths produce the same trajectory") {
    const PeriodicGrid g(1.0, 64);
    SchemeConfig cfg;
    cfg.t_final = 0.05;
    std::vector<double> v0(64);
    for (std::size_t j = 0; j < 64; ++j) v0[j] = std::sin(2.0 * std::numbers::pi * g.x(j));

    cfg.path = SolvePath::Spectral;
    const RunResult a = run(g, v0, cfg);
    cfg.path = SolvePath::Banded;
    const RunResult b = run(g, v0, cfg);
    REQUIRE(a.steps == b.steps);
    for (std::size_t j = 0; j < 64; ++j)
        CHECK(std::abs(a.final_state.v[j] - b.final_state.v[j]) <= 1e-10);
}

TEST_CASE("run: guard rails throw instead of looping or overflowing") {
    const PeriodicGrid g(1.0, 64);
    SchemeConfig cfg;
    cfg.t_final = 100.0;
    cfg.max_steps = 3;
    std::vector<double> v0(64, 0.0);
    CHECK_THROWS_AS(run(g, v0, cfg), NumericalError);

    // explicit dispersion at dt = dx is violently unstable; the run must
    // stop with a diagnostic naming the step, not return garbage. A fixed
    // Rusanov coefficient keeps dt pinned at the cap (the adaptive one
    // would shrink dt as the state grows).
    SchemeConfig unstable;
    unstable.theta = 0.0;
    unstable.rusanov = RusanovPolicy::fixed(1.0);
    unstable.t_final = 2.0;
    std::vector<double> w0(64);
    for (std::size_t j = 0; j < 64; ++j) w0[j] = std::cos(2.0 * std::numbers::pi * g.x(j));
    try {
        run(g, w0, unstable);
        FAIL("expected a NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}
