#include "kdv/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "kdv/errors.hpp"
#include "kdv/fft.hpp"
#include "kdv/ops.hpp"

namespace kdv {

namespace {

struct GlRule {
    std::vector<double> x; // nodes on [-1,1], ascending
    std::vector<double> w; // weights, sum 2
};

// Gauss-Legendre rule of size n: Newton iteration on the Legendre recurrence
// from the Chebyshev-like initial guess. Converges to full double precision
// in a handful of iterations; nodes are mirrored so the rule is exactly
// symmetric. Rules are cached per order (ladder rows project concurrently).
GlRule make_gl_rule(int n) {
    GlRule rule;
    rule.x.assign(static_cast<std::size_t>(n), 0.0);
    rule.w.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < (n + 1) / 2; ++k) {
        double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
        double pd = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pd = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx_newton = p1 / pd;
            x -= dx_newton;
            if (std::abs(dx_newton) <= 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pd * pd);
        rule.x[static_cast<std::size_t>(n - 1 - k)] = x;
        rule.x[static_cast<std::size_t>(k)] = -x;
        rule.w[static_cast<std::size_t>(n - 1 - k)] = w;
        rule.w[static_cast<std::size_t>(k)] = w;
    }
    if (n % 2 == 1) rule.x[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

const GlRule& gl_rule(int order) {
    if (order < 1 || order > 64)
        throw UsageError("cell_average: quadrature order must be between 1 and 64");
    static std::mutex mu;
    static std::map<int, GlRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_gl_rule(order)).first;
    return it->second;
}

} // namespace

std::vector<double> cell_average(const PeriodicGrid& g, const ScalarFn& f, int order) {
    const GlRule& rule = gl_rule(order);
    std::vector<double> out(g.J);
    for (std::size_t j = 0; j < g.J; ++j) {
        const double x0 = g.x(j);
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.x.size(); ++q)
            acc += rule.w[q] * f(x0 + 0.5 * g.dx * (rule.x[q] + 1.0));
        out[j] = 0.5 * acc; // weights sum to 2; cell average divides the dx back out
    }
    return out;
}

ScalarFn sinusoidal(double L, double amplitude) {
    if (!(L > 0.0)) throw UsageError("sinusoidal: L must be positive");
    const double two_pi_over_L = 2.0 * std::numbers::pi / L;
    return [=](double x) { return amplitude * std::cos(two_pi_over_L * x); };
}

double elliptic_K(double m) {
    if (!(m >= 0.0 && m < 1.0)) throw UsageError("elliptic_K: need 0 <= m < 1");
    double a = 1.0, b = std::sqrt(1.0 - m);
    for (int i = 0; i < 64 && std::abs(a - b) > 1e-17 * a; ++i) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return std::numbers::pi / (2.0 * a);
}

JacobiCn::JacobiCn(double m) : m_(m) {
    if (!(m >= 0.0 && m < 1.0)) throw UsageError("JacobiCn: need 0 <= m < 1");
    double a = 1.0, b = std::sqrt(1.0 - m), c = std::sqrt(m);
    a_.push_back(a);
    c_.push_back(c);
    while (std::abs(c) > std::numeric_limits<double>::epsilon() * std::abs(a) && n_ < 60) {
        const double an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = std::sqrt(a * b);
        a = an;
        ++n_;
        a_.push_back(a);
        c_.push_back(c);
    }
}

double JacobiCn::operator()(double u) const {
    // descending Landen phase recursion
    double phi = std::ldexp(1.0, n_) * a_[static_cast<std::size_t>(n_)] * u;
    for (int i = n_; i >= 1; --i) {
        const double s = c_[static_cast<std::size_t>(i)] / a_[static_cast<std::size_t>(i)] * std::sin(phi);
        phi = 0.5 * (phi + std::asin(std::clamp(s, -1.0, 1.0)));
    }
    return std::cos(phi);
}

double jacobi_cn(double u, double m) { return JacobiCn(m)(u); }

CnoidalWave::CnoidalWave(double m, double mu, double L)
    : m_(m), mu_(mu), L_(L), K_(elliptic_K(m)), cn_(m) {
    if (!(mu > 0.0)) throw UsageError("CnoidalWave: mu must be positive");
    a_ = 192.0 * m * mu * K_ * K_;
    v_ = 64.0 * mu * (2.0 * m - 1.0) * K_ * K_;
}

double CnoidalWave::operator()(double t, double x) const {
    const double z = 4.0 * K_ * (std::pow(mu_, 0.4) * (x - 0.5 * L_) - v_ * std::pow(mu_, 0.2) * t);
    const double c = cn_(z);
    return std::pow(mu_, -0.2) * a_ * c * c;
}

double CnoidalWave::du_dx(double t, double x) const {
    // centered 4th-order difference; only used by the seam report
    const double h = 1e-5 * L_;
    return (-(*this)(t, x + 2 * h) + 8.0 * (*this)(t, x + h) - 8.0 * (*this)(t, x - h) +
            (*this)(t, x - 2 * h)) /
           (12.0 * h);
}

CnoidalWave::SeamReport CnoidalWave::seam_mismatch(double t) const {
    SeamReport rep{};
    rep.value_gap = (*this)(t, 0.0) - (*this)(t, L_);
    rep.slope_gap = du_dx(t, 0.0) - du_dx(t, L_);
    return rep;
}

RoughHalfInteger::RoughHalfInteger(int level, double L) : level_(level), L_(L) {
    if (level < 0 || level > 12) throw UsageError("RoughHalfInteger: level must be in [0, 12]");
    if (!(L > 0.0)) throw UsageError("RoughHalfInteger: L must be positive");
    p0_ = {1.0};
    p1_ = {-1.0};
    auto ev = [](const std::vector<double>& p, double x) {
        double acc = 0.0;
        for (std::size_t k = p.size(); k-- > 0;) acc = acc * x + p[k];
        return acc;
    };
    for (int l = 0; l < level; ++l) {
        auto integ = [](const std::vector<double>& p) {
            std::vector<double> P(p.size() + 1, 0.0);
            for (std::size_t k = 0; k < p.size(); ++k) P[k + 1] = p[k] / static_cast<double>(k + 1);
            return P;
        };
        std::vector<double> P0 = integ(p0_); // antiderivative with F(0) = 0
        std::vector<double> P1 = integ(p1_);
        P1[0] += ev(P0, L / 2) - ev(P1, L / 2); // continuity at L/2
        // subtract the mean so the next integration stays periodic
        std::vector<double> Q0 = integ(P0), Q1 = integ(P1);
        const double mean = (ev(Q0, L / 2) - ev(Q0, 0.0) + ev(Q1, L) - ev(Q1, L / 2)) / L;
        P0[0] -= mean;
        P1[0] -= mean;
        p0_ = std::move(P0);
        p1_ = std::move(P1);
    }
}

double RoughHalfInteger::operator()(double x) const {
    double xr = std::fmod(x, L_);
    if (xr < 0.0) xr += L_;
    const std::vector<double>& p = (xr < 0.5 * L_) ? p0_ : p1_;
    double acc = 0.0;
    for (std::size_t k = p.size(); k-- > 0;) acc = acc * xr + p[k];
    return acc;
}

RoughInteger::RoughInteger(int s, double L) : s_(s), L_(L), b_(static_cast<std::size_t>(s), 0.0) {
    if (s < 1 || s > 16) throw UsageError("RoughInteger: s must be in [1, 16]");
    if (!(L > 0.0)) throw UsageError("RoughInteger: L must be positive");
    // back-substitution on: sum_{i=k+1..s} b_i L^{i-k}/(i-k)! = c_k L^{s-1/2-k},
    // c_k = prod_{t<k} (s - 1/2 - t); conditions k = s-1 down to 0.
    auto fact = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    for (int k = s - 1; k >= 0; --k) {
        double ck = 1.0;
        for (int t = 0; t < k; ++t) ck *= (s - 0.5 - t);
        double acc = ck * std::pow(L, s - 0.5 - k);
        for (int i = k + 2; i <= s; ++i)
            acc -= b_[static_cast<std::size_t>(i - 1)] * std::pow(L, i - k) / fact(i - k);
        b_[static_cast<std::size_t>(k)] = acc / L;
    }
}

double RoughInteger::operator()(double x) const {
    double xr = std::fmod(x, L_);
    if (xr < 0.0) xr += L_;
    double val = std::pow(xr, s_ - 0.5);
    double fact = 1.0;
    double xp = 1.0;
    for (int i = 1; i <= s_; ++i) {
        fact *= i;
        xp *= xr;
        val -= b_[static_cast<std::size_t>(i - 1)] * xp / fact;
    }
    return val;
}

double chi_cutoff(double zeta) {
    const double az = std::abs(zeta);
    if (az <= 0.5) return 1.0;
    if (az >= 1.0) return 0.0;
    const double t = 2.0 * (az - 0.5); // in (0,1), 0 near the flat top
    const double down = std::exp(-1.0 / (1.0 - t));
    const double up = std::exp(-1.0 / t);
    return down / (down + up);
}

std::vector<double> mollify(const PeriodicGrid& g, std::span<const double> cells, double delta) {
    if (!(delta > 0.0)) throw UsageError("mollify: delta must be positive");
    RealFft fft(g.J);
    std::vector<std::complex<double>> spec(fft.bins());
    fft.forward(cells, spec);
    const double base = 2.0 * std::numbers::pi / g.L;
    for (std::size_t k = 0; k < spec.size(); ++k)
        spec[k] *= chi_cutoff(delta * base * static_cast<double>(k));
    std::vector<double> out(g.J);
    fft.inverse(spec, out);
    return out;
}

double mollifier_delta_rule(double s, double dx) {
    const double gamma = 0.49;
    const double a = (s >= 3.0) ? (1.0 / 6.0) : (gamma / (6.0 - s));
    return std::pow(dx, a);
}

} // namespace kdv
