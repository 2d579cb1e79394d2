#include "kdv/identities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <utility>

#include "kdv/errors.hpp"
#include "kdv/ops.hpp"

namespace kdv {

namespace {

using Vec = std::vector<double>;

Vec had(const Vec& a, const Vec& b) {
    Vec out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
    return out;
}

Vec vadd(const Vec& a, const Vec& b) {
    Vec out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] + b[j];
    return out;
}

Vec vsub(const Vec& a, const Vec& b) {
    Vec out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] - b[j];
    return out;
}

Vec vscale(double s, const Vec& a) {
    Vec out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = s * a[j];
    return out;
}

Vec vshiftc(double s, const Vec& a) { // s + a_j
    Vec out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = s + a[j];
    return out;
}

Vec vsq(const Vec& a) { return had(a, a); }

Vec vcube(const Vec& a) {
    Vec out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * a[j] * a[j];
    return out;
}

Vec vabspow(const Vec& a, double p) {
    Vec out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = std::pow(std::abs(a[j]), p);
    return out;
}

double norm_l4(const PeriodicGrid& g, const Vec& a) {
    Vec q(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) q[j] = (a[j] * a[j]) * (a[j] * a[j]);
    return std::pow(g.dx * compensated_sum(q), 0.25);
}

// Relative gap between two scalars, scaled so tiny absolute noise near zero
// does not blow up the ratio.
double rel_gap(double l, double r) {
    const double scale = std::max({1.0, std::abs(l), std::abs(r)});
    return std::abs(l - r) / scale;
}

// Worst entrywise relative gap for pointwise identities.
double rel_gap_pointwise(const Vec& l, const Vec& r) {
    double worst = 0.0;
    for (std::size_t j = 0; j < l.size(); ++j) worst = std::max(worst, rel_gap(l[j], r[j]));
    return worst;
}

// Signed violation of l <= r; positive means the inequality failed by that
// relative amount.
double rel_violation(double l, double r) {
    const double scale = std::max({1.0, std::abs(l), std::abs(r)});
    return (l - r) / scale;
}

struct CheckDef {
    std::string name;
    CheckKind kind;
    std::function<double(const PeriodicGrid&, const Vec&, const Vec&)> eval;
};

std::vector<CheckDef> build_checks() {
    std::vector<CheckDef> defs;
    auto identity = [&](std::string name, auto fn) {
        defs.push_back({std::move(name), CheckKind::Identity, fn});
    };
    auto inequality = [&](std::string name, auto fn) {
        defs.push_back({std::move(name), CheckKind::Inequality, fn});
    };

    // Pointwise product and square rules.
    identity("commutation D+D- = D-D+", [](const PeriodicGrid& g, const Vec& a, const Vec&) {
        return rel_gap_pointwise(d_plus(g, d_minus(g, a)), d_minus(g, d_plus(g, a)));
    });
    identity("product rule, forward", [](const PeriodicGrid& g, const Vec& a, const Vec& b) {
        const Vec l = d_plus(g, had(a, b));
        const Vec r = vadd(had(shift(g, a, +1), d_plus(g, b)), had(b, d_plus(g, a)));
        return rel_gap_pointwise(l, r);
    });
    identity("product rule, backward", [](const PeriodicGrid& g, const Vec& a, const Vec& b) {
        const Vec l = d_minus(g, had(a, b));
        const Vec r = vadd(had(shift(g, a, -1), d_minus(g, b)), had(b, d_minus(g, a)));
        return rel_gap_pointwise(l, r);
    });
    identity("product rule, centered two-term",
             [](const PeriodicGrid& g, const Vec& a, const Vec& b) {
                 const Vec l = d_center(g, had(a, b));
                 const Vec r =
                     vadd(had(d_center(g, a), shift(g, b, +1)), had(shift(g, a, -1), d_center(g, b)));
                 return rel_gap_pointwise(l, r);
             });
    identity("product rule, centered three-term",
             [](const PeriodicGrid& g, const Vec& a, const Vec& b) {
                 const Vec l = d_center(g, had(a, b));
                 Vec r = had(b, d_center(g, a));
                 r = vadd(r, vscale(0.5, had(shift(g, a, +1), d_plus(g, b))));
                 r = vadd(r, vscale(0.5, had(shift(g, a, -1), d_minus(g, b))));
                 return rel_gap_pointwise(l, r);
             });
    identity("square rule, forward", [](const PeriodicGrid& g, const Vec& a, const Vec&) {
        const Vec l = had(a, d_plus(g, a));
        const Vec r =
            vsub(vscale(0.5, d_plus(g, vsq(a))), vscale(0.5 * g.dx, vsq(d_plus(g, a))));
        return rel_gap_pointwise(l, r);
    });
    identity("square rule, backward", [](const PeriodicGrid& g, const Vec& a, const Vec&) {
        const Vec l = had(a, d_minus(g, a));
        const Vec r =
            vadd(vscale(0.5, d_minus(g, vsq(a))), vscale(0.5 * g.dx, vsq(d_minus(g, a))));
        return rel_gap_pointwise(l, r);
    });

    // Norm identities.
    identity("norm equality of one-sided differences",
             [](const PeriodicGrid& g, const Vec& a, const Vec&) {
                 return rel_gap(norm_l2_delta(g, d_plus(g, a)), norm_l2_delta(g, d_minus(g, a)));
             });
    identity("quadratic flux norm switch", [](const PeriodicGrid& g, const Vec& a, const Vec&) {
        const double l = norm_l2_delta(g, d_center(g, vscale(0.5, vsq(a))));
        const Vec avg = vscale(0.5, vadd(shift(g, a, +1), shift(g, a, -1)));
        const double r = norm_l2_delta(g, had(d_center(g, a), avg));
        return rel_gap(l, r);
    });
    identity("second-difference norm split", [](const PeriodicGrid& g, const Vec& a, const Vec&) {
        const double l = std::pow(norm_l2_delta(g, d_plus(g, d_minus(g, a))), 2);
        const double np = std::pow(norm_l2_delta(g, d_plus(g, a)), 2);
        const double nc = std::pow(norm_l2_delta(g, d_center(g, a)), 2);
        return rel_gap(l, 4.0 / (g.dx * g.dx) * (np - nc));
    });
    identity("third-difference norm split", [](const PeriodicGrid& g, const Vec& a, const Vec&) {
        const double l = std::pow(norm_l2_delta(g, d3(g, a)), 2);
        const double npm = std::pow(norm_l2_delta(g, d_plus(g, d_minus(g, a))), 2);
        const double npc = std::pow(norm_l2_delta(g, d_plus(g, d_center(g, a))), 2);
        return rel_gap(l, 4.0 / (g.dx * g.dx) * (npm - npc));
    });

    // Summation by parts.
    identity("summation by parts, one-sided", [](const PeriodicGrid& g, const Vec& a, const Vec& b) {
        return rel_gap(inner(g, d_plus(g, a), b), -inner(g, a, d_minus(g, b)));
    });
    identity("antisymmetry of centered difference",
             [](const PeriodicGrid& g, const Vec& a, const Vec& b) {
                 return rel_gap(inner(g, d_center(g, a), b), -inner(g, a, d_center(g, b)));
             });
    identity("self-pairing of forward difference",
             [](const PeriodicGrid& g, const Vec& a, const Vec&) {
                 const double l = inner(g, a, d_plus(g, a));
                 const double r = -0.5 * g.dx * std::pow(norm_l2_delta(g, d_plus(g, a)), 2);
                 return rel_gap(l, r);
             });
    identity("shifted self-pairing, forward", [](const PeriodicGrid& g, const Vec& a, const Vec&) {
        const Vec dp = d_plus(g, a);
        const double l = inner(g, dp, had(a, shift(g, a, +1)));
        const double r = -(g.dx * g.dx / 3.0) * inner(g, dp, vsq(dp));
        return rel_gap(l, r);
    });
    identity("shifted self-pairing, centered", [](const PeriodicGrid& g, const Vec& a, const Vec&) {
        const Vec dc = d_center(g, a);
        const double l = inner(g, dc, had(shift(g, a, -1), shift(g, a, +1)));
        const double r = -(4.0 * g.dx * g.dx / 3.0) * inner(g, dc, vsq(dc));
        return rel_gap(l, r);
    });
    identity("product flux pairing", [](const PeriodicGrid& g, const Vec& a, const Vec& b) {
        const double l = inner(g, a, d_center(g, had(a, b)));
        const double r = inner(g, d_plus(g, b), vscale(0.5, had(a, shift(g, a, +1))));
        return rel_gap(l, r);
    });
    identity("second-difference flux pairing",
             [](const PeriodicGrid& g, const Vec& a, const Vec& b) {
                 const double l = inner(g, d_plus(g, d_minus(g, a)), d_center(g, had(a, b)));
                 const double w = 1.0 / (g.dx * g.dx);
                 const double r = -w * inner(g, d_plus(g, b), had(a, shift(g, a, +1))) +
                                  w * inner(g, d_center(g, b), had(shift(g, a, -1), shift(g, a, +1)));
                 return rel_gap(l, r);
             });

    // Cubic pairings for the quadratic flux.
    identity("quadratic flux self-pairing", [](const PeriodicGrid& g, const Vec& a, const Vec&) {
        const Vec dp = d_plus(g, a);
        const double l = inner(g, a, d_center(g, vscale(0.5, vsq(a))));
        const double r = -(g.dx * g.dx / 12.0) * inner(g, dp, vsq(dp));
        return rel_gap(l, r);
    });
    identity("quadratic flux against second difference",
             [](const PeriodicGrid& g, const Vec& a, const Vec&) {
                 const Vec dp = d_plus(g, a);
                 const Vec dc = d_center(g, a);
                 const double l =
                     inner(g, d_center(g, vscale(0.5, vsq(a))), d_plus(g, d_minus(g, a)));
                 const double r =
                     inner(g, dp, vsq(dp)) / 6.0 - (2.0 / 3.0) * inner(g, dc, vsq(dc));
                 return rel_gap(l, r);
             });
    identity("mixed flux pairing", [](const PeriodicGrid& g, const Vec& a, const Vec& b) {
        const Vec dc = d_center(g, a);
        const double l =
            inner(g, d_center(g, had(a, b)), d_center(g, vscale(0.5, vsq(a))));
        const Vec cross = vscale(0.5, vadd(had(shift(g, a, +1), shift(g, b, +1)),
                                           had(shift(g, a, -1), shift(g, b, -1))));
        const double r = inner(g, vsq(dc), cross) -
                         (4.0 * g.dx * g.dx / 3.0) * inner(g, d_center(g, b), vcube(dc)) -
                         inner(g, d_center(g, d_center(g, b)), vcube(a)) / 3.0;
        return rel_gap(l, r);
    });

    // Inequalities backing the stability estimates.
    inequality("interpolation bound for the gradient",
               [](const PeriodicGrid& g, const Vec& a, const Vec&) {
                   const double l = std::pow(norm_l2_delta(g, d_plus(g, a)), 2);
                   const double r =
                       norm_l2_delta(g, a) * norm_l2_delta(g, d_plus(g, d_minus(g, a)));
                   return rel_violation(l, r);
               });
    inequality("fourth-power gradient bound",
               [](const PeriodicGrid& g, const Vec& a, const Vec&) {
                   const double l = std::pow(norm_l4(g, d_plus(g, a)), 2);
                   const double r =
                       3.0 * norm_linf(a) * norm_l2_delta(g, d_plus(g, d_minus(g, a)));
                   return rel_violation(l, r);
               });

    for (double dt : {0.05, 1.0, 20.0}) {
        inequality("product flux norm bound (aux " + std::to_string(dt) + ")",
                   [dt](const PeriodicGrid& g, const Vec& a, const Vec& b) {
                       const double l =
                           std::pow(norm_l2_delta(g, d_center(g, had(a, b))), 2);
                       const Vec dpb = d_plus(g, b);
                       const Vec dmb = d_minus(g, b);
                       Vec w1 = vadd(vsq(b), vscale(0.5 * dt, vadd(vsq(dpb), vsq(dmb))));
                       Vec w2 = vscale(1.0 / dt, vadd(vsq(shift(g, b, -1)), vsq(shift(g, b, +1))));
                       w2 = vadd(w2, vscale(0.75, vadd(vsq(dpb), vsq(dmb))));
                       const double r = inner(g, w1, vsq(d_center(g, a))) +
                                        0.5 * inner(g, w2, vsq(a));
                       return rel_violation(l, r);
                   });
    }

    for (int sigma : {0, 1}) {
        for (double dt : {0.05, 1.0, 20.0}) {
            inequality("triple difference against product flux (sigma " +
                           std::to_string(sigma) + ", aux " + std::to_string(dt) + ")",
                       [sigma, dt](const PeriodicGrid& g, const Vec& a, const Vec& b) {
                           const Vec t3 = d3(g, a);
                           const Vec dpb = d_plus(g, b);
                           const Vec dmb = d_minus(g, b);
                           const Vec absum = vadd(vabspow(dpb, 1.0), vabspow(dmb, 1.0));
                           const double linf = norm_linf(dpb);
                           const double l = inner(g, t3, d_center(g, had(a, b)));
                           Vec w = vshiftc(std::pow(linf, sigma), vscale(-0.5 * g.dx, dmb));
                           const double r =
                               0.25 * dt * inner(g, absum, vsq(t3)) +
                               0.25 / dt * inner(g, absum, vsq(a)) +
                               0.5 * inner(g, w, vsq(d_plus(g, d_minus(g, a)))) +
                               0.5 * std::pow(linf, 2 - sigma) *
                                   std::pow(norm_l2_delta(g, d_plus(g, a)), 2) -
                               inner(g, b, vsq(d_plus(g, d_center(g, a))));
                           return rel_violation(l, r);
                       });
        }
    }

    for (int sigma : {0, 1}) {
        for (double nu : {0.0, 0.5, 2.0}) {
            inequality("triple difference against weighted gradient (sigma " +
                           std::to_string(sigma) + ", nu " + std::to_string(nu) + ")",
                       [sigma, nu](const PeriodicGrid& g, const Vec& a, const Vec& b) {
                           const Vec t3 = d3(g, a);
                           const Vec dpb = d_plus(g, b);
                           const Vec dmb = d_minus(g, b);
                           const double hn = std::pow(g.dx, nu);
                           const double l = inner(g, t3, had(b, d_center(g, a)));
                           const Vec w = vsub(vscale(hn, vabspow(dmb, double(sigma))),
                                              vscale(0.5 * g.dx, dmb));
                           const double r =
                               0.5 * inner(g, w, vsq(d_plus(g, d_minus(g, a)))) +
                               0.5 / hn * inner(g, vabspow(dpb, 2.0 - sigma), vsq(d_plus(g, a))) -
                               inner(g, b, vsq(d_plus(g, d_center(g, a))));
                           return rel_violation(l, r);
                       });
        }
    }

    for (double gamma : {0.0, 0.25, 0.49}) {
        inequality("triple difference against own flux (gamma " + std::to_string(gamma) + ")",
                   [gamma](const PeriodicGrid& g, const Vec& a, const Vec&) {
                       const double linf = norm_linf(a);
                       const double l =
                           inner(g, d3(g, a), d_center(g, vscale(0.5, vsq(a))));
                       const double coeff = 0.5 * (std::pow(g.dx, 0.5 - gamma) + linf +
                                                   9.0 * linf * linf * std::pow(g.dx, gamma - 0.5));
                       const double r =
                           coeff * std::pow(norm_l2_delta(g, d_plus(g, d_minus(g, a))), 2) +
                           linf * std::pow(norm_l2_delta(g, d_plus(g, d_center(g, a))), 2);
                       return rel_violation(l, r);
                   });
    }

    // Structural invariants of the stencils.
    identity("constants are annihilated", [](const PeriodicGrid& g, const Vec& a, const Vec&) {
        const Vec c(g.J, a.empty() ? 1.0 : a[0]);
        double worst = norm_linf(d_plus(g, c));
        worst = std::max(worst, norm_linf(d_minus(g, c)));
        worst = std::max(worst, norm_linf(d_center(g, c)));
        worst = std::max(worst, norm_linf(d3(g, c)));
        return worst; // exact zeros expected: identical doubles subtract to 0
    });
    identity("telescoping of the forward difference",
             [](const PeriodicGrid& g, const Vec& a, const Vec&) {
                 const Vec ones(g.J, 1.0);
                 return rel_gap(inner(g, d_plus(g, a), ones), 0.0);
             });

    return defs;
}

} // namespace

bool IdentityReport::all_pass() const {
    for (const auto& c : checks)
        if (c.worst > tolerance) return false;
    return true;
}

double IdentityReport::worst() const {
    double w = 0.0;
    for (const auto& c : checks) w = std::max(w, c.worst);
    return w;
}

std::vector<std::string> IdentityReport::failing() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (c.worst > tolerance) out.push_back(c.name);
    return out;
}

IdentityReport run_identity_checks(const PeriodicGrid& g, const std::vector<double>& a,
                                   const std::vector<double>& b, double tolerance) {
    if (a.size() != g.J || b.size() != g.J)
        throw UsageError("identity check: sequence length must match the grid");
    static const std::vector<CheckDef> defs = build_checks();
    IdentityReport report;
    report.tolerance = tolerance;
    report.trials = 1;
    for (const auto& def : defs) {
        IdentityCheck c;
        c.name = def.name;
        c.kind = def.kind;
        c.worst = def.eval(g, a, b);
        c.worst_J = g.J;
        report.checks.push_back(std::move(c));
    }
    return report;
}

IdentityReport check_discrete_identities(std::size_t trials, std::uint64_t seed,
                                         const std::vector<std::size_t>& Js, double tolerance) {
    if (trials < 1) throw UsageError("identity check: trials must be at least 1");
    if (Js.empty()) throw UsageError("identity check: need at least one grid size");

    static const std::vector<CheckDef> defs = build_checks();
    IdentityReport report;
    report.tolerance = tolerance;
    report.trials = trials;
    report.checks.resize(defs.size());
    for (std::size_t i = 0; i < defs.size(); ++i) {
        report.checks[i].name = defs[i].name;
        report.checks[i].kind = defs[i].kind;
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t J = Js[t % Js.size()];
        // Spread dx over a couple of decades so dx-weighted terms get
        // exercised on both sides of 1.
        const double L = std::exp(std::log(0.5) + (std::log(50.0) - std::log(0.5)) *
                                                      (0.5 * (u(rng) + 1.0)));
        const PeriodicGrid g(L, J);
        Vec a(J), b(J);
        for (auto& x : a) x = u(rng);
        for (auto& x : b) x = u(rng);

        for (std::size_t i = 0; i < defs.size(); ++i) {
            const double res = defs[i].eval(g, a, b);
            if (res > report.checks[i].worst) {
                report.checks[i].worst = res;
                report.checks[i].worst_J = J;
                report.checks[i].worst_trial = t;
            }
        }
    }
    return report;
}

} // namespace kdv
