#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kdv/grid.hpp"

namespace kdv {

// Property suite for the discrete difference calculus: product rules, norm
// identities, summation by parts, cubic pairings, and the inequality lemmas
// the stability analysis rests on. Each check evaluates both sides from
// scratch on random data; nothing is shared with the way the scheme itself
// assembles these expressions.

enum class CheckKind { Identity, Inequality };

struct IdentityCheck {
    std::string name;
    CheckKind kind = CheckKind::Identity;
    // For identities: max over trials of |lhs-rhs| / max(1,|lhs|,|rhs|)
    // (entrywise for pointwise identities). For inequalities: max of
    // (lhs-rhs) / max(1,|lhs|,|rhs|), so anything <= tol is a pass.
    double worst = 0.0;
    std::size_t worst_J = 0;
    std::size_t worst_trial = 0;
};

struct IdentityReport {
    double tolerance = 1e-12;
    std::size_t trials = 0;
    std::vector<IdentityCheck> checks;

    bool all_pass() const;
    double worst() const;
    std::vector<std::string> failing() const;
};

// Runs `trials` random draws (uniform on [-1,1], deterministic in `seed`),
// cycling through the grid sizes in `Js` with a randomized domain length so
// dx varies across trials. Residuals above tolerance mark the check as
// failing in the report; no exception is thrown for them.
IdentityReport check_discrete_identities(std::size_t trials, std::uint64_t seed,
                                         const std::vector<std::size_t>& Js = {16, 64, 256},
                                         double tolerance = 1e-12);

// Evaluates every check once on a caller-supplied pair of sequences. Lets
// tests pin corner cases (all-zero input must give residuals of exactly 0).
IdentityReport run_identity_checks(const PeriodicGrid& g, const std::vector<double>& a,
                                   const std::vector<double>& b, double tolerance = 1e-12);

} // namespace kdv
