#pragma once

#include <stdexcept>
#include <string>

namespace kdv {

// Thrown when a run or solve breaks down numerically (NaN/Inf state, zero
// pivot, step-count blowup). The CLI maps this to exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed configs / bad arguments. CLI exit code 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Exit codes used by the command line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitNumerical = 2,
    kExitThreshold = 3,
};

} // namespace kdv
