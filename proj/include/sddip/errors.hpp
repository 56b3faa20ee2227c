#pragma once

#include <stdexcept>
#include <string>

namespace sddip {

/// Malformed model data: dimension mismatches, bad indices, broken invariants.
struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid algorithm parameters (M < 2, probabilities out of range, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown the solver could not recover from. Never a silent
/// wrong answer: callers see this instead of a bogus optimum.
struct SolverFailure : std::runtime_error {
    explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

/// A stage subproblem came back infeasible. Generators are expected to build
/// models with penalized slacks, so this indicates broken input data.
struct RecourseViolation : std::runtime_error {
    explicit RecourseViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Caller broke a documented precondition.
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace sddip
