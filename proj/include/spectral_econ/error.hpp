#pragma once

#include <stdexcept>
#include <string>

namespace spectral_econ {

// Categories map one-to-one onto CLI exit codes (2, 3, 4).
enum class ErrorCategory { invalid_input, precondition, numeric_failure };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    [[nodiscard]] ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// Malformed or out-of-domain input (bad file, negative entry, wrong size).
class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what)
        : Error(ErrorCategory::invalid_input, what) {}
};

/// Well-formed input on which the requested quantity is not defined.
class PreconditionViolation : public Error {
public:
    explicit PreconditionViolation(const std::string& what)
        : Error(ErrorCategory::precondition, what) {}
};

/// A resolvent or Neumann series that has no finite solution (delta * rho >= 1).
class DivergenceError : public PreconditionViolation {
public:
    explicit DivergenceError(const std::string& what) : PreconditionViolation(what) {}
};

/// A utility model broke one of its structural assumptions at an evaluated point.
class ModelViolation : public PreconditionViolation {
public:
    explicit ModelViolation(const std::string& what) : PreconditionViolation(what) {}
};

/// The observed market has no eigenspace strong enough to design against.
class NoRecoverableStructure : public PreconditionViolation {
public:
    explicit NoRecoverableStructure(const std::string& what) : PreconditionViolation(what) {}
};

class NumericFailure : public Error {
public:
    explicit NumericFailure(const std::string& what)
        : Error(ErrorCategory::numeric_failure, what) {}
};

}  // namespace spectral_econ
