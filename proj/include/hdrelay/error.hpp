#pragma once

#include <stdexcept>
#include <string>

namespace hdrelay {

// Bad input or violated precondition. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InfeasibleError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Numerical breakdown. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double estimate)
        : NumericalError(what), estimate_(estimate) {}
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

}  // namespace hdrelay
