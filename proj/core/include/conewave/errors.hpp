#pragma once

#include <stdexcept>
#include <string>

namespace conewave {

// Bad input or configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (exit code 2).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Base of all numerical failures (exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OverflowError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Fredholm indicator below threshold: possible resonance.
class NearSingularError : public NumericalError {
public:
    NearSingularError(const std::string& what, double indicator)
        : NumericalError(what), indicator_(indicator) {}
    double indicator() const { return indicator_; }

private:
    double indicator_;
};

// Iteration failed to contract; carries the last defect.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double defect)
        : NumericalError(what), defect_(defect) {}
    double defect() const { return defect_; }

private:
    double defect_;
};

// Quadrature could not reach the requested tolerance.
class ToleranceError : public NumericalError {
public:
    ToleranceError(const std::string& what, double achieved)
        : NumericalError(what), achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

}  // namespace conewave
