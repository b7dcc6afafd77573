#pragma once

#include <stdexcept>
#include <string>

namespace slopesize {

// Bad argument or violated precondition. The CLI maps these to exit code 2.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A moment that does not exist for the requested sample size.
class UndefinedMoment : public DomainError {
public:
    using DomainError::DomainError;
};

// Numerical failures (series guard tripped, search ceiling hit). Exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SearchFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Fit failures. Callers in the simulation loops resample on these.
class DegenerateX : public NumericalError {
public:
    DegenerateX() : NumericalError("all predictor values are equal (S_XX = 0)") {}
};

class PerfectFit : public NumericalError {
public:
    PerfectFit() : NumericalError("residual sum of squares is zero; t statistics undefined") {}
};

}  // namespace slopesize
