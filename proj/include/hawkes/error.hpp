#pragma once

#include <stdexcept>
#include <string>

namespace hawkes {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration, data file or argument.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a function (negative lag, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An intensity evaluated to a non-positive or non-finite value.
class NonFiniteIntensity : public Error {
public:
    using Error::Error;
};

/// The branching matrix has spectral radius >= 1 where stability is required.
class Unstable : public Error {
public:
    using Error::Error;
};

/// A simulated replicate exceeded the configured event budget.
class Runaway : public Error {
public:
    using Error::Error;
};

class HorizonMismatch : public Error {
public:
    using Error::Error;
};

/// A zero pattern references an entry outside K x K or without an adjacency slot.
class InfeasiblePattern : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class NotSPD : public Error {
public:
    using Error::Error;
};

/// Orthant projection requested for more constrained coordinates than enumeration supports.
class ExponentialBlowup : public Error {
public:
    using Error::Error;
};

/// Full-model fit has a lower log-likelihood than the nested null fit.
class NestingViolation : public Error {
public:
    using Error::Error;
};

} // namespace hawkes
