#pragma once

#include <stdexcept>
#include <string>

namespace stoplab {

// Base of every error thrown by the library. The CLI maps subclasses to exit
// codes (ConfigError -> 2, ParameterError -> 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (t outside [0,T], mismatched horizons, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Model parameters violate a numerical precondition, e.g. no-arbitrage d < rho < u.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Non-finite or out-of-bound data encountered while evaluating a payoff.
class DataError : public Error {
public:
    using Error::Error;
};

/// Stopping rule does not cover a reachable node.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Exhaustive enumeration refused because it would exceed the hard size limit.
class SizeLimitError : public Error {
public:
    SizeLimitError(const std::string& what, unsigned long long would_generate)
        : Error(what), would_generate_(would_generate) {}

    unsigned long long would_generate() const noexcept { return would_generate_; }

private:
    unsigned long long would_generate_;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace stoplab
