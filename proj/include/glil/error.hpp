#pragma once

#include <stdexcept>
#include <string>

namespace glil {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain argument (non-finite value, unknown atom, n < 3, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// A prior model that violates its invariants.
class ModelError : public Error {
public:
    using Error::Error;
};

/// Grid, lattice, band or experiment configuration that cannot be run.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Non-finite intermediate value during a computation.
class NumericError : public Error {
public:
    using Error::Error;
};

/// An adversary strategy emitted a volatility outside the band.
class StrategyViolation : public Error {
public:
    using Error::Error;
};

}  // namespace glil
