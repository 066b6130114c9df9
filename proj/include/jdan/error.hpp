#pragma once

#include <stdexcept>
#include <string>

namespace jdan {

//! Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

//! Caller violated a size or shape contract (dimension mismatch, wrong depth).
class ContractError : public Error {
public:
    using Error::Error;
};

//! Non-finite input to a function that requires finite arguments.
class DomainError : public Error {
public:
    using Error::Error;
};

//! Evaluation overflowed or produced a non-finite intermediate.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, int layer)
        : Error(what + " (layer " + std::to_string(layer) + ")"), layer_(layer)
    {}

    int layer() const noexcept { return layer_; }

private:
    int layer_;
};

//! Marginal network is flat over its support: Psi(U) - Psi(L) below guard.
class DegenerateMarginalError : public Error {
public:
    using Error::Error;
};

//! Bisection could not reach the requested CDF tolerance.
class InversionError : public Error {
public:
    InversionError(const std::string& what, double lo, double hi)
        : Error(what + " [bracket " + std::to_string(lo) + ", " + std::to_string(hi) + "]"),
          lo_(lo), hi_(hi)
    {}

    double bracket_lower() const noexcept { return lo_; }
    double bracket_upper() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

//! Loss or gradient became non-finite during training.
class NumericalError : public Error {
public:
    using Error::Error;
};

//! Input data problems. Subclasses distinguish the failure kind.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

class MissingColumnError : public DataError {
public:
    using DataError::DataError;
};

class EmptyDataError : public DataError {
public:
    using DataError::DataError;
};

class DegenerateDimensionError : public DataError {
public:
    using DataError::DataError;
};

//! Malformed configuration or model document.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace jdan
