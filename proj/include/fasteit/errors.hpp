#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fasteit {

// All library failures derive from Error so callers can catch one type.
// The CLI maps the categories onto exit codes (validation, numerical, io).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inputs outside a function's physical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid grid sizes, empty grids, malformed config values.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Bad call arguments (inverted windows, non-uniform axes, no overlap).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Caller broke a documented precondition of an operator.
class ContractError : public Error {
public:
    using Error::Error;
};

// Measured data unusable for the requested analysis.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), detail_(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }
    // Message without the line suffix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t line_;
};

// Result files that are truncated, corrupt or from another format version.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// A non-finite value appeared while marching the (t, z) grid.
class NumericalBlowup : public Error {
public:
    NumericalBlowup(std::size_t time_index, std::size_t slice_index)
        : Error("non-finite field or atomic state at n_t=" + std::to_string(time_index) +
                ", n_z=" + std::to_string(slice_index)),
          time_index_(time_index),
          slice_index_(slice_index) {}
    NumericalBlowup(const std::string& what, std::size_t time_index, std::size_t slice_index)
        : Error(what), time_index_(time_index), slice_index_(slice_index) {}

    std::size_t time_index() const noexcept { return time_index_; }
    std::size_t slice_index() const noexcept { return slice_index_; }

private:
    std::size_t time_index_;
    std::size_t slice_index_;
};

}  // namespace fasteit
