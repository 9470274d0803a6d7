#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace faery {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a vector length does not match what a shape or set requires.
class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::string what_len, std::size_t expected, std::size_t actual)
        : Error(what_len + ": expected length " + std::to_string(expected) + ", got " + std::to_string(actual)),
          expected_(expected),
          actual_(actual) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace faery
