#pragma once

#include <stdexcept>
#include <string>

namespace facefuse {

// Bad or inconsistent input data (files, dimensions, labels). CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (degenerate spectrum, NaN during training). CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace facefuse
