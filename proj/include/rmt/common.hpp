#pragma once

#include <stdexcept>
#include <string>

namespace rmt {

// Numerical failure (eigensolver cap, rejection-loop cap, degenerate input).
// CLI maps this to exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem / serialization failure. CLI maps this to exit code 3.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rmt
