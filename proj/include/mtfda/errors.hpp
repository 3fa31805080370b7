#pragma once

#include <stdexcept>
#include <string>

namespace mtfda {

// Bad user-supplied parameter (flag value, threshold, dimension, ...).
struct param_error : std::invalid_argument {
    explicit param_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Malformed input data (CSV schema, JSON schema, invariant violations on load).
struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure (non-convergence, singular system that survived regularization).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mtfda
