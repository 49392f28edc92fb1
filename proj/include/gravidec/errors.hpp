#pragma once

#include <stdexcept>
#include <string>

namespace gravidec {

/// Non-physical or out-of-range input (negative mass, zero frequency, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Matrix or tensor dimensions that do not fit together, or exceed a cap.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A requested approximation is used outside the range where it is defined.
class RegimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive integration failed to reach the requested accuracy.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate)
        : std::runtime_error(what), error_estimate(estimate) {}

    double error_estimate;
};

/// Malformed or schema-violating configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Fit or extraction that has nothing to work with.
class ExtractionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gravidec
