#pragma once

#include <stdexcept>
#include <string>

namespace cpmon {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Observation rejected by a stream consumer (non-finite, or non-positive
/// where the family requires positive support).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Monte Carlo calibration ran out of surviving streams.
class CalibrationExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cpmon
