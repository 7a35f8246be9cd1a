#pragma once

#include <stdexcept>
#include <string>

namespace doer {

// Precondition violations: bad sizes, dimension mismatches, out-of-range values.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Not enough data to fit a model.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Singular or non-positive-definite systems.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite or otherwise unusable sample values.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace doer
