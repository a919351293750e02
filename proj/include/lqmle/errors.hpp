#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lqmle {

/// Malformed caller input: bad sizes, NaN data, unknown names.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parameter vector outside the model's compact box.
class ConstraintError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Parameters for which the recursion has no stationary solution.
class StationarityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Overflow, NaN or a scale below its floor during a computation.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A matrix that has to be inverted is (numerically) singular.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration value failed validation; `key` is its JSON path.
class ConfigError : public InputError {
public:
    ConfigError(std::string key, const std::string& message)
        : InputError(key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace lqmle
