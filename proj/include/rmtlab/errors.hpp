#pragma once

#include <stdexcept>
#include <string>

namespace rmtlab {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument is outside the documented domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Requested moments cannot be realized by any distribution.
class FeasibilityError : public Error {
public:
    using Error::Error;
};

/// A pole, repeated eigenvalue or near-degenerate configuration.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration; `key()` names the offending key path.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& message)
        : Error(key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace rmtlab
