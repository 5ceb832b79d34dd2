#pragma once

#include <stdexcept>
#include <string>

namespace hiforead {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for malformed input data (CSV rows, timestamps, ids).
class DataError : public Error {
public:
    using Error::Error;
};

/// Raised for invalid configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace hiforead
