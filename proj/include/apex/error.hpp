#pragma once

#include <stdexcept>
#include <string>

namespace apex {

/// Base class for all apex errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input to a library operation.
class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& what) : Error(what) {}
};

/// Bad run configuration (unknown key, out-of-range value, missing credential).
/// Maps to CLI exit code 2.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Remote backend failure after retries are exhausted. Maps to CLI exit code 3.
class BackendError : public Error {
public:
    explicit BackendError(const std::string& what) : Error(what) {}
};

/// A simulation was asked to take more steps than its configured budget.
class BudgetError : public Error {
public:
    explicit BudgetError(const std::string& what) : Error(what) {}
};

}  // namespace apex
