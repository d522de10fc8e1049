#pragma once

#include <stdexcept>
#include <string>

namespace rift {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed caller input: unknown token ids, ragged matrices, bad config values.
class InputError : public Error {
public:
    using Error::Error;
};

/// A documented precondition was violated (non-scalar backward root, zero C2, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A request exceeds a hard size limit (enumeration too large, universe exhausted).
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration detected before or during a workflow.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// NaN or other numeric failure produced at runtime.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace rift
