#pragma once

#include <stdexcept>
#include <string>

namespace doprd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed textual input (Solomon files, instance files, config files).
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

class EmptyInstanceError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DuplicateLocationError : public Error {
public:
    using Error::Error;
};

/// A policy produced an action that violates the action invariants.
class InfeasibleActionError : public Error {
public:
    using Error::Error;
};

/// Upstream invariant breach detected while aggregating results.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// The requested problem exceeds a configured exact-solver size bound.
class SizeLimitError : public Error {
public:
    using Error::Error;
};

}  // namespace doprd
