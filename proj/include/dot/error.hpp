#pragma once

#include <stdexcept>
#include <string>

namespace dot {

enum class ErrorKind {
    Parse,          // malformed input record
    Validation,     // record or parameter violates an invariant
    Parameter,      // bad argument to an operation
    EmptyTrace,
    NoMarkers,
    InvalidTrace,
    Aggregation,
    InvalidScore,
    Exhaustion,
    Precondition,
    InsufficientOverlap,
    Template,
    Io,
    Startup,
    Http,
};

const char* to_string(ErrorKind kind);

// Single exception type for the toolkit; callers switch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace dot
