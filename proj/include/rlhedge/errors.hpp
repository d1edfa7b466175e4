#pragma once

#include <stdexcept>
#include <string>

namespace rlhedge {

/// Raised when an input violates a documented precondition. The message names
/// the offending field.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when an operation is called on an object in the wrong state
/// (e.g. reading the total of an unfinished episode).
class StateError : public std::logic_error {
public:
    explicit StateError(const std::string& what) : std::logic_error(what) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ValidationError(message);
}

}  // namespace rlhedge
