#pragma once

#include <stdexcept>
#include <string>

namespace sdnsim {

/// Caller supplied arguments that violate an operation's preconditions.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Internal state broke an invariant. Should be unreachable.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Reading or writing an artifact failed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sdnsim
