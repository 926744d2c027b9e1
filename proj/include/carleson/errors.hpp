#pragma once

#include <stdexcept>
#include <string>

namespace carleson {

// Malformed input or configuration.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A matrix that should be invertible (an average of a weight, a Gram form)
// has relative smallest eigenvalue below the degeneracy floor.
class DegenerateWeight : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotPositiveSemidefinite : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ToleranceNotReached : public std::runtime_error {
public:
    ToleranceNotReached(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}

    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

class ConvergenceFailure : public std::runtime_error {
public:
    ConvergenceFailure(const std::string& what, double last_value)
        : std::runtime_error(what), last_value_(last_value) {}

    double last_value() const noexcept { return last_value_; }

private:
    double last_value_;
};

}  // namespace carleson
