#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace parpc {

/// Malformed or out-of-contract input (files, flags, indices).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A conditioning or regression system is numerically singular.
class DegenerateConditioning : public std::runtime_error {
public:
    DegenerateConditioning(const std::string& what, std::vector<int> vars)
        : std::runtime_error(what), variables_(std::move(vars)) {}

    const std::vector<int>& variables() const noexcept { return variables_; }

private:
    std::vector<int> variables_;
};

/// Sufficient statistics cannot be formed (e.g. a zero-variance column).
class DegenerateStatistics : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a worker fails during a level; no decisions of that level are merged.
class LevelAborted : public std::runtime_error {
public:
    LevelAborted(int level, const std::string& cause)
        : std::runtime_error("level " + std::to_string(level) + " aborted: " + cause), level_(level) {}

    int level() const noexcept { return level_; }

private:
    int level_;
};

}  // namespace parpc
