#pragma once

#include <stdexcept>
#include <string>

namespace mctspo {

/// A caller broke an operation's precondition (dimension mismatch, empty
/// trajectory, stepping a finished episode, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The sampled mutation direction lies (numerically) in the null space of the
/// network outputs, so no finite magnitude reaches the divergence budget.
class DegenerateDirection : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CandidateGenerationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by a counted environment when a step would exceed its call budget.
class BudgetExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const char* message)
{
    if (!condition) {
        throw ContractViolation(message);
    }
}

inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw ContractViolation(message);
    }
}

} // namespace mctspo
