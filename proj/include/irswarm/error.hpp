#pragma once

#include <stdexcept>
#include <string>

namespace irswarm {

/// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

inline void require(bool condition, const char* message) {
    if (!condition) {
        throw ContractViolation(message);
    }
}

}  // namespace irswarm
