#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vesselenh {

// Violated precondition on an operation's inputs (bad geometry, wrong
// channel count, invalid configuration).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed file content. Carries the byte offset where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const char* msg) {
    if (!cond) throw ContractViolation(msg);
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractViolation(msg);
}

}  // namespace detail

}  // namespace vesselenh
