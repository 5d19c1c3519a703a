#ifndef CRISP_ERROR_HPP
#define CRISP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace crisp {

// Problems caused by inputs: unreadable or malformed artifacts, contract
// violations in data. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad invocation (invalid flag combinations, out-of-range parameters).
// The CLI maps these to exit code 1.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace crisp

#endif  // CRISP_ERROR_HPP
