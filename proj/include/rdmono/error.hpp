#pragma once

#include <stdexcept>
#include <string>

namespace rdmono {

// Bad user input: malformed data, inconsistent configuration, violated
// preconditions. The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A solver or cross-check failed on otherwise valid input. Exit code 1.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace rdmono
