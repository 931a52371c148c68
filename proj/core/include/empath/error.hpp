#pragma once

#include <stdexcept>
#include <string>

namespace empath {

// Bad user input: unreadable files, malformed records, unknown labels,
// violated CLI preconditions. The CLI maps this to exit status 2;
// anything else that escapes is an internal error (exit 1).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace empath
