#pragma once

#include <stdexcept>
#include <string>

namespace afp {

/// Violated precondition or malformed input.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem or encoding failure; message names the offending path.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

} // namespace afp
