#pragma once

#include <stdexcept>
#include <string>

namespace spfk {

// All recoverable failures (bad input files, domain violations, degenerate
// data) are reported as spfk::error with a short stable message.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spfk
