#pragma once

#include <stdexcept>
#include <string>

namespace edckit {

// Base class for all toolkit failures. Subcommands catch this at the top
// level and turn it into a nonzero exit status.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace edckit
