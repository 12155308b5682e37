#pragma once

#include <stdexcept>
#include <string>

namespace thermo {

enum class ErrorKind {
    domain,             // invalid geometric input
    insufficient_data,  // too few usable bins or members for a fit
    partial_result,     // enumeration stopped on a resource budget
    unresolved,         // conjugacy separation inconclusive at truncation
    horizon,            // database does not cover the distance a query needs
    config,             // rejected scenario or perturbation configuration
    io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace thermo
