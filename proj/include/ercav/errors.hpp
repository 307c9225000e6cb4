#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ercav {

/// Bad command-line or configuration usage (unknown keys, missing units,
/// missing files). Maps to exit code 2 in the CLI.
class usage_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Structurally invalid data file. Carries the 1-based line number where
/// parsing stopped.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// A run configuration that cannot be executed as requested (step size,
/// trace window, grid resolution). Distinct from std::domain_error, which
/// flags unphysical inputs.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ercav
