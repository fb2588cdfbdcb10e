#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scalelab {

/// Argument outside the mathematical domain of an operation
/// (beta outside (0,1), zero gradient coordinate, nonpositive v, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Shape disagreement between vectors or grids.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace scalelab
