#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace botcal {

// Caller supplied something invalid: bad flags, bad files, mismatched models.
// The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input text. `line()` is 1-based, 0 when not line oriented.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : ValidationError(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class VersionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SchemaMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Numerical routine failed to converge. Maps to exit code 2.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double gradient_norm)
        : std::runtime_error(what), gradient_norm_(gradient_norm) {}

    double gradient_norm() const noexcept { return gradient_norm_; }

private:
    double gradient_norm_;
};

}  // namespace botcal
