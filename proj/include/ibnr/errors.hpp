#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ibnr {

/// Input outside the mathematical domain of a function (e.g. t <= 0 for the generator).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Structurally invalid input: bad event logs, ragged triangles, shape mismatches.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A file failed to parse; carries the 1-based line number.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : ValidationError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Base for failures of a numerical procedure on otherwise valid input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Accept-reject sampler failures: envelope violation or pathological acceptance rate.
class SamplerError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace ibnr
