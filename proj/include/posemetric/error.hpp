#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace posemetric {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed data that violates a precondition (sizes, ranges, finiteness).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Two vectors / layers / files disagree on a dimension.
class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// An angle was requested between vectors of (near) zero length.
class DegenerateVector : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// NaN or infinity reached a network input or gradient.
class NonFiniteValue : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// Lookup of a named entity (metric, clip, role, joint) failed.
class NotFound : public Error {
public:
    using Error::Error;
};

// Malformed text input; carries the 1-based line of the offending token.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Malformed binary or JSON file (bad magic, version, truncation, schema).
class FormatError : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite loss.
class TrainingDiverged : public Error {
public:
    using Error::Error;
};

}  // namespace posemetric
