#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace constance {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A malformed row in an input file. row() is 1-based and counts the header.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t row, const std::string& message)
        : Error(source + ":" + std::to_string(row) + ": " + message), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

// Structurally invalid input: unknown ids, dimension mismatch, bad parameters.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A numerical failure such as zero total likelihood mass.
class NumericError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace constance
