#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace air {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure reading or writing a workbook file.
class IoError : public Error {
public:
    using Error::Error;
};

/// Lexing or syntax error in a formula; `offset` is a byte offset into the
/// formula text (including the leading '=').
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Malformed or wrong-version AIR JSON.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Unknown group name, unknown sheet, or lookup that cannot be satisfied.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Rejected group edit: overlap, shape mismatch, name collision, lowering failure.
class EditError : public Error {
public:
    using Error::Error;
};

class ShapeError : public EditError {
public:
    using EditError::EditError;
};

class EvalError : public Error {
public:
    using Error::Error;
};

/// A location expression applied to a base cell fell outside the sheet.
class OutOfBoundsError : public Error {
public:
    using Error::Error;
};

}  // namespace air
