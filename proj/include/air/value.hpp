#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace air {

/// Spreadsheet date: the underlying serial day number (1900 date system).
struct DateSerial {
    double serial = 0;
    friend bool operator==(const DateSerial&, const DateSerial&) = default;
};

/// Spreadsheet error literal such as "#DIV/0!".
struct ErrorCode {
    std::string code;
    friend bool operator==(const ErrorCode&, const ErrorCode&) = default;
};

using Value = std::variant<std::monostate, double, std::string, bool, DateSerial, ErrorCode>;

enum class ValueType { Empty, Number, Text, Boolean, Date, Error, Unknown };

ValueType type_of(const Value& v);
std::string_view to_string(ValueType t);
std::optional<ValueType> value_type_from_string(std::string_view s);

inline bool is_empty(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// Human-readable rendering used by listings and `show`.
std::string display(const Value& v);

}  // namespace air
