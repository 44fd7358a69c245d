#include "air/value.hpp"

#include <array>
#include <charconv>

namespace air {

ValueType type_of(const Value& v) {
    switch (v.index()) {
        case 0: return ValueType::Empty;
        case 1: return ValueType::Number;
        case 2: return ValueType::Text;
        case 3: return ValueType::Boolean;
        case 4: return ValueType::Date;
        default: return ValueType::Error;
    }
}

std::string_view to_string(ValueType t) {
    switch (t) {
        case ValueType::Empty: return "empty";
        case ValueType::Number: return "number";
        case ValueType::Text: return "text";
        case ValueType::Boolean: return "boolean";
        case ValueType::Date: return "date";
        case ValueType::Error: return "error";
        case ValueType::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<ValueType> value_type_from_string(std::string_view s) {
    for (auto t : {ValueType::Empty, ValueType::Number, ValueType::Text, ValueType::Boolean,
                   ValueType::Date, ValueType::Error, ValueType::Unknown}) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    std::string out(buf.data(), end);
    // to_chars writes "1e+20"; spreadsheets accept the upper-case form.
    for (char& ch : out) {
        if (ch == 'e') ch = 'E';
    }
    return out;
}

std::string display(const Value& v) {
    struct Visitor {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(double d) const { return format_number(d); }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(bool b) const { return b ? "TRUE" : "FALSE"; }
        std::string operator()(const DateSerial& d) const { return "date:" + format_number(d.serial); }
        std::string operator()(const ErrorCode& e) const { return e.code; }
    };
    return std::visit(Visitor{}, v);
}

}  // namespace air
