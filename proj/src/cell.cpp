#include "air/cell.hpp"

#include <algorithm>
#include <cctype>

#include "air/error.hpp"

namespace air {

std::string column_letters(int column) {
    std::string out;
    while (column > 0) {
        int rem = (column - 1) % 26;
        out.push_back(char('A' + rem));
        column = (column - 1) / 26;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::optional<int> column_index(std::string_view letters) {
    if (letters.empty() || letters.size() > 3) return std::nullopt;
    int value = 0;
    for (char ch : letters) {
        if (!std::isalpha(static_cast<unsigned char>(ch))) return std::nullopt;
        value = value * 26 + (std::toupper(static_cast<unsigned char>(ch)) - 'A' + 1);
    }
    if (value > kMaxColumn) return std::nullopt;
    return value;
}

std::optional<Coord> parse_coord(std::string_view text) {
    std::size_t i = 0;
    if (i < text.size() && text[i] == '$') ++i;
    std::size_t letters_begin = i;
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
    auto col = column_index(text.substr(letters_begin, i - letters_begin));
    if (!col) return std::nullopt;
    if (i < text.size() && text[i] == '$') ++i;
    std::size_t digits_begin = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i != text.size() || digits_begin == i || i - digits_begin > 7) return std::nullopt;
    int row = std::stoi(std::string(text.substr(digits_begin)));
    if (row < 1 || row > kMaxRow) return std::nullopt;
    return Coord{*col, row};
}

namespace {

bool plain_sheet_name(std::string_view sheet) {
    if (sheet.empty()) return false;
    if (std::isdigit(static_cast<unsigned char>(sheet.front()))) return false;
    for (char ch : sheet) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '.') return false;
    }
    // A sheet called "A1" would read as a cell reference.
    return !parse_coord(sheet).has_value();
}

}  // namespace

std::string quote_sheet_name(std::string_view sheet) {
    if (plain_sheet_name(sheet)) return std::string(sheet);
    std::string out = "'";
    for (char ch : sheet) {
        if (ch == '\'') out.push_back('\'');
        out.push_back(ch);
    }
    out.push_back('\'');
    return out;
}

std::string CellAddress::a1() const { return column_letters(column) + std::to_string(row); }

std::string CellAddress::qualified() const { return quote_sheet_name(sheet) + "!" + a1(); }

namespace {

// Splits "Sheet!rest" / "'Quoted'!rest"; returns the sheet (empty if none) and advances `rest`.
std::string split_sheet(std::string_view text, std::string_view& rest) {
    if (!text.empty() && text.front() == '\'') {
        std::string sheet;
        std::size_t i = 1;
        while (i < text.size()) {
            if (text[i] == '\'') {
                if (i + 1 < text.size() && text[i + 1] == '\'') {
                    sheet.push_back('\'');
                    i += 2;
                    continue;
                }
                break;
            }
            sheet.push_back(text[i++]);
        }
        if (i + 1 >= text.size() || text[i] != '\'' || text[i + 1] != '!')
            throw ParseError("malformed quoted sheet name in '" + std::string(text) + "'", i);
        rest = text.substr(i + 2);
        return sheet;
    }
    auto bang = text.rfind('!');
    if (bang == std::string_view::npos) {
        rest = text;
        return {};
    }
    rest = text.substr(bang + 1);
    return std::string(text.substr(0, bang));
}

}  // namespace

CellAddress parse_cell_address(std::string_view text, std::string_view default_sheet) {
    std::string_view rest;
    std::string sheet = split_sheet(text, rest);
    auto coord = parse_coord(rest);
    if (!coord) throw ParseError("malformed cell address '" + std::string(text) + "'", 0);
    if (sheet.empty()) sheet = std::string(default_sheet);
    return CellAddress{sheet, coord->column, coord->row};
}

bool CellRange::intersects(const CellRange& o) const { return intersection(o).has_value(); }

std::optional<CellRange> CellRange::intersection(const CellRange& o) const {
    if (sheet != o.sheet) return std::nullopt;
    Coord lo{std::max(first.column, o.first.column), std::max(first.row, o.first.row)};
    Coord hi{std::min(last.column, o.last.column), std::min(last.row, o.last.row)};
    if (lo.column > hi.column || lo.row > hi.row) return std::nullopt;
    return CellRange{sheet, lo, hi};
}

std::string CellRange::a1() const {
    return CellAddress{sheet, first.column, first.row}.a1() + ":" +
           CellAddress{sheet, last.column, last.row}.a1();
}

std::string CellRange::qualified() const { return quote_sheet_name(sheet) + "!" + a1(); }

CellRange parse_range(std::string_view text, std::string_view sheet) {
    auto colon = text.find(':');
    auto lo = parse_coord(text.substr(0, colon));
    auto hi = colon == std::string_view::npos ? lo : parse_coord(text.substr(colon + 1));
    if (!lo || !hi) throw ParseError("malformed range '" + std::string(text) + "'", 0);
    CellRange r{std::string(sheet),
                {std::min(lo->column, hi->column), std::min(lo->row, hi->row)},
                {std::max(lo->column, hi->column), std::max(lo->row, hi->row)}};
    return r;
}

}  // namespace air
