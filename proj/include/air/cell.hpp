#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace air {

inline constexpr int kMaxColumn = 16384;   // XFD
inline constexpr int kMaxRow = 1048576;

/// Column index (1-based) to letters: 1 -> A, 27 -> AA.
std::string column_letters(int column);

/// Letters to 1-based column index; nullopt when empty, non-alphabetic or beyond XFD.
std::optional<int> column_index(std::string_view letters);

/// Sheet-less grid position. Ordering is row-major.
struct Coord {
    int column = 1;
    int row = 1;

    friend bool operator==(const Coord&, const Coord&) = default;
    friend std::strong_ordering operator<=>(const Coord& a, const Coord& b) {
        if (auto c = a.row <=> b.row; c != 0) return c;
        return a.column <=> b.column;
    }
};

struct CellAddress {
    std::string sheet;
    int column = 1;
    int row = 1;

    Coord coord() const { return {column, row}; }
    /// "B15" without sheet.
    std::string a1() const;
    /// "Sheet1!B15" (sheet quoted when needed).
    std::string qualified() const;

    friend bool operator==(const CellAddress&, const CellAddress&) = default;
    /// Sheet name, then row-major.
    friend bool operator<(const CellAddress& a, const CellAddress& b) {
        if (a.sheet != b.sheet) return a.sheet < b.sheet;
        return a.coord() < b.coord();
    }
};

/// Parses "B15", "$B$15" (dollars ignored) or "Sheet1!B15" / "'My Sheet'!B15".
/// Sheet defaults to `default_sheet` when absent. Throws ParseError.
CellAddress parse_cell_address(std::string_view text, std::string_view default_sheet = {});

/// Parses an A1 coordinate without sheet ("B15"); nullopt when malformed.
std::optional<Coord> parse_coord(std::string_view text);

/// Sheet name as it must appear before '!' in a reference.
std::string quote_sheet_name(std::string_view sheet);

/// Inclusive rectangular range on one sheet.
struct CellRange {
    std::string sheet;
    Coord first;  // top-left
    Coord last;   // bottom-right

    int width() const { return last.column - first.column + 1; }
    int height() const { return last.row - first.row + 1; }
    std::int64_t area() const { return std::int64_t(width()) * height(); }
    bool contains(const Coord& c) const {
        return c.column >= first.column && c.column <= last.column && c.row >= first.row &&
               c.row <= last.row;
    }
    bool contains(const CellAddress& a) const { return a.sheet == sheet && contains(a.coord()); }
    bool intersects(const CellRange& o) const;
    std::optional<CellRange> intersection(const CellRange& o) const;

    /// "A2:A30"
    std::string a1() const;
    /// "Sheet!A2:A30"
    std::string qualified() const;

    friend bool operator==(const CellRange&, const CellRange&) = default;
};

/// Parses "A2:A30" or a single cell "B4" (a 1x1 range) onto `sheet`.
CellRange parse_range(std::string_view text, std::string_view sheet);

}  // namespace air
