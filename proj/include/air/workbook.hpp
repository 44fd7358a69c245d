#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "air/cell.hpp"
#include "air/value.hpp"

namespace air {

/// One populated cell. A formula cell keeps its formula text (with leading
/// '=') and whatever value the file had cached for it in `value`.
struct CellRecord {
    CellAddress address;
    std::optional<std::string> formula;
    Value value;

    bool is_formula() const { return formula.has_value(); }
    ValueType value_type() const { return type_of(value); }

    friend bool operator==(const CellRecord&, const CellRecord&) = default;
};

struct Sheet {
    std::string name;
    std::map<Coord, CellRecord> cells;  // row-major order

    const CellRecord* find(const Coord& c) const;
    CellRecord* find(const Coord& c);
    /// Inserts or replaces; keeps the record's address in sync with the key.
    CellRecord& put(const Coord& c, Value value, std::optional<std::string> formula = std::nullopt);
    void erase(const Coord& c) { cells.erase(c); }

    friend bool operator==(const Sheet& a, const Sheet& b) {
        return a.name == b.name && a.cells == b.cells;
    }
};

struct WorkbookModel {
    std::vector<Sheet> sheets;
    std::filesystem::path path;

    const Sheet* find_sheet(std::string_view name) const;
    Sheet* find_sheet(std::string_view name);
    Sheet& add_sheet(std::string name);
    const CellRecord* find(const CellAddress& a) const;

    /// Equality ignores the origin path.
    friend bool operator==(const WorkbookModel& a, const WorkbookModel& b) {
        return a.sheets == b.sheets;
    }
};

}  // namespace air
