#include "air/workbook.hpp"

#include "air/error.hpp"

namespace air {

const CellRecord* Sheet::find(const Coord& c) const {
    auto it = cells.find(c);
    return it == cells.end() ? nullptr : &it->second;
}

CellRecord* Sheet::find(const Coord& c) {
    auto it = cells.find(c);
    return it == cells.end() ? nullptr : &it->second;
}

CellRecord& Sheet::put(const Coord& c, Value value, std::optional<std::string> formula) {
    CellRecord rec{CellAddress{name, c.column, c.row}, std::move(formula), std::move(value)};
    auto [it, inserted] = cells.insert_or_assign(c, std::move(rec));
    return it->second;
}

const Sheet* WorkbookModel::find_sheet(std::string_view name) const {
    for (const auto& s : sheets) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

Sheet* WorkbookModel::find_sheet(std::string_view name) {
    for (auto& s : sheets) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

Sheet& WorkbookModel::add_sheet(std::string name) {
    if (name.empty()) throw Error("sheet name must not be empty");
    if (find_sheet(name)) throw Error("duplicate sheet name '" + name + "'");
    sheets.push_back(Sheet{std::move(name), {}});
    return sheets.back();
}

const CellRecord* WorkbookModel::find(const CellAddress& a) const {
    const Sheet* s = find_sheet(a.sheet);
    return s ? s->find(a.coord()) : nullptr;
}

}  // namespace air
