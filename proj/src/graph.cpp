#include "air/graph.hpp"

#include <algorithm>

#include "air/error.hpp"
#include "air/formula.hpp"

namespace air {

std::vector<Coord> Group::elements() const {
    std::vector<Coord> out;
    out.reserve(element_count());
    for (int r = range.first.row; r <= range.last.row; ++r) {
        for (int c = range.first.column; c <= range.last.column; ++c) {
            if (!missing.count({c, r})) out.push_back({c, r});
        }
    }
    return out;
}

std::size_t Group::element_index(const Coord& c) const {
    if (!is_member(c)) return 0;
    std::size_t before = std::size_t(c.row - range.first.row) * std::size_t(range.width()) +
                         std::size_t(c.column - range.first.column);
    // Missing cells that precede `c` in row-major order do not count.
    auto end = missing.lower_bound(c);
    std::size_t skipped = std::size_t(std::distance(missing.begin(), end));
    return before - skipped + 1;
}

std::string Group::describe() const {
    return std::string(is_formula() ? "FORMULA GROUP: (" : "RAW GROUP: (") + name + " " +
           range.qualified() + ")";
}

std::string_view to_string(Severity s) {
    switch (s) {
        case Severity::Info: return "info";
        case Severity::Warning: return "warning";
        case Severity::Error: return "error";
    }
    return "warning";
}

std::optional<Severity> severity_from_string(std::string_view s) {
    if (s == "info") return Severity::Info;
    if (s == "warning") return Severity::Warning;
    if (s == "error") return Severity::Error;
    return std::nullopt;
}

std::string Diagnostic::str() const {
    std::string where = range ? range->qualified() : quote_sheet_name(sheet);
    return std::string(to_string(severity)) + ": " + where + ": " + message + " [" + kind + "]";
}

const Group* DataFlowGraph::find(std::string_view name) const {
    for (const auto& g : groups) {
        if (g.name == name) return &g;
    }
    return nullptr;
}

const Group& DataFlowGraph::lookup(std::string_view name) const {
    if (const auto* g = find(name)) return *g;
    std::string msg = "unknown group '" + std::string(name) + "'";
    auto near = near_miss_names(*this, name);
    if (!near.empty()) {
        msg += "; did you mean ";
        for (std::size_t i = 0; i < near.size(); ++i) msg += (i ? ", " : "") + near[i];
        msg += "?";
    }
    throw LookupError(msg);
}

const Group* DataFlowGraph::find_group(const CellAddress& at) const {
    for (const auto& g : groups) {
        if (g.range.contains(at)) return &g;
    }
    return nullptr;
}

const Group* DataFlowGraph::find_group(std::string_view sheet, std::string_view coord) const {
    auto c = parse_coord(coord);
    if (!c) throw ParseError("invalid cell coordinate '" + std::string(coord) + "'", 0);
    if (!has_sheet(sheet)) throw LookupError("unknown sheet '" + std::string(sheet) + "'");
    return find_group(CellAddress{std::string(sheet), c->column, c->row});
}

bool DataFlowGraph::has_sheet(std::string_view sheet) const {
    return std::find(sheets.begin(), sheets.end(), sheet) != sheets.end();
}

std::vector<std::string> DataFlowGraph::predecessors(std::string_view name) const {
    std::vector<std::string> out;
    for (const auto& [u, v] : edges) {
        if (v == name) out.push_back(u);
    }
    return out;
}

std::vector<std::string> DataFlowGraph::successors(std::string_view name) const {
    std::vector<std::string> out;
    for (const auto& [u, v] : edges) {
        if (u == name) out.push_back(v);
    }
    return out;
}

bool DataFlowGraph::has_cycle_diagnostic() const {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.kind == "cycle"; });
}

namespace {

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            bool same = std::toupper(static_cast<unsigned char>(a[i - 1])) ==
                        std::toupper(static_cast<unsigned char>(b[j - 1]));
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (same ? 0 : 1)});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string_view base_of(std::string_view name) {
    auto dot = name.rfind('.');
    return dot == std::string_view::npos ? name : name.substr(dot + 1);
}

}  // namespace

std::vector<std::string> near_miss_names(const DataFlowGraph& g, std::string_view name) {
    std::vector<std::pair<std::size_t, std::string>> scored;
    for (const auto& grp : g.groups) {
        std::size_t d = edit_distance(grp.name, name);
        if (d <= 2 || iequals(base_of(grp.name), base_of(name))) scored.emplace_back(d, grp.name);
    }
    std::sort(scored.begin(), scored.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < scored.size() && i < 5; ++i) out.push_back(scored[i].second);
    return out;
}

}  // namespace air
