#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "air/cell.hpp"
#include "air/normalize.hpp"
#include "air/value.hpp"

namespace air {

enum class GroupKind { Raw, Formula };

/// A named rectangular region: a RawGroup (values only) or a FormulaGroup
/// (one canonical formula shared by every member cell).
struct Group {
    std::string name;  // "<Sheet>.<Base>"
    GroupKind kind = GroupKind::Raw;
    CellRange range;
    ValueType value_type = ValueType::Unknown;
    /// Member values in row-major order, missing cells skipped. For formula
    /// groups these are the cached values stored in the workbook.
    std::vector<Value> values;
    std::set<Coord> missing;

    // Formula groups only.
    std::string formula;  // group-name syntax, leading '='
    NormalizedExpression canonical;
    std::pair<std::string, std::string> raw_formula;  // top-left, bottom-right member
    std::vector<std::string> dependencies;            // first-reference order

    bool is_formula() const { return kind == GroupKind::Formula; }
    bool is_member(const Coord& c) const { return range.contains(c) && !missing.count(c); }
    /// Member coordinates in row-major order (element i is at index i-1).
    std::vector<Coord> elements() const;
    std::size_t element_count() const { return std::size_t(range.area()) - missing.size(); }
    /// 1-based element index of `c`, or 0 when `c` is not a member.
    std::size_t element_index(const Coord& c) const;

    /// "FORMULA GROUP: (PXII.Pdd PXII!D2:D30)" / "RAW GROUP: (...)".
    std::string describe() const;

    friend bool operator==(const Group&, const Group&) = default;
};

enum class Severity { Info, Warning, Error };

std::string_view to_string(Severity s);
std::optional<Severity> severity_from_string(std::string_view s);

struct Diagnostic {
    Severity severity = Severity::Warning;
    std::string kind;  // "parse", "dangling", "unresolved", "cycle"
    std::string sheet;
    std::optional<CellRange> range;
    std::string message;

    std::string str() const;
    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Header text consumed as a group name; not part of any group.
struct Label {
    CellAddress address;
    std::string text;
    friend bool operator==(const Label&, const Label&) = default;
};

/// Nodes are groups; an edge (u, v) means v's formula reads cells of u.
struct DataFlowGraph {
    int threshold = 0;
    std::string source;               // workbook path, informational
    std::vector<std::string> sheets;  // workbook sheet order
    std::vector<Group> groups;        // sheet order, then top-left row-major
    std::set<std::pair<std::string, std::string>> edges;
    std::vector<Label> labels;
    std::vector<Diagnostic> diagnostics;

    const Group* find(std::string_view name) const;
    /// Exact-name lookup; throws LookupError listing near-miss names.
    const Group& lookup(std::string_view name) const;
    /// Group whose range contains the cell, or nullptr.
    const Group* find_group(const CellAddress& at) const;
    /// Parses `coord` ("B30") on `sheet`; throws ParseError / LookupError.
    const Group* find_group(std::string_view sheet, std::string_view coord) const;
    bool has_sheet(std::string_view sheet) const;

    /// Names of the groups v depends on / that depend on v.
    std::vector<std::string> predecessors(std::string_view name) const;
    std::vector<std::string> successors(std::string_view name) const;

    bool has_cycle_diagnostic() const;

    friend bool operator==(const DataFlowGraph&, const DataFlowGraph&) = default;
};

/// Names within edit distance 2 (case-insensitive) or sharing the base name.
std::vector<std::string> near_miss_names(const DataFlowGraph& g, std::string_view name);

}  // namespace air
