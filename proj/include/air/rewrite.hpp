#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

#include "air/formula.hpp"
#include "air/graph.hpp"

namespace air {

/// Group-level text of a formula group: each canonical variable becomes the
/// group it maps onto element-wise (`Name`), a single element (`Name[i]`), a
/// sub-range of a 1-D group (`Name[a:b]`), or sheet-qualified A1 text taken
/// at the group's top-left cell when no group mapping exists.
std::string render_group_formula(const DataFlowGraph& graph, const Group& group);

/// Where a group formula is written: a rectangle minus its missing cells.
struct LoweringTarget {
    CellRange range;
    std::set<Coord> missing;
};

/// Lowers a parsed group formula to one A1 formula per member of `target`.
/// Group operands with the target's shape are read element-wise (same
/// position), 1x1 groups and `Name[i]` broadcast, and whole groups or
/// slices passed directly to a function become ranges. Throws LookupError
/// for unknown groups, ShapeError on shape mismatches, EditError for other
/// lowering failures.
std::map<Coord, std::string> lower_group_formula(const DataFlowGraph& graph,
                                                 const LoweringTarget& target, const Expr& formula);

}  // namespace air
