#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "air/graph.hpp"
#include "air/grouping.hpp"
#include "air/workbook.hpp"

namespace air {

/// A group on its way through resolve → split → name.
struct GroupDraft {
    GroupKind kind = GroupKind::Raw;
    CellRange range;
    std::set<Coord> missing;
    std::optional<NormalizedExpression> canonical;  // formula drafts
    ValueType type = ValueType::Unknown;             // raw drafts
    bool unparsed = false;
    int origin = 0;           // shared by all fragments split from one grouped region
    CellRange origin_range;   // that region before splitting
    std::string name;

    bool is_member(const Coord& c) const { return range.contains(c) && !missing.count(c); }
};

/// Cells read by one canonical variable (or one `varA:varB` pair) of a
/// formula group, taken over the group's whole range.
struct DependencyClaim {
    std::size_t from = 0;    // index of the claiming draft
    std::vector<int> variables;  // one variable, or the two endpoints of a range
    CellRange target;

    /// Cells referenced from the member at `at` (one cell or a range).
    CellRange footprint(const GroupDraft& g, const Coord& at) const;
};

/// One claim per distinct reference of every formula draft, in
/// first-reference order. References to unknown sheets become
/// "unresolved" diagnostics.
std::vector<DependencyClaim> resolve_dependencies(const std::vector<GroupDraft>& groups,
                                                  const std::vector<std::string>& sheets,
                                                  std::vector<Diagnostic>* diagnostics = nullptr);

/// Cuts claimed groups at claim boundaries until every claim covers whole
/// groups. Claims between fragments of one origin are exempt.
std::vector<GroupDraft> split_conflicts(std::vector<GroupDraft> groups,
                                        const std::vector<std::string>& sheets);

/// Turns header text into an identifier: trims, maps whitespace runs to
/// '_', drops other characters outside [A-Za-z0-9_], prefixes '_' before a
/// leading digit. Empty when nothing is left.
std::string sanitize_identifier(std::string_view text);

/// Sheet part of group names: the sanitized sheet name, "Sheet" when
/// nothing is left, so names stay parseable in group formulas.
std::string sheet_identifier(const std::string& sheet);

/// Names drafts "<Sheet>.<Base>" (drafts must be in graph order). Returns
/// the header cells that supplied a name.
std::set<CellAddress> assign_names(std::vector<GroupDraft>& groups, const WorkbookModel& model);

/// Classify → group → resolve → split → name → edges.
DataFlowGraph build_graph(const WorkbookModel& model, int threshold);

}  // namespace air
