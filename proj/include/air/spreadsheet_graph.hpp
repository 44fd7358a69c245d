#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "air/graph.hpp"
#include "air/workbook.hpp"

namespace air {

/// A workbook together with its AIR, editable at group level.
///
/// Edits are lowered to A1 formulas immediately and written to a working
/// copy of the workbook, and the graph is rebuilt from that copy, so the
/// in-memory graph is always what re-analysis of the edited workbook gives.
/// rewrite_cells() commits the working copy (refreshing cached values);
/// save() writes the committed workbook.
class SpreadsheetGraph {
public:
    explicit SpreadsheetGraph(const std::filesystem::path& path, int threshold = 0);
    explicit SpreadsheetGraph(WorkbookModel model, int threshold = 0);

    const DataFlowGraph& graph() const { return graph_; }
    /// Workbook as last committed by rewrite_cells() (or as loaded).
    const WorkbookModel& model() const { return committed_; }
    /// Workbook including edits not yet committed.
    const WorkbookModel& working_model() const { return working_; }
    int threshold() const { return graph_.threshold; }

    /// to_listing() of the current graph.
    std::string print_graph() const;

    /// Exact-name lookup; throws LookupError listing near misses.
    const Group& operator[](std::string_view name) const { return graph_.lookup(name); }
    /// Group containing `coord` on `sheet`, or nullptr.
    const Group* find_group(std::string_view sheet, std::string_view coord) const {
        return graph_.find_group(sheet, coord);
    }

    /// Group-level formula of a formula group.
    const std::string& formula(std::string_view name) const;
    /// Replaces a formula group's formula. Setting the rendered formula
    /// again changes nothing.
    void set_formula(std::string_view name, std::string_view text);
    /// Adds the formula group "<Sheet>.<header>" on an empty range, with the
    /// header written above its top-left cell.
    const Group& add_group(std::string_view sheet, std::string_view header, std::string_view range,
                           std::string_view formula);

    /// Groups with cells that differ from the committed workbook.
    std::vector<std::string> dirty_groups() const;
    bool is_dirty(std::string_view name) const;

    /// Commits pending edits to the workbook model.
    void rewrite_cells();
    void save(const std::filesystem::path& path) const;

    /// Oracle evaluation of a group's elements (see evaluate_group).
    std::vector<Value> evaluate(std::string_view name) const;

private:
    void rebuild();

    WorkbookModel committed_;
    WorkbookModel working_;
    DataFlowGraph graph_;
};

}  // namespace air
