#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "air/formula.hpp"
#include "air/graph.hpp"
#include "air/workbook.hpp"

namespace air {

/// Supplies the value of a referenced cell.
using CellResolver = std::function<Value(const CellAddress&)>;

/// Evaluates an A1 expression at `base` with the supported function subset
/// (SUM, AVERAGE, MIN, MAX, COUNT, ABS, SQRT, COS, SIN, EXP, LN) and
/// operators. Throws EvalError on unsupported functions, text in arithmetic,
/// error values and domain errors.
Value evaluate_expr(const Expr& e, const CellAddress& base, const CellResolver& resolve);

/// Per-cell evaluation of the formulas stored in a workbook model, memoized.
class CellEvaluator {
public:
    explicit CellEvaluator(const WorkbookModel& model) : model_(model) {}
    /// Recomputes only the formula cells in `recompute`; other formula cells
    /// answer with their cached value.
    CellEvaluator(const WorkbookModel& model, std::set<CellAddress> recompute)
        : model_(model), recompute_(std::move(recompute)) {}

    /// Stored value of a raw cell, computed value of a formula cell (empty
    /// cells are empty). Throws EvalError, including on circular references.
    Value value(const CellAddress& at);

private:
    const WorkbookModel& model_;
    std::map<CellAddress, Value> memo_;
    std::set<CellAddress> active_;
    std::optional<std::set<CellAddress>> recompute_;
};

/// Element-wise evaluation of a group from the graph alone: formula groups
/// through their canonical formula at each member, raw groups through their
/// stored values. `model` supplies cells outside every group (labels). One
/// value per element, missing cells skipped. Throws LookupError / EvalError.
std::vector<Value> evaluate_group(const DataFlowGraph& graph, const WorkbookModel& model,
                                  std::string_view name);

/// Addresses of the formula cells that read, directly or transitively, any
/// of `changed` (the changed cells themselves included when they hold formulas).
std::set<CellAddress> dependent_cells(const WorkbookModel& model, const std::set<CellAddress>& changed);

}  // namespace air
