#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "air/graph.hpp"
#include "air/normalize.hpp"
#include "air/workbook.hpp"

namespace air {

struct RawCell {
    Value value;
    ValueType type = ValueType::Empty;
    /// Set for formula cells whose formula could not be parsed; such cells
    /// never share a group with their neighbours.
    bool unparsed = false;
};

struct ClassifiedSheet {
    std::string name;
    std::map<Coord, NormalizedExpression> formula_cells;
    std::map<Coord, RawCell> raw_cells;
    std::vector<Diagnostic> diagnostics;

    bool empty() const { return formula_cells.empty() && raw_cells.empty(); }
};

ClassifiedSheet classify_sheet(const Sheet& sheet);
std::vector<ClassifiedSheet> classify_cells(const WorkbookModel& model);

/// Equal canonical text and element-wise equal bindings.
bool are_coherent(const NormalizedExpression& a, const NormalizedExpression& b);

/// Text cells that look like a header for the data next to them: the cell
/// below is non-empty and not text, or the cell to the right is non-empty and
/// not text while the cell below is not text.
std::set<Coord> header_candidates(const ClassifiedSheet& sheet);

struct GroupCandidate {
    CellRange range;
    std::set<Coord> missing;
    std::optional<NormalizedExpression> canonical;  // formula candidates
    ValueType type = ValueType::Unknown;             // raw candidates
    bool unparsed = false;

    friend bool operator==(const GroupCandidate&, const GroupCandidate&) = default;
};

/// Rectangles of coherent formula cells. Seeds are taken in row-major order;
/// each seed takes the largest valid rectangle having it as top-left corner
/// (ties: more rows); see detail::partition_rectangles for how the threshold
/// is applied. Inside a rectangle every non-empty cell is a free
/// member, every run of consecutive empty cells along a row or a column is at
/// most `threshold` long, each boundary line holds a member, and no header
/// candidate sits above a column (other than the first) or left of a row
/// (other than the first).
std::vector<GroupCandidate> group_formula_cells(const ClassifiedSheet& sheet, int threshold);

/// Rectangles of raw cells sharing one type, same rule. Cells inside
/// `occupied` (formula candidates, including their missing cells) and
/// cells in `excluded` (header candidates by default) are not grouped.
std::vector<GroupCandidate> group_raw_cells(const ClassifiedSheet& sheet, int threshold,
                                            const std::vector<GroupCandidate>& formula_groups = {},
                                            std::optional<std::set<Coord>> excluded = std::nullopt);

namespace detail {

/// Cell state seen by the rectangle search.
struct GridCell {
    int key = -1;  // members of a rectangle share the seed's key; -1 = not groupable
    bool nonempty = true;
    bool occupied = false;
};

struct Rectangle {
    Coord first;
    Coord last;
    std::set<Coord> missing;
};

/// Generic seed-and-grow search shared by formula and raw grouping.
/// `cells` holds every non-empty cell of the sheet plus empty cells that
/// are already occupied; entries with key >= 0 are seeds. Marks taken cells
/// occupied (adding entries for taken empty cells).
std::vector<Rectangle> find_rectangles(std::map<Coord, GridCell>& cells,
                                       const std::set<Coord>& barriers, int threshold);

/// The seed-and-grow partition with the fewest rectangles among thresholds
/// 0..`threshold` (ties: the larger threshold). The greedy search alone can
/// produce more groups when the threshold grows; taking the best bridging
/// level up to `threshold` keeps the group count non-increasing in it.
std::vector<Rectangle> partition_rectangles(std::map<Coord, GridCell>& cells,
                                            const std::set<Coord>& barriers, int threshold);

}  // namespace detail

}  // namespace air
