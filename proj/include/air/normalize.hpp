#pragma once

#include <optional>
#include <string>
#include <vector>

#include "air/cell.hpp"
#include "air/formula.hpp"

namespace air {

/// One column or row component of a location expression. When `absolute` is
/// set, `value` is the absolute coordinate ("$20"); otherwise it is the signed
/// offset from the referencing cell.
struct Component {
    int value = 0;
    bool absolute = false;
    friend bool operator==(const Component&, const Component&) = default;
};

/// (sheet part, column, row) relative to a base cell. An empty `sheet` is
/// the same-sheet "Void" part; otherwise it names the sheet absolutely.
struct LocationExpression {
    std::optional<std::string> sheet;
    Component column;
    Component row;

    /// Resolves against `base`. Throws OutOfBoundsError below column/row 1
    /// or beyond sheet limits.
    CellAddress apply(const CellAddress& base) const;

    /// "(Void,1,5)", "($Sheet2,3,-5)", "(Void,2,$20)".
    std::string str() const;

    friend bool operator==(const LocationExpression&, const LocationExpression&) = default;
};

/// Canonical formula text (references replaced by var0..varN) plus the
/// location expression bound to each variable.
struct NormalizedExpression {
    std::string canonical_text;
    std::vector<LocationExpression> bindings;

    /// Parsed form of `canonical_text` (Placeholder / PlaceholderRange leaves).
    Expr template_ast() const { return parse_template(canonical_text); }

    friend bool operator==(const NormalizedExpression&, const NormalizedExpression&) = default;
};

LocationExpression normalize_reference(const CellAddress& base, const CellRef& ref);

/// Replaces every reference by a canonical variable (first-occurrence order,
/// one variable per distinct location expression; range endpoints get one
/// variable each). Function names are upper-cased.
NormalizedExpression normalize_expression(const CellAddress& base, const Expr& ast);

/// Inverse of normalize_expression at `base`: formula text with leading '='.
std::string denormalize(const CellAddress& base, const NormalizedExpression& nexpr);

/// Same as denormalize but returns the AST.
Expr denormalize_ast(const CellAddress& base, const NormalizedExpression& nexpr);

/// CellRef that `loc` produces at `base`, keeping the '$' flags. The sheet is
/// set only for cross-sheet parts.
CellRef to_cell_ref(const LocationExpression& loc, const CellAddress& base);

}  // namespace air
