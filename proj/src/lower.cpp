#include <algorithm>

#include "air/error.hpp"
#include "air/rewrite.hpp"

namespace air {

namespace {

std::string shape_of(const CellRange& r) {
    return std::to_string(r.height()) + "x" + std::to_string(r.width());
}

std::string size_of(const Group& g) {
    return std::to_string(g.element_count()) + " elements, " + shape_of(g.range);
}

/// Member coordinate for a 1-based element index.
Coord element_at(const Group& g, int index) {
    auto els = g.elements();
    if (index < 1 || std::size_t(index) > els.size()) {
        throw EditError("index " + std::to_string(index) + " is outside " + g.name + " (1.." +
                        std::to_string(els.size()) + ")");
    }
    return els[std::size_t(index - 1)];
}

struct Lowering {
    const DataFlowGraph& graph;
    const LoweringTarget& target;
    bool single;  // target is 1x1

    // Found while checking the formula once, before lowering every member.
    bool elementwise = false;
    bool aggregate = false;

    CellRef ref_to(const Group& u, Coord at, bool absolute) const {
        CellRef r;
        if (u.range.sheet != target.range.sheet) r.sheet = u.range.sheet;
        r.column = at.column;
        r.row = at.row;
        r.column_absolute = r.row_absolute = absolute;
        return r;
    }

    Expr range_to(const Group& u, Coord first, Coord last) const {
        CellRef a = ref_to(u, first, !single), b = ref_to(u, last, !single);
        return RangeRef{a, b};
    }

    bool same_shape(const Group& u) const {
        return u.range.width() == target.range.width() && u.range.height() == target.range.height();
    }

    Expr group_ref(const GroupRef& g, bool argument, const Coord& at) {
        const Group& u = graph.lookup(g.name);
        if (same_shape(u)) {
            elementwise = true;
            Coord c{u.range.first.column + at.column - target.range.first.column,
                    u.range.first.row + at.row - target.range.first.row};
            if (!u.is_member(c)) {
                throw EditError("element " + std::to_string(target_index(at)) + " of the target reads " +
                                u.name + " at " + CellAddress{u.range.sheet, c.column, c.row}.qualified() +
                                ", a missing cell");
            }
            return ref_to(u, c, false);
        }
        if (u.range.area() == 1) return ref_to(u, u.range.first, !single);
        if (argument) {
            aggregate = true;
            return range_to(u, u.range.first, u.range.last);
        }
        throw ShapeError("shape mismatch: " + u.name + " has " + size_of(u) + " but the target has " +
                         std::to_string(target.range.area() - long(target.missing.size())) +
                         " elements, " + shape_of(target.range));
    }

    int target_index(const Coord& at) const {
        int before = (at.row - target.range.first.row) * target.range.width() +
                     (at.column - target.range.first.column);
        auto end = target.missing.lower_bound(at);
        return before - int(std::distance(target.missing.begin(), end)) + 1;
    }

    Expr lower(const Expr& e, bool argument, const Coord& at) {
        if (auto* g = std::get_if<GroupRef>(&e.node)) return group_ref(*g, argument, at);
        if (auto* g = std::get_if<GroupElem>(&e.node)) {
            const Group& u = graph.lookup(g->name);
            return ref_to(u, element_at(u, g->index), !single);
        }
        if (auto* g = std::get_if<GroupSlice>(&e.node)) {
            const Group& u = graph.lookup(g->name);
            if (!argument) throw EditError("slice " + g->name + "[" + std::to_string(g->lo) + ":" +
                                           std::to_string(g->hi) + "] must be a function argument");
            if (u.range.width() != 1 && u.range.height() != 1)
                throw ShapeError("cannot slice " + u.name + ": it is " + shape_of(u.range) + ", not 1-D");
            if (g->lo > g->hi) throw EditError("empty slice of " + u.name);
            aggregate = true;
            return range_to(u, element_at(u, g->lo), element_at(u, g->hi));
        }
        if (e.is<CellRef>() || e.is<RangeRef>()) {
            try {
                return shift_references(e, at.column - target.range.first.column,
                                        at.row - target.range.first.row);
            } catch (const OutOfBoundsError& x) {
                throw EditError(std::string("reference leaves the sheet: ") + x.what());
            }
        }
        if (auto* c = std::get_if<Call>(&e.node)) {
            Call out{to_upper(c->name), {}};
            for (const auto& a : c->args) out.args.push_back(lower(a, true, at));
            return out;
        }
        if (auto* x = std::get_if<Binary>(&e.node))
            return binary(x->op, lower(*x->lhs, false, at), lower(*x->rhs, false, at));
        if (auto* u = std::get_if<Unary>(&e.node)) return unary(u->op, lower(*u->operand, false, at));
        if (auto* p = std::get_if<Paren>(&e.node)) return paren(lower(*p->inner, false, at));
        if (e.is<Placeholder>() || e.is<PlaceholderRange>())
            throw EditError("canonical variables cannot appear in a group formula");
        return e;
    }
};

}  // namespace

std::map<Coord, std::string> lower_group_formula(const DataFlowGraph& graph,
                                                 const LoweringTarget& target, const Expr& formula) {
    std::map<Coord, std::string> out;
    Lowering l{graph, target, target.range.area() == 1};
    for (int r = target.range.first.row; r <= target.range.last.row; ++r) {
        for (int c = target.range.first.column; c <= target.range.last.column; ++c) {
            if (target.missing.count({c, r})) continue;
            out[{c, r}] = render_formula(l.lower(formula, false, {c, r}));
        }
    }
    if (l.aggregate && !l.elementwise && out.size() > 1) {
        throw ShapeError("formula aggregates whole groups into one value, but the target has " +
                         std::to_string(out.size()) + " elements; use a 1x1 target");
    }
    return out;
}

}  // namespace air
