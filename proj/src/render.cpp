#include <algorithm>

#include "air/error.hpp"
#include "air/rewrite.hpp"

namespace air {

namespace {

struct Renderer {
    const DataFlowGraph& graph;
    const Group& group;
    CellAddress top_left;
    CellAddress bottom_right;

    const LocationExpression& binding(int i) const { return group.canonical.bindings.at(std::size_t(i)); }

    CellRef fallback_ref(int i) const {
        CellRef r = to_cell_ref(binding(i), top_left);
        r.sheet = binding(i).sheet.value_or(group.range.sheet);
        return r;
    }

    /// Group containing `a` as a member.
    const Group* owner(const CellAddress& a) const {
        const Group* u = graph.find_group(a);
        return u && u->is_member(a.coord()) ? u : nullptr;
    }

    /// True when every member of `group` lands on a member of `u` under the
    /// offset (dcol, drow).
    bool lands_on_members(const Group& u, int dcol, int drow) const {
        for (const auto& p : group.elements()) {
            if (!u.is_member({p.column + dcol, p.row + drow})) return false;
        }
        return true;
    }

    Expr variable(int i) const {
        const auto& b = binding(i);
        CellAddress a = b.apply(top_left), z = b.apply(bottom_right);
        if (a == z) {
            if (const Group* u = owner(a)) {
                if (u->range.area() == 1) return GroupRef{u->name};
                return GroupElem{u->name, int(u->element_index(a.coord()))};
            }
            return fallback_ref(i);
        }
        CellRange box{a.sheet, a.coord(), z.coord()};
        if (box.width() == group.range.width() && box.height() == group.range.height()) {
            const Group* u = graph.find_group(a);
            if (u && u->range == box &&
                lands_on_members(*u, a.column - top_left.column, a.row - top_left.row)) {
                return GroupRef{u->name};
            }
        }
        return fallback_ref(i);
    }

    Expr range(int i, int j) const {
        CellAddress a1 = binding(i).apply(top_left), a2 = binding(i).apply(bottom_right);
        CellAddress b1 = binding(j).apply(top_left), b2 = binding(j).apply(bottom_right);
        if (a1 == a2 && b1 == b2 && a1.sheet == b1.sheet && a1.column <= b1.column && a1.row <= b1.row) {
            CellRange box{a1.sheet, a1.coord(), b1.coord()};
            const Group* u = graph.find_group(a1);
            if (u && u->range == box) return GroupRef{u->name};
            bool one_d = u && (u->range.width() == 1 || u->range.height() == 1);
            if (one_d && u->is_member(a1.coord()) && u->is_member(b1.coord()) && u->range.contains(b1)) {
                return GroupSlice{u->name, int(u->element_index(a1.coord())),
                                  int(u->element_index(b1.coord()))};
            }
        }
        CellRef first = fallback_ref(i), last = fallback_ref(j);
        last.sheet = first.sheet;
        return RangeRef{first, last};
    }

    Expr rewrite(const Expr& e) const {
        if (auto* p = std::get_if<Placeholder>(&e.node)) return variable(p->index);
        if (auto* p = std::get_if<PlaceholderRange>(&e.node)) return range(p->first, p->last);
        if (auto* c = std::get_if<Call>(&e.node)) {
            Call out{to_upper(c->name), {}};
            for (const auto& a : c->args) out.args.push_back(rewrite(a));
            return out;
        }
        if (auto* x = std::get_if<Binary>(&e.node)) return binary(x->op, rewrite(*x->lhs), rewrite(*x->rhs));
        if (auto* u = std::get_if<Unary>(&e.node)) return unary(u->op, rewrite(*u->operand));
        if (auto* p = std::get_if<Paren>(&e.node)) return paren(rewrite(*p->inner));
        return e;
    }
};

}  // namespace

std::string render_group_formula(const DataFlowGraph& graph, const Group& group) {
    if (!group.is_formula()) throw Error(group.name + " is not a formula group");
    const auto& r = group.range;
    Renderer renderer{graph, group, {r.sheet, r.first.column, r.first.row},
                      {r.sheet, r.last.column, r.last.row}};
    try {
        return render_formula(renderer.rewrite(group.canonical.template_ast()));
    } catch (const OutOfBoundsError&) {
        // A reference that leaves the sheet cannot be written as A1 text at
        // the top-left; show the first member's formula instead.
        return group.raw_formula.first;
    }
}

}  // namespace air
