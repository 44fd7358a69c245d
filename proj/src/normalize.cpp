#include "air/normalize.hpp"

#include "air/error.hpp"

namespace air {

CellAddress LocationExpression::apply(const CellAddress& base) const {
    int col = column.absolute ? column.value : base.column + column.value;
    int row_ = row.absolute ? row.value : base.row + row.value;
    if (col < 1 || row_ < 1 || col > kMaxColumn || row_ > kMaxRow)
        throw OutOfBoundsError("location " + str() + " applied to " + base.qualified() +
                               " leaves the sheet (column " + std::to_string(col) + ", row " +
                               std::to_string(row_) + ")");
    return CellAddress{sheet ? *sheet : base.sheet, col, row_};
}

std::string LocationExpression::str() const {
    auto comp = [](const Component& c) {
        return (c.absolute ? "$" : "") + std::to_string(c.value);
    };
    return "(" + (sheet ? "$" + *sheet : std::string("Void")) + "," + comp(column) + "," +
           comp(row) + ")";
}

LocationExpression normalize_reference(const CellAddress& base, const CellRef& ref) {
    LocationExpression loc;
    if (ref.sheet && *ref.sheet != base.sheet) loc.sheet = *ref.sheet;
    loc.column = ref.column_absolute ? Component{ref.column, true}
                                     : Component{ref.column - base.column, false};
    loc.row = ref.row_absolute ? Component{ref.row, true} : Component{ref.row - base.row, false};
    return loc;
}

namespace {

class Normalizer {
public:
    explicit Normalizer(const CellAddress& base) : base_(base) {}

    Expr rewrite(const Expr& e) {
        if (auto* r = std::get_if<CellRef>(&e.node)) return Placeholder{bind(*r)};
        if (auto* r = std::get_if<RangeRef>(&e.node)) {
            int first = bind(r->first);
            int last = bind(r->last);
            return PlaceholderRange{first, last};
        }
        if (auto* c = std::get_if<Call>(&e.node)) {
            Call out{to_upper(c->name), {}};
            for (const auto& a : c->args) out.args.push_back(rewrite(a));
            return out;
        }
        if (auto* b = std::get_if<Binary>(&e.node)) {
            // Variables are numbered left to right.
            Expr lhs = rewrite(*b->lhs);
            Expr rhs = rewrite(*b->rhs);
            return binary(b->op, std::move(lhs), std::move(rhs));
        }
        if (auto* u = std::get_if<Unary>(&e.node)) return unary(u->op, rewrite(*u->operand));
        if (auto* p = std::get_if<Paren>(&e.node)) return paren(rewrite(*p->inner));
        if (e.is<GroupRef>() || e.is<GroupSlice>() || e.is<GroupElem>())
            throw Error("group references cannot be normalized; lower the group formula first");
        return e;
    }

    std::vector<LocationExpression> take() { return std::move(bindings_); }

private:
    const CellAddress& base_;
    std::vector<LocationExpression> bindings_;

    int bind(const CellRef& ref) {
        auto loc = normalize_reference(base_, ref);
        for (std::size_t i = 0; i < bindings_.size(); ++i) {
            if (bindings_[i] == loc) return int(i);
        }
        bindings_.push_back(std::move(loc));
        return int(bindings_.size() - 1);
    }
};

}  // namespace

NormalizedExpression normalize_expression(const CellAddress& base, const Expr& ast) {
    Normalizer n(base);
    Expr templ = n.rewrite(ast);
    return NormalizedExpression{render_expr(templ), n.take()};
}

CellRef to_cell_ref(const LocationExpression& loc, const CellAddress& base) {
    CellAddress target = loc.apply(base);
    CellRef ref;
    if (loc.sheet) ref.sheet = *loc.sheet;
    ref.column = target.column;
    ref.column_absolute = loc.column.absolute;
    ref.row = target.row;
    ref.row_absolute = loc.row.absolute;
    return ref;
}

namespace {

Expr substitute(const Expr& e, const CellAddress& base, const std::vector<LocationExpression>& b) {
    auto binding = [&](int i) -> const LocationExpression& {
        if (i < 0 || std::size_t(i) >= b.size())
            throw Error("canonical variable var" + std::to_string(i) + " has no binding");
        return b[std::size_t(i)];
    };
    if (auto* p = std::get_if<Placeholder>(&e.node)) return to_cell_ref(binding(p->index), base);
    if (auto* p = std::get_if<PlaceholderRange>(&e.node)) {
        CellRef first = to_cell_ref(binding(p->first), base);
        CellRef last = to_cell_ref(binding(p->last), base);
        if (first.sheet != last.sheet) throw Error("range variables bound to different sheets");
        return RangeRef{first, last};
    }
    if (auto* c = std::get_if<Call>(&e.node)) {
        Call out{c->name, {}};
        for (const auto& a : c->args) out.args.push_back(substitute(a, base, b));
        return out;
    }
    if (auto* x = std::get_if<Binary>(&e.node))
        return binary(x->op, substitute(*x->lhs, base, b), substitute(*x->rhs, base, b));
    if (auto* u = std::get_if<Unary>(&e.node)) return unary(u->op, substitute(*u->operand, base, b));
    if (auto* p = std::get_if<Paren>(&e.node)) return paren(substitute(*p->inner, base, b));
    return e;
}

}  // namespace

Expr denormalize_ast(const CellAddress& base, const NormalizedExpression& nexpr) {
    return substitute(nexpr.template_ast(), base, nexpr.bindings);
}

std::string denormalize(const CellAddress& base, const NormalizedExpression& nexpr) {
    return render_formula(denormalize_ast(base, nexpr));
}

}  // namespace air
