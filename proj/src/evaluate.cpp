#include "air/evaluate.hpp"

#include <cmath>

#include "air/error.hpp"
#include "air/normalize.hpp"

namespace air {

namespace {

double to_number(const Value& v) {
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* d = std::get_if<DateSerial>(&v)) return d->serial;
    if (auto* b = std::get_if<bool>(&v)) return *b ? 1 : 0;
    if (is_empty(v)) return 0;
    if (auto* e = std::get_if<ErrorCode>(&v)) throw EvalError("error value " + e->code);
    throw EvalError("text '" + std::get<std::string>(v) + "' used in arithmetic");
}

double checked(double x, std::string_view what) {
    if (!std::isfinite(x)) throw EvalError(std::string(what) + " has no finite result");
    return x;
}

CellAddress resolve_ref(const CellRef& r, const CellAddress& base) {
    return {r.sheet.value_or(base.sheet), r.column, r.row};
}

/// Rank used when comparing values of different kinds: numbers < text < booleans.
int kind_rank(const Value& v) {
    if (std::holds_alternative<std::string>(v)) return 1;
    if (std::holds_alternative<bool>(v)) return 2;
    return 0;
}

int compare(const Value& a, const Value& b) {
    if (auto* e = std::get_if<ErrorCode>(&a)) throw EvalError("error value " + e->code);
    if (auto* e = std::get_if<ErrorCode>(&b)) throw EvalError("error value " + e->code);
    // An empty operand takes the other side's kind.
    Value x = a, y = b;
    if (is_empty(x)) x = std::holds_alternative<std::string>(y) ? Value{std::string()} : Value{0.0};
    if (is_empty(y)) y = std::holds_alternative<std::string>(x) ? Value{std::string()} : Value{0.0};
    int rx = kind_rank(x), ry = kind_rank(y);
    if (rx != ry) return rx < ry ? -1 : 1;
    if (rx == 1) {
        auto s = to_upper(std::get<std::string>(x)), t = to_upper(std::get<std::string>(y));
        return s < t ? -1 : s > t ? 1 : 0;
    }
    double p = to_number(x), q = to_number(y);
    return p < q ? -1 : p > q ? 1 : 0;
}

std::string concat_text(const Value& v) {
    if (auto* e = std::get_if<ErrorCode>(&v)) throw EvalError("error value " + e->code);
    if (auto* b = std::get_if<bool>(&v)) return *b ? "TRUE" : "FALSE";
    if (auto* d = std::get_if<DateSerial>(&v)) return format_number(d->serial);
    return display(v);
}

struct Interpreter {
    const CellAddress& base;
    const CellResolver& resolve;

    Value scalar(const Expr& e) {
        if (auto* n = std::get_if<NumberLit>(&e.node)) return n->value;
        if (auto* t = std::get_if<TextLit>(&e.node)) return t->value;
        if (auto* b = std::get_if<BoolLit>(&e.node)) return b->value;
        if (auto* r = std::get_if<CellRef>(&e.node)) {
            Value v = resolve(resolve_ref(*r, base));
            return is_empty(v) ? Value{0.0} : v;
        }
        if (e.is<RangeRef>()) throw EvalError("a range cannot be used as a single value");
        if (auto* p = std::get_if<Paren>(&e.node)) return scalar(*p->inner);
        if (auto* u = std::get_if<Unary>(&e.node)) {
            double x = to_number(scalar(*u->operand));
            switch (u->op) {
                case UnaryOp::Neg: return -x;
                case UnaryOp::Plus: return x;
                case UnaryOp::Percent: return x / 100;
            }
        }
        if (auto* b = std::get_if<Binary>(&e.node)) return binary_op(*b);
        if (auto* c = std::get_if<Call>(&e.node)) return call(*c);
        throw EvalError("group references must be lowered before evaluation");
    }

    Value binary_op(const Binary& b) {
        Value l = scalar(*b.lhs);
        Value r = scalar(*b.rhs);
        switch (b.op) {
            case BinaryOp::Add: return checked(to_number(l) + to_number(r), "addition");
            case BinaryOp::Sub: return checked(to_number(l) - to_number(r), "subtraction");
            case BinaryOp::Mul: return checked(to_number(l) * to_number(r), "multiplication");
            case BinaryOp::Div: {
                double d = to_number(r);
                if (d == 0) throw EvalError("division by zero");
                return checked(to_number(l) / d, "division");
            }
            case BinaryOp::Pow: return checked(std::pow(to_number(l), to_number(r)), "power");
            case BinaryOp::Concat: return concat_text(l) + concat_text(r);
            case BinaryOp::Eq: return compare(l, r) == 0;
            case BinaryOp::Ne: return compare(l, r) != 0;
            case BinaryOp::Lt: return compare(l, r) < 0;
            case BinaryOp::Gt: return compare(l, r) > 0;
            case BinaryOp::Le: return compare(l, r) <= 0;
            case BinaryOp::Ge: return compare(l, r) >= 0;
        }
        throw EvalError("unknown operator");
    }

    /// Numbers contributed by aggregate arguments: cells of a range count
    /// only when numeric; direct arguments are converted.
    std::vector<double> numbers(const std::vector<Expr>& args, std::size_t* count_only = nullptr) {
        std::vector<double> out;
        for (const auto& a : args) {
            if (auto* r = std::get_if<RangeRef>(&a.node)) {
                CellAddress f = resolve_ref(r->first, base), l = resolve_ref(r->last, base);
                for (int row = std::min(f.row, l.row); row <= std::max(f.row, l.row); ++row) {
                    for (int col = std::min(f.column, l.column); col <= std::max(f.column, l.column); ++col) {
                        Value v = resolve({f.sheet, col, row});
                        if (auto* e = std::get_if<ErrorCode>(&v)) {
                            if (!count_only) throw EvalError("error value " + e->code);
                            continue;
                        }
                        if (std::holds_alternative<double>(v)) out.push_back(std::get<double>(v));
                        else if (auto* d = std::get_if<DateSerial>(&v)) out.push_back(d->serial);
                    }
                }
            } else if (count_only) {
                Value v = scalar(a);
                if (std::holds_alternative<double>(v) || std::holds_alternative<DateSerial>(v) ||
                    std::holds_alternative<bool>(v)) {
                    out.push_back(0);
                }
            } else {
                out.push_back(to_number(scalar(a)));
            }
        }
        return out;
    }

    double unary_arg(const Call& c, const std::string& name) {
        if (c.args.size() != 1) throw EvalError(name + " takes exactly one argument");
        return to_number(scalar(c.args[0]));
    }

    Value call(const Call& c) {
        std::string name = to_upper(c.name);
        if (name == "SUM") {
            double s = 0;
            for (double x : numbers(c.args)) s += x;
            return checked(s, name);
        }
        if (name == "AVERAGE") {
            auto xs = numbers(c.args);
            if (xs.empty()) throw EvalError("AVERAGE of no numbers");
            double s = 0;
            for (double x : xs) s += x;
            return checked(s / double(xs.size()), name);
        }
        if (name == "MIN" || name == "MAX") {
            auto xs = numbers(c.args);
            if (xs.empty()) return 0.0;
            return name == "MIN" ? *std::min_element(xs.begin(), xs.end())
                                 : *std::max_element(xs.begin(), xs.end());
        }
        if (name == "COUNT") {
            std::size_t dummy = 0;
            return double(numbers(c.args, &dummy).size());
        }
        if (name == "ABS") return std::fabs(unary_arg(c, name));
        if (name == "SQRT") {
            double x = unary_arg(c, name);
            if (x < 0) throw EvalError("SQRT of a negative number");
            return std::sqrt(x);
        }
        if (name == "COS") return std::cos(unary_arg(c, name));
        if (name == "SIN") return std::sin(unary_arg(c, name));
        if (name == "EXP") return checked(std::exp(unary_arg(c, name)), name);
        if (name == "LN") {
            double x = unary_arg(c, name);
            if (x <= 0) throw EvalError("LN of a non-positive number");
            return std::log(x);
        }
        throw EvalError("unsupported function " + name);
    }
};

/// Cells referenced by an A1 expression, as ranges on absolute sheets.
std::vector<CellRange> references(const Expr& e, const CellAddress& base) {
    std::vector<CellRange> out;
    visit_nodes(e, [&](const Expr& n) {
        if (auto* r = std::get_if<CellRef>(&n.node)) {
            CellAddress a = resolve_ref(*r, base);
            out.push_back({a.sheet, a.coord(), a.coord()});
        } else if (auto* r = std::get_if<RangeRef>(&n.node)) {
            CellAddress f = resolve_ref(r->first, base), l = resolve_ref(r->last, base);
            out.push_back({f.sheet,
                           {std::min(f.column, l.column), std::min(f.row, l.row)},
                           {std::max(f.column, l.column), std::max(f.row, l.row)}});
        }
    });
    return out;
}

}  // namespace

Value evaluate_expr(const Expr& e, const CellAddress& base, const CellResolver& resolve) {
    Interpreter in{base, resolve};
    return in.scalar(e);
}

Value CellEvaluator::value(const CellAddress& at) {
    if (auto it = memo_.find(at); it != memo_.end()) return it->second;
    const CellRecord* rec = model_.find(at);
    if (!rec) {
        if (!model_.find_sheet(at.sheet)) throw EvalError("unknown sheet '" + at.sheet + "'");
        return Value{};
    }
    if (!rec->is_formula() || (recompute_ && !recompute_->count(at))) return rec->value;
    if (!active_.insert(at).second) throw EvalError("circular reference at " + at.qualified());
    Value v;
    try {
        v = evaluate_expr(parse_formula(*rec->formula), at, [this](const CellAddress& a) { return value(a); });
    } catch (const ParseError& e) {
        active_.erase(at);
        throw EvalError("cannot evaluate " + at.qualified() + ": " + e.what());
    } catch (...) {
        active_.erase(at);
        throw;
    }
    active_.erase(at);
    memo_[at] = v;
    return v;
}

std::vector<Value> evaluate_group(const DataFlowGraph& graph, const WorkbookModel& model,
                                  std::string_view name) {
    const Group& target = graph.lookup(name);
    std::map<CellAddress, Value> memo;
    std::set<CellAddress> active;

    std::function<Value(const CellAddress&)> cell = [&](const CellAddress& a) -> Value {
        if (auto it = memo.find(a); it != memo.end()) return it->second;
        const Group* g = graph.find_group(a);
        if (!g || !g->is_member(a.coord())) {
            if (!graph.has_sheet(a.sheet)) throw EvalError("unknown sheet '" + a.sheet + "'");
            const CellRecord* rec = model.find(a);
            return rec && !rec->is_formula() ? rec->value : Value{};
        }
        if (!g->is_formula()) return g->values[g->element_index(a.coord()) - 1];
        if (!active.insert(a).second) throw EvalError("circular reference through " + g->name);
        Value v = evaluate_expr(denormalize_ast(a, g->canonical), a, cell);
        active.erase(a);
        memo[a] = v;
        return v;
    };

    std::vector<Value> out;
    for (const auto& c : target.elements()) out.push_back(cell({target.range.sheet, c.column, c.row}));
    return out;
}

std::set<CellAddress> dependent_cells(const WorkbookModel& model, const std::set<CellAddress>& changed) {
    std::vector<std::pair<CellAddress, std::vector<CellRange>>> formulas;
    for (const auto& s : model.sheets) {
        for (const auto& [c, rec] : s.cells) {
            if (!rec.is_formula()) continue;
            CellAddress at{s.name, c.column, c.row};
            try {
                formulas.push_back({at, references(parse_formula(*rec.formula), at)});
            } catch (const ParseError&) {
                formulas.push_back({at, {}});
            }
        }
    }
    std::set<CellAddress> out;
    for (const auto& [at, refs] : formulas) {
        if (changed.count(at)) out.insert(at);
    }
    std::set<CellAddress> frontier = changed;
    while (!frontier.empty()) {
        std::set<CellAddress> next;
        for (const auto& [at, refs] : formulas) {
            if (out.count(at) && !changed.count(at)) continue;
            bool hit = std::any_of(refs.begin(), refs.end(), [&](const CellRange& r) {
                return std::any_of(frontier.begin(), frontier.end(),
                                   [&](const CellAddress& a) { return r.contains(a); });
            });
            if (hit && out.insert(at).second) next.insert(at);
        }
        frontier = std::move(next);
    }
    return out;
}

}  // namespace air
