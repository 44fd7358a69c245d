#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace air {

/// Heap box with value semantics; lets recursive variant nodes stay copyable.
template <class T>
class Box {
public:
    Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
    Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
    Box(Box&&) noexcept = default;
    Box& operator=(const Box& other) {
        if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
        return *this;
    }
    Box& operator=(Box&&) noexcept = default;
    ~Box() = default;

    T& operator*() { return *ptr_; }
    const T& operator*() const { return *ptr_; }
    T* operator->() { return ptr_.get(); }
    const T* operator->() const { return ptr_.get(); }

    friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

private:
    std::unique_ptr<T> ptr_;
};

enum class BinaryOp { Add, Sub, Mul, Div, Pow, Concat, Eq, Ne, Lt, Gt, Le, Ge };
enum class UnaryOp { Neg, Plus, Percent };

std::string_view symbol(BinaryOp op);
std::string_view symbol(UnaryOp op);

struct Expr;

struct NumberLit {
    double value = 0;
    friend bool operator==(const NumberLit&, const NumberLit&) = default;
};

struct TextLit {
    std::string value;
    friend bool operator==(const TextLit&, const TextLit&) = default;
};

struct BoolLit {
    bool value = false;
    friend bool operator==(const BoolLit&, const BoolLit&) = default;
};

/// A1 reference. Absolute components are the ones marked with '$'.
struct CellRef {
    std::optional<std::string> sheet;
    int column = 1;
    bool column_absolute = false;
    int row = 1;
    bool row_absolute = false;
    friend bool operator==(const CellRef&, const CellRef&) = default;
};

/// Both endpoints refer to the same sheet; the sheet is stored on `first`
/// (and mirrored on `last`).
struct RangeRef {
    CellRef first;
    CellRef last;
    friend bool operator==(const RangeRef&, const RangeRef&) = default;
};

struct Call {
    std::string name;  // case preserved
    std::vector<Expr> args;
    friend bool operator==(const Call& a, const Call& b);
};

struct Binary {
    BinaryOp op;
    Box<Expr> lhs;
    Box<Expr> rhs;
    friend bool operator==(const Binary&, const Binary&) = default;
};

struct Unary {
    UnaryOp op;
    Box<Expr> operand;
    friend bool operator==(const Unary&, const Unary&) = default;
};

struct Paren {
    Box<Expr> inner;
    friend bool operator==(const Paren&, const Paren&) = default;
};

/// Whole group, `Sheet.Name`.
struct GroupRef {
    std::string name;
    friend bool operator==(const GroupRef&, const GroupRef&) = default;
};

/// `Sheet.Name[lo:hi]`, 1-based inclusive element indices.
struct GroupSlice {
    std::string name;
    int lo = 1;
    int hi = 1;
    friend bool operator==(const GroupSlice&, const GroupSlice&) = default;
};

/// `Sheet.Name[index]`, 1-based.
struct GroupElem {
    std::string name;
    int index = 1;
    friend bool operator==(const GroupElem&, const GroupElem&) = default;
};

/// Canonical variable `varN` standing in for a normalized reference.
struct Placeholder {
    int index = 0;
    friend bool operator==(const Placeholder&, const Placeholder&) = default;
};

/// `varA:varB`, a range whose endpoints are canonical variables.
struct PlaceholderRange {
    int first = 0;
    int last = 0;
    friend bool operator==(const PlaceholderRange&, const PlaceholderRange&) = default;
};

struct Expr {
    using Node = std::variant<NumberLit, TextLit, BoolLit, CellRef, RangeRef, Call, Binary, Unary,
                              Paren, GroupRef, GroupSlice, GroupElem, Placeholder,
                              PlaceholderRange>;
    Node node;

    template <class T>
    Expr(T n) : node(std::move(n)) {}

    template <class T>
    bool is() const { return std::holds_alternative<T>(node); }
    template <class T>
    const T& as() const { return std::get<T>(node); }
    template <class T>
    T& as() { return std::get<T>(node); }

    friend bool operator==(const Expr&, const Expr&) = default;
};

inline Expr number(double v) { return NumberLit{v}; }
inline Expr binary(BinaryOp op, Expr l, Expr r) { return Binary{op, std::move(l), std::move(r)}; }
inline Expr unary(UnaryOp op, Expr e) { return Unary{op, std::move(e)}; }
inline Expr paren(Expr e) { return Paren{std::move(e)}; }

/// Parses an ordinary A1-style cell formula ("=..."). Throws ParseError.
Expr parse_formula(std::string_view text);

/// Parses a group-level formula: A1 syntax plus `Sheet.Name`, `Sheet.Name[i]`
/// and `Sheet.Name[a:b]`. Throws ParseError.
Expr parse_group_formula(std::string_view text);

/// Parses normalized formula text ("AVERAGE(var0:var1)/var2"), no leading '='.
Expr parse_template(std::string_view text);

/// Formula text with a leading '='.
std::string render_formula(const Expr& e);
/// Expression text without '='. Inserts parentheses only where the tree
/// shape would otherwise re-parse differently.
std::string render_expr(const Expr& e);

/// Upper-cases function names.
Expr canonicalize(Expr e);
/// Drops Paren nodes.
Expr strip_parens(const Expr& e);

/// Moves every relative reference component by (dcol, drow), like copying a
/// formula between cells. Throws OutOfBoundsError when a reference leaves the sheet.
Expr shift_references(const Expr& e, int dcol, int drow);

/// Pre-order traversal over every node.
template <class F>
void visit_nodes(const Expr& e, F&& f);

bool iequals(std::string_view a, std::string_view b);
std::string to_upper(std::string_view s);

// ---------------------------------------------------------------------------

template <class F>
void visit_nodes(const Expr& e, F&& f) {
    f(e);
    if (auto* c = std::get_if<Call>(&e.node)) {
        for (const auto& a : c->args) visit_nodes(a, f);
    } else if (auto* b = std::get_if<Binary>(&e.node)) {
        visit_nodes(*b->lhs, f);
        visit_nodes(*b->rhs, f);
    } else if (auto* u = std::get_if<Unary>(&e.node)) {
        visit_nodes(*u->operand, f);
    } else if (auto* p = std::get_if<Paren>(&e.node)) {
        visit_nodes(*p->inner, f);
    }
}

}  // namespace air
