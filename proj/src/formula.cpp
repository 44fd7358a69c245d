#include "air/formula.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "air/cell.hpp"
#include "air/error.hpp"
#include "air/value.hpp"

namespace air {

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(a[i])) !=
            std::toupper(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

std::string to_upper(std::string_view s) {
    std::string out(s);
    for (char& ch : out) ch = char(std::toupper(static_cast<unsigned char>(ch)));
    return out;
}

bool operator==(const Call& a, const Call& b) { return iequals(a.name, b.name) && a.args == b.args; }

std::string_view symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Pow: return "^";
        case BinaryOp::Concat: return "&";
        case BinaryOp::Eq: return "=";
        case BinaryOp::Ne: return "<>";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Ge: return ">=";
    }
    return "?";
}

std::string_view symbol(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "-";
        case UnaryOp::Plus: return "+";
        case UnaryOp::Percent: return "%";
    }
    return "?";
}

namespace {

enum class Mode { A1, Group, Template };

enum class Tok {
    Number, String, Word, QuotedSheet, Bang, Colon, LParen, RParen, Comma,
    LBracket, RBracket, Op, Percent, End
};

struct Token {
    Tok kind;
    std::string text;
    std::size_t offset;
    double number = 0;
};

std::string_view describe(Tok t) {
    switch (t) {
        case Tok::Number: return "number";
        case Tok::String: return "string";
        case Tok::Word: return "name or reference";
        case Tok::QuotedSheet: return "quoted sheet name";
        case Tok::Bang: return "'!'";
        case Tok::Colon: return "':'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Comma: return "','";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Op: return "operator";
        case Tok::Percent: return "'%'";
        case Tok::End: return "end of formula";
    }
    return "token";
}

bool word_start(char ch) {
    return std::isalpha(static_cast<unsigned char>(ch)) || ch == '_' || ch == '$' || ch == '\\';
}
bool word_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.' || ch == '$' ||
           ch == '\\';
}

std::vector<Token> tokenize(std::string_view text, std::size_t start) {
    std::vector<Token> out;
    std::size_t i = start;
    auto n = text.size();
    while (i < n) {
        char ch = text[i];
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
            ++i;
            continue;
        }
        std::size_t at = i;
        if (std::isdigit(static_cast<unsigned char>(ch)) ||
            (ch == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            if (i < n && text[i] == '.') {
                ++i;
                while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            }
            if (i < n && (text[i] == 'e' || text[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < n && (text[j] == '+' || text[j] == '-')) ++j;
                if (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) {
                    i = j;
                    while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                }
            }
            std::string lexeme(text.substr(at, i - at));
            double value = 0;
            auto res = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
            if (res.ec != std::errc() || !std::isfinite(value))
                throw ParseError("invalid number '" + lexeme + "'", at);
            out.push_back({Tok::Number, lexeme, at, value});
            continue;
        }
        if (ch == '"') {
            std::string s;
            ++i;
            bool closed = false;
            while (i < n) {
                if (text[i] == '"') {
                    if (i + 1 < n && text[i + 1] == '"') {
                        s.push_back('"');
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                s.push_back(text[i++]);
            }
            if (!closed) throw ParseError("unterminated string literal", at);
            out.push_back({Tok::String, std::move(s), at});
            continue;
        }
        if (ch == '\'') {
            std::string s;
            ++i;
            bool closed = false;
            while (i < n) {
                if (text[i] == '\'') {
                    if (i + 1 < n && text[i + 1] == '\'') {
                        s.push_back('\'');
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                s.push_back(text[i++]);
            }
            if (!closed) throw ParseError("unterminated quoted sheet name", at);
            if (s.empty()) throw ParseError("empty sheet name", at);
            out.push_back({Tok::QuotedSheet, std::move(s), at});
            continue;
        }
        if (word_start(ch)) {
            while (i < n && word_char(text[i])) ++i;
            out.push_back({Tok::Word, std::string(text.substr(at, i - at)), at});
            continue;
        }
        switch (ch) {
            case '!': out.push_back({Tok::Bang, "!", at}); ++i; continue;
            case ':': out.push_back({Tok::Colon, ":", at}); ++i; continue;
            case '(': out.push_back({Tok::LParen, "(", at}); ++i; continue;
            case ')': out.push_back({Tok::RParen, ")", at}); ++i; continue;
            case ',': out.push_back({Tok::Comma, ",", at}); ++i; continue;
            case '[': out.push_back({Tok::LBracket, "[", at}); ++i; continue;
            case ']': out.push_back({Tok::RBracket, "]", at}); ++i; continue;
            case '%': out.push_back({Tok::Percent, "%", at}); ++i; continue;
            case '+': case '-': case '*': case '/': case '^': case '&': case '=':
                out.push_back({Tok::Op, std::string(1, ch), at});
                ++i;
                continue;
            case '<':
                if (i + 1 < n && (text[i + 1] == '=' || text[i + 1] == '>')) {
                    out.push_back({Tok::Op, std::string(text.substr(i, 2)), at});
                    i += 2;
                } else {
                    out.push_back({Tok::Op, "<", at});
                    ++i;
                }
                continue;
            case '>':
                if (i + 1 < n && text[i + 1] == '=') {
                    out.push_back({Tok::Op, ">=", at});
                    i += 2;
                } else {
                    out.push_back({Tok::Op, ">", at});
                    ++i;
                }
                continue;
            case '{':
                throw ParseError("unsupported construct: array constants", at);
            case '#':
                throw ParseError("unsupported construct: error literals", at);
            default: {
                std::string shown = std::isprint(static_cast<unsigned char>(ch))
                                        ? std::string(1, ch)
                                        : "byte 0x" + std::to_string(static_cast<unsigned char>(ch));
                throw ParseError("unexpected character '" + shown + "'", at);
            }
        }
    }
    out.push_back({Tok::End, "", n});
    return out;
}

enum class CellWord { NotCell, Cell, OutOfRange };

CellWord classify_cell_word(std::string_view w, CellRef& ref) {
    std::size_t i = 0;
    bool col_abs = false, row_abs = false;
    if (i < w.size() && w[i] == '$') {
        col_abs = true;
        ++i;
    }
    std::size_t lb = i;
    while (i < w.size() && std::isalpha(static_cast<unsigned char>(w[i]))) ++i;
    std::size_t letters = i - lb;
    if (letters == 0 || letters > 3) return CellWord::NotCell;
    std::string_view col_text = w.substr(lb, letters);
    if (i < w.size() && w[i] == '$') {
        row_abs = true;
        ++i;
    }
    std::size_t db = i;
    while (i < w.size() && std::isdigit(static_cast<unsigned char>(w[i]))) ++i;
    if (i != w.size() || db == i) return CellWord::NotCell;
    auto col = column_index(col_text);
    std::string_view digits = w.substr(db);
    if (!col || digits.size() > 7) return CellWord::OutOfRange;
    int row = std::stoi(std::string(digits));
    if (row < 1 || row > kMaxRow) return CellWord::OutOfRange;
    ref.column = *col;
    ref.column_absolute = col_abs;
    ref.row = row;
    ref.row_absolute = row_abs;
    return CellWord::Cell;
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char ch : s) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
    }
    return true;
}

bool is_group_name(std::string_view w) {
    auto dot = w.find('.');
    if (dot == std::string_view::npos || w.find('.', dot + 1) != std::string_view::npos)
        return false;
    return is_identifier(w.substr(0, dot)) && is_identifier(w.substr(dot + 1));
}

std::optional<int> placeholder_index(std::string_view w) {
    if (w.size() < 4 || w.substr(0, 3) != "var") return std::nullopt;
    int value = 0;
    for (std::size_t i = 3; i < w.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(w[i]))) return std::nullopt;
        if (value > 100000000) return std::nullopt;
        value = value * 10 + (w[i] - '0');
    }
    return value;
}

bool function_name_ok(std::string_view w) {
    if (w.empty() || !std::isalpha(static_cast<unsigned char>(w[0]))) return false;
    for (char ch : w) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '_') return false;
    }
    return true;
}

class Parser {
public:
    Parser(std::vector<Token> toks, Mode mode) : toks_(std::move(toks)), mode_(mode) {}

    Expr parse_all() {
        Expr e = comparison();
        if (peek().kind != Tok::End) fail_expected({"operator", "end of formula"});
        return e;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    Mode mode_;

    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at_op(std::string_view op) const { return peek().kind == Tok::Op && peek().text == op; }

    [[noreturn]] void fail_expected(std::initializer_list<std::string_view> expected) const {
        std::string msg = "syntax error: expected ";
        bool first = true;
        for (auto e : expected) {
            if (!first) msg += " or ";
            msg += e;
            first = false;
        }
        const Token& t = peek();
        msg += ", found ";
        msg += t.kind == Tok::End ? std::string("end of formula") : "'" + t.text + "'";
        throw ParseError(msg, t.offset);
    }

    void expect(Tok kind) {
        if (peek().kind != kind) fail_expected({describe(kind)});
        advance();
    }

    Expr comparison() {
        Expr lhs = concat();
        for (;;) {
            std::optional<BinaryOp> op;
            if (at_op("=")) op = BinaryOp::Eq;
            else if (at_op("<>")) op = BinaryOp::Ne;
            else if (at_op("<")) op = BinaryOp::Lt;
            else if (at_op(">")) op = BinaryOp::Gt;
            else if (at_op("<=")) op = BinaryOp::Le;
            else if (at_op(">=")) op = BinaryOp::Ge;
            if (!op) return lhs;
            advance();
            lhs = binary(*op, std::move(lhs), concat());
        }
    }

    Expr concat() {
        Expr lhs = additive();
        while (at_op("&")) {
            advance();
            lhs = binary(BinaryOp::Concat, std::move(lhs), additive());
        }
        return lhs;
    }

    Expr additive() {
        Expr lhs = multiplicative();
        for (;;) {
            if (at_op("+")) {
                advance();
                lhs = binary(BinaryOp::Add, std::move(lhs), multiplicative());
            } else if (at_op("-")) {
                advance();
                lhs = binary(BinaryOp::Sub, std::move(lhs), multiplicative());
            } else {
                return lhs;
            }
        }
    }

    Expr multiplicative() {
        Expr lhs = power();
        for (;;) {
            if (at_op("*")) {
                advance();
                lhs = binary(BinaryOp::Mul, std::move(lhs), power());
            } else if (at_op("/")) {
                advance();
                lhs = binary(BinaryOp::Div, std::move(lhs), power());
            } else {
                return lhs;
            }
        }
    }

    Expr power() {
        Expr base = prefix();
        if (at_op("^")) {
            advance();
            return binary(BinaryOp::Pow, std::move(base), power());
        }
        return base;
    }

    Expr prefix() {
        if (at_op("-")) {
            advance();
            return unary(UnaryOp::Neg, prefix());
        }
        if (at_op("+")) {
            advance();
            return unary(UnaryOp::Plus, prefix());
        }
        Expr e = primary();
        while (peek().kind == Tok::Percent) {
            advance();
            e = unary(UnaryOp::Percent, std::move(e));
        }
        return e;
    }

    Expr primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Number: {
                double v = t.number;
                advance();
                return NumberLit{v};
            }
            case Tok::String: {
                std::string s = t.text;
                advance();
                return TextLit{std::move(s)};
            }
            case Tok::LParen: {
                advance();
                Expr inner = comparison();
                expect(Tok::RParen);
                return paren(std::move(inner));
            }
            case Tok::QuotedSheet: {
                std::string sheet = t.text;
                advance();
                expect(Tok::Bang);
                return reference_after_sheet(std::move(sheet));
            }
            case Tok::LBracket:
                throw ParseError("unsupported construct: external workbook references", t.offset);
            case Tok::Word:
                return word();
            default:
                fail_expected({"number", "string", "reference", "function call", "'('"});
        }
    }

    Expr word() {
        Token t = peek();
        const std::string& w = t.text;
        if (peek(1).kind == Tok::Bang) {
            advance();
            advance();
            return reference_after_sheet(w);
        }
        if (peek(1).kind == Tok::LParen) {
            if (!function_name_ok(w)) throw ParseError("invalid function name '" + w + "'", t.offset);
            advance();
            return call(w);
        }
        if (iequals(w, "TRUE") || iequals(w, "FALSE")) {
            advance();
            return BoolLit{iequals(w, "TRUE")};
        }
        if (mode_ == Mode::Template) {
            if (auto idx = placeholder_index(w)) {
                advance();
                if (peek().kind == Tok::Colon) {
                    advance();
                    const Token& end = peek();
                    auto last = end.kind == Tok::Word ? placeholder_index(end.text) : std::nullopt;
                    if (!last) fail_expected({"canonical variable"});
                    advance();
                    return PlaceholderRange{*idx, *last};
                }
                return Placeholder{*idx};
            }
        }
        CellRef ref;
        switch (classify_cell_word(w, ref)) {
            case CellWord::Cell:
                advance();
                return maybe_range(ref);
            case CellWord::OutOfRange:
                throw ParseError("cell reference '" + w + "' is beyond sheet limits", t.offset);
            case CellWord::NotCell:
                break;
        }
        if (mode_ == Mode::Group && is_group_name(w)) {
            advance();
            return group_ref(w, t.offset);
        }
        if (peek(1).kind == Tok::LBracket)
            throw ParseError("unsupported construct: structured table references", t.offset);
        throw ParseError("unsupported construct: '" + w +
                             "' (defined names, R1C1 and whole row/column references are not supported)",
                         t.offset);
    }

    Expr call(const std::string& name) {
        expect(Tok::LParen);
        Call c{name, {}};
        if (peek().kind == Tok::RParen) {
            advance();
            return c;
        }
        for (;;) {
            c.args.push_back(comparison());
            if (peek().kind == Tok::Comma) {
                advance();
                continue;
            }
            if (peek().kind == Tok::RParen) {
                advance();
                return c;
            }
            fail_expected({"','", "')'"});
        }
    }

    CellRef cell_word_or_fail() {
        const Token& t = peek();
        CellRef ref;
        if (t.kind != Tok::Word) fail_expected({"cell reference"});
        switch (classify_cell_word(t.text, ref)) {
            case CellWord::Cell:
                advance();
                return ref;
            case CellWord::OutOfRange:
                throw ParseError("cell reference '" + t.text + "' is beyond sheet limits", t.offset);
            case CellWord::NotCell:
                break;
        }
        throw ParseError("unsupported construct: '" + t.text + "' is not an A1 cell reference",
                         t.offset);
    }

    Expr reference_after_sheet(std::string sheet) {
        CellRef ref = cell_word_or_fail();
        ref.sheet = std::move(sheet);
        return maybe_range(ref);
    }

    Expr maybe_range(CellRef first) {
        if (peek().kind == Tok::LBracket && mode_ != Mode::Group)
            throw ParseError("unsupported construct: '[' after reference", peek().offset);
        if (peek().kind != Tok::Colon) return first;
        advance();
        std::optional<std::string> sheet;
        std::size_t at = peek().offset;
        if (peek().kind == Tok::QuotedSheet || (peek().kind == Tok::Word && peek(1).kind == Tok::Bang)) {
            sheet = peek().text;
            advance();
            expect(Tok::Bang);
        }
        CellRef last = cell_word_or_fail();
        if (sheet && sheet != first.sheet)
            throw ParseError("range endpoints lie on different sheets", at);
        last.sheet = first.sheet;
        return RangeRef{std::move(first), std::move(last)};
    }

    int slice_index() {
        const Token& t = peek();
        if (t.kind != Tok::Number || t.number != std::floor(t.number) || t.number > 1e9)
            fail_expected({"integer index"});
        int v = int(t.number);
        if (v < 1) throw ParseError("malformed slice: indices are 1-based", t.offset);
        advance();
        return v;
    }

    Expr group_ref(const std::string& name, std::size_t offset) {
        if (peek().kind != Tok::LBracket) return GroupRef{name};
        advance();
        int lo = slice_index();
        if (peek().kind == Tok::Colon) {
            advance();
            int hi = slice_index();
            expect(Tok::RBracket);
            if (lo > hi)
                throw ParseError("malformed slice: lower bound " + std::to_string(lo) +
                                     " exceeds upper bound " + std::to_string(hi),
                                 offset);
            return GroupSlice{name, lo, hi};
        }
        expect(Tok::RBracket);
        return GroupElem{name, lo};
    }
};

Expr parse_with(std::string_view text, Mode mode) {
    std::size_t start = 0;
    if (mode != Mode::Template) {
        if (text.empty() || text.front() != '=')
            throw ParseError("formula must start with '='", 0);
        start = 1;
    }
    auto toks = tokenize(text, start);
    if (toks.size() == 1) throw ParseError("empty formula", text.size());
    Parser p(std::move(toks), mode);
    return p.parse_all();
}

// Precedence levels used by the renderer; higher binds tighter.
int precedence(BinaryOp op) {
    switch (op) {
        case BinaryOp::Eq: case BinaryOp::Ne: case BinaryOp::Lt:
        case BinaryOp::Gt: case BinaryOp::Le: case BinaryOp::Ge:
            return 1;
        case BinaryOp::Concat: return 2;
        case BinaryOp::Add: case BinaryOp::Sub: return 3;
        case BinaryOp::Mul: case BinaryOp::Div: return 4;
        case BinaryOp::Pow: return 5;
    }
    return 0;
}

constexpr int kPrefixLevel = 6;
constexpr int kPostfixLevel = 7;
constexpr int kPrimaryLevel = 8;

int precedence(const Expr& e) {
    if (auto* b = std::get_if<Binary>(&e.node)) return precedence(b->op);
    if (auto* u = std::get_if<Unary>(&e.node))
        return u->op == UnaryOp::Percent ? kPostfixLevel : kPrefixLevel;
    return kPrimaryLevel;
}

std::string render_cell(const CellRef& r, bool with_sheet) {
    std::string out;
    if (with_sheet && r.sheet) out += quote_sheet_name(*r.sheet) + "!";
    if (r.column_absolute) out += '$';
    out += column_letters(r.column);
    if (r.row_absolute) out += '$';
    out += std::to_string(r.row);
    return out;
}

void render_into(const Expr& e, std::string& out);

void render_child(const Expr& e, bool wrap, std::string& out) {
    if (wrap) out += '(';
    render_into(e, out);
    if (wrap) out += ')';
}

void render_into(const Expr& e, std::string& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, NumberLit>) {
                out += format_number(n.value);
            } else if constexpr (std::is_same_v<T, TextLit>) {
                out += '"';
                for (char ch : n.value) {
                    if (ch == '"') out += '"';
                    out += ch;
                }
                out += '"';
            } else if constexpr (std::is_same_v<T, BoolLit>) {
                out += n.value ? "TRUE" : "FALSE";
            } else if constexpr (std::is_same_v<T, CellRef>) {
                out += render_cell(n, true);
            } else if constexpr (std::is_same_v<T, RangeRef>) {
                out += render_cell(n.first, true);
                out += ':';
                out += render_cell(n.last, false);
            } else if constexpr (std::is_same_v<T, Call>) {
                out += n.name;
                out += '(';
                for (std::size_t i = 0; i < n.args.size(); ++i) {
                    if (i) out += ',';
                    render_into(n.args[i], out);
                }
                out += ')';
            } else if constexpr (std::is_same_v<T, Binary>) {
                int p = precedence(n.op);
                bool right_assoc = n.op == BinaryOp::Pow;
                int lp = precedence(*n.lhs);
                int rp = precedence(*n.rhs);
                render_child(*n.lhs, lp < p || (right_assoc && lp == p), out);
                out += symbol(n.op);
                render_child(*n.rhs, rp < p || (!right_assoc && rp == p), out);
            } else if constexpr (std::is_same_v<T, Unary>) {
                int op_level = precedence(e);
                if (n.op == UnaryOp::Percent) {
                    render_child(*n.operand, precedence(*n.operand) < op_level, out);
                    out += '%';
                } else {
                    out += symbol(n.op);
                    // A prefix operand is itself a prefix expression or tighter.
                    render_child(*n.operand, precedence(*n.operand) < kPrefixLevel, out);
                }
            } else if constexpr (std::is_same_v<T, Paren>) {
                out += '(';
                render_into(*n.inner, out);
                out += ')';
            } else if constexpr (std::is_same_v<T, GroupRef>) {
                out += n.name;
            } else if constexpr (std::is_same_v<T, GroupSlice>) {
                out += n.name + "[" + std::to_string(n.lo) + ":" + std::to_string(n.hi) + "]";
            } else if constexpr (std::is_same_v<T, GroupElem>) {
                out += n.name + "[" + std::to_string(n.index) + "]";
            } else if constexpr (std::is_same_v<T, Placeholder>) {
                out += "var" + std::to_string(n.index);
            } else if constexpr (std::is_same_v<T, PlaceholderRange>) {
                out += "var" + std::to_string(n.first) + ":var" + std::to_string(n.last);
            }
        },
        e.node);
}

template <class F>
Expr transform(const Expr& e, F&& leaf) {
    if (auto* c = std::get_if<Call>(&e.node)) {
        Call out{c->name, {}};
        out.args.reserve(c->args.size());
        for (const auto& a : c->args) out.args.push_back(transform(a, leaf));
        return out;
    }
    if (auto* b = std::get_if<Binary>(&e.node))
        return binary(b->op, transform(*b->lhs, leaf), transform(*b->rhs, leaf));
    if (auto* u = std::get_if<Unary>(&e.node)) return unary(u->op, transform(*u->operand, leaf));
    if (auto* p = std::get_if<Paren>(&e.node)) return paren(transform(*p->inner, leaf));
    return leaf(e);
}

CellRef shift_cell(CellRef r, int dcol, int drow) {
    if (!r.column_absolute) r.column += dcol;
    if (!r.row_absolute) r.row += drow;
    if (r.column < 1 || r.column > kMaxColumn || r.row < 1 || r.row > kMaxRow)
        throw OutOfBoundsError("shifted reference leaves the sheet (column " +
                               std::to_string(r.column) + ", row " + std::to_string(r.row) + ")");
    return r;
}

}  // namespace

Expr parse_formula(std::string_view text) { return parse_with(text, Mode::A1); }
Expr parse_group_formula(std::string_view text) { return parse_with(text, Mode::Group); }
Expr parse_template(std::string_view text) { return parse_with(text, Mode::Template); }

std::string render_expr(const Expr& e) {
    std::string out;
    render_into(e, out);
    return out;
}

std::string render_formula(const Expr& e) { return "=" + render_expr(e); }

Expr canonicalize(Expr e) {
    if (auto* c = std::get_if<Call>(&e.node)) {
        c->name = to_upper(c->name);
        for (auto& a : c->args) a = canonicalize(std::move(a));
    } else if (auto* b = std::get_if<Binary>(&e.node)) {
        *b->lhs = canonicalize(std::move(*b->lhs));
        *b->rhs = canonicalize(std::move(*b->rhs));
    } else if (auto* u = std::get_if<Unary>(&e.node)) {
        *u->operand = canonicalize(std::move(*u->operand));
    } else if (auto* p = std::get_if<Paren>(&e.node)) {
        *p->inner = canonicalize(std::move(*p->inner));
    }
    return e;
}

Expr strip_parens(const Expr& e) {
    if (auto* p = std::get_if<Paren>(&e.node)) return strip_parens(*p->inner);
    if (auto* c = std::get_if<Call>(&e.node)) {
        Call out{c->name, {}};
        for (const auto& a : c->args) out.args.push_back(strip_parens(a));
        return out;
    }
    if (auto* b = std::get_if<Binary>(&e.node))
        return binary(b->op, strip_parens(*b->lhs), strip_parens(*b->rhs));
    if (auto* u = std::get_if<Unary>(&e.node)) return unary(u->op, strip_parens(*u->operand));
    return e;
}

Expr shift_references(const Expr& e, int dcol, int drow) {
    return transform(e, [&](const Expr& leaf) -> Expr {
        if (auto* r = std::get_if<CellRef>(&leaf.node)) return shift_cell(*r, dcol, drow);
        if (auto* r = std::get_if<RangeRef>(&leaf.node))
            return RangeRef{shift_cell(r->first, dcol, drow), shift_cell(r->last, dcol, drow)};
        return leaf;
    });
}

}  // namespace air
