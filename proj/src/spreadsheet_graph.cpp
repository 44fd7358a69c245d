#include "air/spreadsheet_graph.hpp"

#include "air/builder.hpp"
#include "air/error.hpp"
#include "air/evaluate.hpp"
#include "air/formula.hpp"
#include "air/rewrite.hpp"
#include "air/serialize.hpp"
#include "air/xlsx.hpp"

namespace air {

namespace {

const CellRecord* record(const WorkbookModel& m, const std::string& sheet, const Coord& c) {
    const Sheet* s = m.find_sheet(sheet);
    return s ? s->find(c) : nullptr;
}

bool same_cell(const CellRecord* a, const CellRecord* b) {
    if (!a || !b) return a == b;
    return a->formula == b->formula && (a->is_formula() || a->value == b->value);
}

Expr comparable(const Expr& e) { return strip_parens(canonicalize(e)); }

}  // namespace

SpreadsheetGraph::SpreadsheetGraph(const std::filesystem::path& path, int threshold)
    : SpreadsheetGraph(load_workbook(path), threshold) {}

SpreadsheetGraph::SpreadsheetGraph(WorkbookModel model, int threshold)
    : committed_(std::move(model)), working_(committed_) {
    graph_ = build_graph(working_, threshold);
}

void SpreadsheetGraph::rebuild() { graph_ = build_graph(working_, graph_.threshold); }

std::string SpreadsheetGraph::print_graph() const { return to_listing(graph_); }

const std::string& SpreadsheetGraph::formula(std::string_view name) const {
    const Group& g = graph_.lookup(name);
    if (!g.is_formula()) throw LookupError(g.name + " is a raw group and has no formula");
    return g.formula;
}

void SpreadsheetGraph::set_formula(std::string_view name, std::string_view text) {
    const Group& g = graph_.lookup(name);
    if (!g.is_formula()) throw EditError(g.name + " is a raw group; only formula groups take formulas");
    Expr ast = parse_group_formula(text);
    if (comparable(ast) == comparable(parse_group_formula(g.formula))) return;

    auto cells = lower_group_formula(graph_, {g.range, g.missing}, ast);
    Sheet* sheet = working_.find_sheet(g.range.sheet);
    for (auto& [c, f] : cells) sheet->put(c, Value{}, std::move(f));
    rebuild();
}

const Group& SpreadsheetGraph::add_group(std::string_view sheet_name, std::string_view header,
                                         std::string_view range_text, std::string_view formula) {
    Sheet* sheet = working_.find_sheet(sheet_name);
    if (!sheet) throw LookupError("unknown sheet '" + std::string(sheet_name) + "'");
    CellRange range = parse_range(range_text, sheet_name);
    if (range.first.row < 2) throw EditError("range " + range.a1() + " leaves no room for a header row");
    for (const auto& g : graph_.groups) {
        if (g.range.intersects(range))
            throw EditError("range " + range.qualified() + " overlaps " + g.name + " (" + g.range.qualified() + ")");
    }
    for (const auto& [c, rec] : sheet->cells) {
        if (range.contains(c)) throw EditError("range " + range.qualified() + " is not empty at " + rec.address.a1());
    }
    Coord above{range.first.column, range.first.row - 1};
    if (sheet->find(above)) {
        throw EditError("header cell " + CellAddress{sheet->name, above.column, above.row}.qualified() +
                        " is not empty");
    }
    std::string base = sanitize_identifier(header);
    if (base.empty()) throw EditError("header '" + std::string(header) + "' yields no usable name");
    std::string name = sheet_identifier(sheet->name) + "." + base;
    if (graph_.find(name)) throw EditError("a group named " + name + " already exists");

    auto cells = lower_group_formula(graph_, {range, {}}, parse_group_formula(formula));

    WorkbookModel saved_model = working_;
    DataFlowGraph saved_graph = graph_;
    sheet->put(above, std::string(header));
    for (auto& [c, f] : cells) sheet->put(c, Value{}, std::move(f));
    rebuild();
    const Group* added = graph_.find(name);
    if (!added || added->range != range) {
        working_ = std::move(saved_model);
        graph_ = std::move(saved_graph);
        throw EditError("the cells written for " + name + " would not be analyzed as one group on " +
                        range.qualified() + " (they merge with or split against neighbouring cells)");
    }
    return *added;
}

bool SpreadsheetGraph::is_dirty(std::string_view name) const {
    const Group& g = graph_.lookup(name);
    for (int r = g.range.first.row; r <= g.range.last.row; ++r) {
        for (int c = g.range.first.column; c <= g.range.last.column; ++c) {
            if (!same_cell(record(working_, g.range.sheet, {c, r}), record(committed_, g.range.sheet, {c, r})))
                return true;
        }
    }
    return false;
}

std::vector<std::string> SpreadsheetGraph::dirty_groups() const {
    std::vector<std::string> out;
    for (const auto& g : graph_.groups) {
        if (is_dirty(g.name)) out.push_back(g.name);
    }
    return out;
}

void SpreadsheetGraph::rewrite_cells() {
    std::set<CellAddress> changed;
    for (const auto& s : working_.sheets) {
        const Sheet* old = committed_.find_sheet(s.name);
        for (const auto& [c, rec] : s.cells) {
            if (!same_cell(&rec, old ? old->find(c) : nullptr)) changed.insert(rec.address);
        }
        if (!old) continue;
        for (const auto& [c, rec] : old->cells) {
            if (!s.find(c)) changed.insert(rec.address);
        }
    }
    if (changed.empty()) return;

    // Refresh cached values of edited formulas and everything downstream;
    // a value the oracle cannot compute is left empty for the spreadsheet
    // application to recalculate.
    auto stale = dependent_cells(working_, changed);
    WorkbookModel snapshot = working_;
    CellEvaluator eval(snapshot, stale);
    for (const auto& a : stale) {
        Value& cached = working_.find_sheet(a.sheet)->find(a.coord())->value;
        try {
            cached = eval.value(a);
        } catch (const EvalError&) {
            cached = Value{};
        }
    }
    committed_ = working_;
    rebuild();
}

void SpreadsheetGraph::save(const std::filesystem::path& path) const { save_workbook(committed_, path); }

std::vector<Value> SpreadsheetGraph::evaluate(std::string_view name) const {
    return evaluate_group(graph_, working_, name);
}

}  // namespace air
