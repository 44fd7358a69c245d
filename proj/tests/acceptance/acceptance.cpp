// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "air/builder.hpp"
#include "air/error.hpp"
#include "air/evaluate.hpp"
#include "air/grouping.hpp"
#include "air/serialize.hpp"
#include "air/spreadsheet_graph.hpp"
#include "air/xlsx.hpp"
#include "../support/ast_gen.hpp"
#include "../support/grouping_oracle.hpp"
#include "../support/random_workbooks.hpp"

using namespace air;
using air::testing::load_sample;

namespace {

using Clock = std::chrono::steady_clock;

/// Thrown by `expect` with a short description of what went wrong.
struct Failure {
    std::string what;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure{what};
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void criterion(const std::string& name, double time_limit, const std::function<std::string()>& body) {
    auto t0 = Clock::now();
    std::string detail, error;
    try {
        detail = body();
    } catch (const Failure& f) {
        error = f.what;
    } catch (const std::exception& e) {
        error = std::string("exception: ") + e.what();
    }
    double elapsed = seconds_since(t0);
    if (error.empty() && time_limit > 0 && elapsed >= time_limit) {
        std::ostringstream os;
        os << "took " << elapsed << " s, limit " << time_limit << " s";
        error = os.str();
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3f s", elapsed);
    if (error.empty()) {
        std::cout << "PASS  " << name << " (" << detail << (detail.empty() ? "" : ", ") << timing << ")\n";
    } else {
        ++failures;
        std::cout << "FAIL  " << name << ": " << error << " (" << timing << ")\n";
    }
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

// --- fixture reproduction -------------------------------------------------

std::string fixture_reproduction() {
    auto m = load_sample();
    std::vector<std::string> sheets;
    for (const auto& s : m.sheets) sheets.push_back(s.name);
    expect(sheets == std::vector<std::string>{"PXII", "Clipper", "Flash", "Summary"}, "sheet names");
    for (const char* name : {"PXII", "Clipper", "Flash"}) {
        const Sheet* s = m.find_sheet(name);
        for (int r = 2; r <= 30; ++r) {
            bool empty_row = std::string(name) == "Clipper" && (r == 16 || r == 17);
            bool has = s->find({1, r}) || s->find({2, r});
            expect(has != empty_row, std::string(name) + " row " + std::to_string(r));
        }
        expect(!s->find({1, 31}) && !s->find({2, 31}), std::string(name) + " has rows past 30");
    }

    auto listing = split_lines(to_listing(build_graph(m, 2)));
    const std::vector<std::vector<std::string>> excerpt = {
        {"FORMULA GROUP: (PXII.Pdd PXII!D2:D30)", "\tRAW GROUP: (PXII.Idd PXII!B2:B30)",
         "\tRAW GROUP: (PXII.Vdd PXII!C2:C30)"},
        {"FORMULA GROUP: (PXII.PIO PXII!G2:G30)", "\tRAW GROUP: (PXII.IIO PXII!E2:E30)",
         "\tRAW GROUP: (PXII.VIO PXII!F2:F30)"},
        {"FORMULA GROUP: (PXII.PM PXII!J2:J30)", "\tRAW GROUP: (PXII.IM PXII!H2:H30)",
         "\tRAW GROUP: (PXII.VM PXII!I2:I30)"},
        {"RAW GROUP: (Flash.VIO Flash!C2:C30)"},
        {"RAW GROUP: (Flash.IM Flash!E2:E30)"},
        {"RAW GROUP: (Flash.VM Flash!F2:F30)"},
    };
    for (const auto& block : excerpt) {
        auto it = std::search(listing.begin(), listing.end(), block.begin(), block.end());
        expect(it != listing.end(), "listing lacks \"" + block.front() + "\"");
    }
    return std::to_string(listing.size()) + " listing lines";
}

// --- normalization ----------------------------------------------------------

std::string normalization_exactness() {
    auto n = normalize_expression({"Sheet1", 1, 10}, parse_formula("=Average(B10:B20)/Sheet2!D10+C$2"));
    expect(n.canonical_text == "AVERAGE(var0:var1)/var2+var3", "canonical text " + n.canonical_text);
    std::string bindings;
    for (const auto& b : n.bindings) bindings += (bindings.empty() ? "" : ",") + b.str();
    expect(bindings == "(Void,1,0),(Void,1,10),($Sheet2,3,0),(Void,2,$2)", "bindings " + bindings);
    return "";
}

// --- tolerance ---------------------------------------------------------------

std::string missing_data_tolerance() {
    auto m = load_sample();
    auto formula_names = [&](int threshold) {
        std::vector<std::string> out;
        for (const auto& g : build_graph(m, threshold).groups)
            if (g.range.sheet == "Clipper" && g.is_formula()) out.push_back(g.name);
        return out;
    };
    auto t0 = formula_names(0), t2 = formula_names(2);
    expect(t0.size() == 6, "threshold 0 gives " + std::to_string(t0.size()) + " groups");
    expect(t2 == std::vector<std::string>{"Clipper.Pdd", "Clipper.PCS", "Clipper.Ptotal"},
           "threshold 2 groups differ");
    return "6 and 3 groups";
}

// --- queries -------------------------------------------------------------------

std::string case_study_queries() {
    SpreadsheetGraph g(testing::fixture("sample.xlsx"), 2);
    const Group& ptotal = g.graph().lookup("Clipper.Ptotal");
    expect(ptotal.range.qualified() == "Clipper!H2:H30", "range " + ptotal.range.qualified());
    expect(g.formula("Clipper.Ptotal") == "=SUM(Clipper.Pdd,Clipper.PCS)", "formula " + ptotal.formula);
    const Group* iio = g.find_group("Flash", "B30");
    expect(iio && iio->name == "Flash.IIO" && iio->range.qualified() == "Flash!B2:B30", "find_group");
    expect(iio->describe() == "RAW GROUP: (Flash.IIO Flash!B2:B30)", "describe");
    return "";
}

// --- edit round trip -------------------------------------------------------------

std::string edit_round_trip() {
    SpreadsheetGraph g(testing::fixture("sample.xlsx"), 2);
    g.set_formula("Clipper.Ptotal", "=(Clipper.PCS + PXII.Pdd)*2 * Flash.PM");
    g.add_group("Summary", "Rdd2", "E2:E30", "=cos(PXII.Ptotal * Flash.Ptotal)");
    g.set_formula("Summary.avg", "=average(Summary.Pavg[1:28])");
    g.set_formula("Clipper.Pdd", "=Clipper.Idd * Clipper.Vdd * 2");
    g.rewrite_cells();
    auto path = std::filesystem::temp_directory_path() / "air_acceptance_edited.xlsx";
    g.save(path);
    SpreadsheetGraph reloaded(path, 2);
    std::filesystem::remove(path);

    const auto& a = g.graph();
    const auto& b = reloaded.graph();
    expect(a.groups.size() == b.groups.size(), "group counts differ");
    for (std::size_t i = 0; i < a.groups.size(); ++i) {
        expect(a.groups[i].name == b.groups[i].name, "name " + a.groups[i].name + " vs " + b.groups[i].name);
        expect(a.groups[i].range == b.groups[i].range, "range of " + a.groups[i].name);
    }
    expect(a.edges == b.edges, "edges differ");
    return std::to_string(a.groups.size()) + " groups, " + std::to_string(a.edges.size()) + " edges";
}

// --- property suites -----------------------------------------------------------------

std::string parse_render_fixpoint() {
    testing::AstGenerator gen(2024);
    const int trees = 2000;
    for (int i = 0; i < trees; ++i) {
        Expr a = gen.generate(6);
        std::string text = render_formula(a);
        Expr back = parse_formula(text);
        expect(strip_parens(back) == strip_parens(a), "tree differs after parsing " + text);
        expect(render_formula(back) == text, "render not idempotent on " + text);
    }
    return std::to_string(trees) + " trees";
}

std::string normalize_round_trip() {
    int cells = 0;
    for (const auto& entry : std::filesystem::directory_iterator(AIR_FIXTURE_DIR)) {
        if (entry.path().extension() != ".xlsx") continue;
        auto m = load_workbook(entry.path());
        for (const auto& s : m.sheets) {
            for (const auto& [c, rec] : s.cells) {
                if (!rec.is_formula()) continue;
                Expr ast = parse_formula(*rec.formula);
                auto n = normalize_expression(rec.address, ast);
                auto back = denormalize(rec.address, n);
                expect(back == render_formula(canonicalize(ast)), rec.address.qualified() + ": " + back);
                expect(normalize_expression(rec.address, parse_formula(back)) == n,
                       rec.address.qualified() + " normalizes differently after the round trip");
                ++cells;
            }
        }
    }
    expect(cells > 0, "no formula cells found");
    return std::to_string(cells) + " formula cells";
}

std::string grouping_properties() {
    using testing::Grid;
    using testing::Oracle;
    std::mt19937 rng(20240611);
    const int sheets = 1500;
    for (int trial = 0; trial < sheets; ++trial) {
        const int size = 2 + trial % 7;  // up to 8x8
        const int threshold = trial % 4;
        auto sheet = testing::random_sheet(rng, size);
        auto where = "sheet " + std::to_string(trial);

        // The rectangle search matches the exhaustive transcription of the rule.
        Oracle oracle{sheet.cells, sheet.barriers, threshold};
        auto expected = oracle.run();
        Grid scratch = sheet.cells;
        auto greedy = detail::find_rectangles(scratch, sheet.barriers, threshold);
        expect(greedy.size() == expected.size(), where + ": oracle disagrees");
        for (std::size_t i = 0; i < greedy.size(); ++i)
            expect(greedy[i].first == expected[i].first && greedy[i].last == expected[i].second,
                   where + ": oracle disagrees");

        // Partition and maximality of the reported grouping.
        Grid cells = sheet.cells;
        auto rects = detail::partition_rectangles(cells, sheet.barriers, threshold);
        std::map<Coord, int> owner;
        for (std::size_t i = 0; i < rects.size(); ++i) {
            const auto& r = rects[i];
            const int key = sheet.cells.at(r.first).key;
            for (int y = r.first.row; y <= r.last.row; ++y)
                for (int x = r.first.column; x <= r.last.column; ++x) {
                    expect(owner.emplace(Coord{x, y}, int(i)).second, where + ": overlap");
                    auto it = sheet.cells.find({x, y});
                    bool member = it != sheet.cells.end() && it->second.key >= 0;
                    expect(member != bool(r.missing.count({x, y})), where + ": missing set wrong");
                    expect(!member || it->second.key == key, where + ": mixed keys");
                }
        }
        for (const auto& [c, g] : sheet.cells)
            expect(g.key < 0 || owner.count(c), where + ": uncovered cell");
        for (std::size_t i = 0; i < rects.size(); ++i) {
            const auto& r = rects[i];
            Grid others = sheet.cells;
            for (const auto& [c, o] : owner)
                if (o != int(i)) others[c].occupied = true;
            Oracle o{others, sheet.barriers, threshold};
            const int key = sheet.cells.at(r.first).key;
            const int w = r.last.column - r.first.column + 1, h = r.last.row - r.first.row + 1;
            expect(o.valid(key, r.first, w, h), where + ": invalid rectangle");
            expect(!o.valid(key, r.first, w + 1, h) && !o.valid(key, r.first, w, h + 1),
                   where + ": rectangle can grow");
        }

        // Monotonicity: more tolerance never yields more groups.
        std::size_t previous = SIZE_MAX;
        for (int t = 0; t <= 5; ++t) {
            Grid c = sheet.cells;
            auto n = detail::partition_rectangles(c, sheet.barriers, t).size();
            expect(n <= previous, where + ": more groups at threshold " + std::to_string(t));
            previous = n;
        }
    }
    return std::to_string(sheets) + " sheets";
}

/// Drafts of every sheet before splitting, one origin per grouped region.
std::vector<GroupDraft> unsplit_drafts(const WorkbookModel& m, int threshold) {
    std::vector<GroupDraft> out;
    for (const auto& sheet : classify_cells(m)) {
        auto formulas = group_formula_cells(sheet, threshold);
        auto raws = group_raw_cells(sheet, threshold, formulas);
        for (auto* list : {&formulas, &raws}) {
            for (auto& c : *list) {
                GroupDraft d;
                d.kind = c.canonical ? GroupKind::Formula : GroupKind::Raw;
                d.range = c.range;
                d.missing = c.missing;
                d.canonical = c.canonical;
                d.type = c.type;
                d.unparsed = c.unparsed;
                d.origin = int(out.size());
                d.origin_range = c.range;
                out.push_back(std::move(d));
            }
        }
    }
    return out;
}

std::string claim_soundness() {
    std::mt19937 rng(4242);
    const int workbooks = 400;
    int claims_checked = 0;
    for (int trial = 0; trial < workbooks; ++trial) {
        auto m = testing::random_reference_workbook(rng);
        const std::vector<std::string> sheets{"S"};
        auto drafts = split_conflicts(unsplit_drafts(m, trial % 3), sheets);
        for (const auto& claim : resolve_dependencies(drafts, sheets)) {
            for (const auto& u : drafts) {
                if (u.origin == drafts[claim.from].origin || !claim.target.intersects(u.range)) continue;
                auto x = claim.target.intersection(u.range);
                expect(x && *x == u.range, "workbook " + std::to_string(trial) + ": claim " +
                                               claim.target.qualified() + " cuts " + u.range.qualified());
            }
            ++claims_checked;
        }

        // Edges of the built graph connect named groups.
        auto g = build_graph(m, trial % 3);
        for (const auto& [u, v] : g.edges) expect(g.find(u) && g.find(v), "edge to an unknown group");
    }
    return std::to_string(claims_checked) + " claims in " + std::to_string(workbooks) + " workbooks";
}

bool close(const Value& a, const Value& b) {
    if (a.index() != b.index()) return false;
    if (auto* x = std::get_if<double>(&a)) {
        double y = std::get<double>(b);
        return std::fabs(*x - y) <= 1e-12 * std::max({1.0, std::fabs(*x), std::fabs(y)});
    }
    return a == b;
}

int compare_oracle(const SpreadsheetGraph& g, const std::string& where) {
    int compared = 0;
    CellEvaluator cells(g.working_model());
    for (const auto& grp : g.graph().groups) {
        if (!grp.is_formula()) continue;
        std::vector<Value> oracle;
        try {
            oracle = g.evaluate(grp.name);
        } catch (const EvalError&) {
            continue;
        }
        auto els = grp.elements();
        expect(oracle.size() == els.size(), where + ": " + grp.name + " size");
        for (std::size_t i = 0; i < els.size(); ++i) {
            Value v = cells.value({grp.range.sheet, els[i].column, els[i].row});
            expect(close(oracle[i], v), where + ": " + grp.name + " element " + std::to_string(i + 1));
            ++compared;
        }
    }
    return compared;
}

std::string oracle_evaluation() {
    int compared = 0;
    SpreadsheetGraph sample(load_sample(), 2);
    compared += compare_oracle(sample, "sample");
    sample.set_formula("Clipper.Ptotal", "=(Clipper.PCS + PXII.Pdd)*2 * Flash.PM");
    sample.add_group("Summary", "Rdd2", "E2:E30", "=cos(PXII.Ptotal * Flash.Ptotal)");
    sample.set_formula("Summary.avg", "=average(Summary.Pavg[1:28])");
    sample.set_formula("Clipper.Pdd", "=Clipper.Idd * Clipper.Vdd * 2");
    compared += compare_oracle(sample, "edited sample");

    std::mt19937 rng(31337);
    for (int trial = 0; trial < 300; ++trial) {
        SpreadsheetGraph g(testing::random_numeric_workbook(rng), trial % 3);
        compared += compare_oracle(g, "workbook " + std::to_string(trial));
    }
    return std::to_string(compared) + " elements";
}

std::string json_round_trip() {
    int graphs = 0;
    auto check = [&](const DataFlowGraph& g, const std::string& where) {
        auto text = to_json(g);
        auto back = from_json(text);
        expect(back == g, where + ": graph differs after reading");
        expect(to_json(back) == text, where + ": text differs after writing again");
        ++graphs;
    };
    for (int t = 0; t <= 3; ++t) check(build_graph(load_sample(), t), "sample");
    check(DataFlowGraph{}, "empty graph");
    std::mt19937 rng(8);
    for (int trial = 0; trial < 300; ++trial)
        check(build_graph(testing::random_reference_workbook(rng), trial % 3), "workbook " + std::to_string(trial));
    return std::to_string(graphs) + " graphs";
}

}  // namespace

int main() {
    criterion("fixture reproduction: sample workbook and listing excerpt", 1.0, fixture_reproduction);
    criterion("normalization exactness", 0, normalization_exactness);
    criterion("missing-data tolerance: Clipper formula groups 6 at threshold 0, 3 at threshold 2", 0,
              missing_data_tolerance);
    criterion("case-study queries", 0, case_study_queries);
    criterion("edit round trip: edits, rewrite, save, reload give an isomorphic graph", 0, edit_round_trip);
    criterion("property (a): parse/render fixpoint on random formulas", 30.0, parse_render_fixpoint);
    criterion("property (b): normalize/denormalize round trip on every fixture formula", 30.0,
              normalize_round_trip);
    criterion("property (c): grouping partition, maximality, threshold monotonicity vs oracle", 30.0,
              grouping_properties);
    criterion("property (d): claims cover whole groups after splitting", 30.0, claim_soundness);
    criterion("property (e): oracle evaluator matches per-cell evaluation (rel. tol. 1e-12)", 30.0,
              oracle_evaluation);
    criterion("property (f): JSON round trip is the identity", 30.0, json_round_trip);
    criterion("acceptance is property-based plus golden strings (no published performance figures)", 0,
              [] { return std::string("criteria above"); });
    std::cout << (failures ? "FAILED: " + std::to_string(failures) + " criteria\n" : "ALL PASSED\n");
    return failures ? 1 : 0;
}
