#include "doctest.h"

#include <functional>
#include <random>

#include "air/builder.hpp"
#include "air/error.hpp"
#include "air/serialize.hpp"
#include "../support/random_workbooks.hpp"

using namespace air;
using air::testing::load_sample;
using air::testing::make_workbook;

namespace {

const DataFlowGraph& sample_graph() {
    static const DataFlowGraph g = build_graph(load_sample(), 2);
    return g;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            out.push_back(text.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> ranges(const DataFlowGraph& g) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& grp : g.groups) out.push_back({grp.name, grp.range.qualified()});
    return out;
}

std::vector<std::pair<std::string, std::string>> column(const std::string& col, int from, int to,
                                                        const std::string& content) {
    std::vector<std::pair<std::string, std::string>> out;
    for (int r = from; r <= to; ++r) out.push_back({col + std::to_string(r), content});
    return out;
}

}  // namespace

TEST_CASE("sample listing contains the case-study blocks") {
    auto listing = to_listing(sample_graph());
    const std::vector<std::string> blocks[] = {
        {"FORMULA GROUP: (PXII.Pdd PXII!D2:D30)", "\tRAW GROUP: (PXII.Idd PXII!B2:B30)",
         "\tRAW GROUP: (PXII.Vdd PXII!C2:C30)"},
        {"FORMULA GROUP: (PXII.PIO PXII!G2:G30)", "\tRAW GROUP: (PXII.IIO PXII!E2:E30)",
         "\tRAW GROUP: (PXII.VIO PXII!F2:F30)"},
        {"FORMULA GROUP: (PXII.PM PXII!J2:J30)", "\tRAW GROUP: (PXII.IM PXII!H2:H30)",
         "\tRAW GROUP: (PXII.VM PXII!I2:I30)"},
    };
    auto ls = lines(listing);
    for (const auto& block : blocks) {
        auto it = std::search(ls.begin(), ls.end(), block.begin(), block.end());
        CHECK_MESSAGE(it != ls.end(), block[0]);
    }
    for (const char* l : {"RAW GROUP: (Flash.VIO Flash!C2:C30)", "RAW GROUP: (Flash.IM Flash!E2:E30)",
                          "RAW GROUP: (Flash.VM Flash!F2:F30)"}) {
        CHECK(std::find(ls.begin(), ls.end(), l) != ls.end());
    }
    CHECK(listing.back() == '\n');
}

TEST_CASE("sample queries") {
    const auto& g = sample_graph();
    const Group& ptotal = g.lookup("Clipper.Ptotal");
    CHECK(ptotal.describe() == "FORMULA GROUP: (Clipper.Ptotal Clipper!H2:H30)");
    CHECK(ptotal.formula == "=SUM(Clipper.Pdd,Clipper.PCS)");
    CHECK(ptotal.missing == std::set<Coord>{{8, 16}, {8, 17}});
    CHECK(ptotal.raw_formula == std::pair<std::string, std::string>{"=SUM(D2,G2)", "=SUM(D30,G30)"});
    CHECK(ptotal.dependencies == std::vector<std::string>{"Clipper.Pdd", "Clipper.PCS"});
    CHECK(ptotal.value_type == ValueType::Number);
    CHECK(g.lookup("Clipper.Vdd").describe() == "RAW GROUP: (Clipper.Vdd Clipper!C2:C30)");

    const Group* iio = g.find_group("Flash", "B30");
    REQUIRE(iio);
    CHECK(iio->describe() == "RAW GROUP: (Flash.IIO Flash!B2:B30)");
    CHECK(g.find_group("Flash", "A1") == nullptr);
    CHECK_THROWS_AS(g.find_group("Flash", "ZZ!!"), ParseError);
    CHECK_THROWS_AS(g.find_group("Nowhere", "A1"), LookupError);
    CHECK_THROWS_AS(g.lookup("Nope.Nope"), LookupError);
    try {
        g.lookup("Clipper.ptotal");
        FAIL("expected LookupError");
    } catch (const LookupError& e) {
        CHECK(std::string(e.what()).find("Clipper.Ptotal") != std::string::npos);
    }
    CHECK(g.lookup("PXII.Pdd").formula == "=PXII.Idd*PXII.Vdd");
    CHECK(g.lookup("Summary.deviation2").formula == "=(Summary.Pavg-Summary.avg)^2");
    CHECK(g.lookup("Summary.avg").formula == "=AVERAGE(Summary.Pavg)");
    CHECK(g.edges.count({"Clipper.Pdd", "Clipper.Ptotal"}));
    CHECK(g.edges.count({"PXII.Ptotal", "Summary.Pavg"}));
    CHECK(g.diagnostics.empty());
}

TEST_CASE("Clipper at threshold 0 splits around the gap") {
    auto g = build_graph(load_sample(), 0);
    int formula = 0;
    for (const auto& grp : g.groups) formula += grp.range.sheet == "Clipper" && grp.is_formula();
    CHECK(formula == 6);
    CHECK(g.lookup("Clipper.Ptotal").range.a1() == "H2:H15");
}

TEST_CASE("listing of the smallest workbooks") {
    CHECK(to_listing(build_graph(WorkbookModel{}, 0)).empty());
    auto g = build_graph(make_workbook({{"Sheet1", {{"A1", "5"}}}}), 0);
    CHECK(to_listing(g) == "RAW GROUP: (Sheet1.Col_A Sheet1!A1:A1)\n");
}

TEST_CASE("claims follow the binding algebra") {
    auto m = make_workbook({{"S", {{"B2", "1"}, {"C2", "2"}, {"E2", "=$B$2*2"}, {"E3", "=$B$2*2"}, {"F2", "=5"}}}});
    GroupDraft e{GroupKind::Formula, parse_range("E2:E3", "S"), {}, normalize_expression({"S", 5, 2}, parse_formula("=$B$2*2"))};
    GroupDraft f{GroupKind::Formula, parse_range("F2", "S"), {}, normalize_expression({"S", 6, 2}, parse_formula("=5"))};
    auto claims = resolve_dependencies({e, f}, {"S"});
    REQUIRE(claims.size() == 1);
    CHECK(claims[0].target.a1() == "B2:B2");

    GroupDraft pdd{GroupKind::Formula, parse_range("D2:D30", "PXII"), {},
                   normalize_expression({"PXII", 4, 2}, parse_formula("=B2*C2"))};
    claims = resolve_dependencies({pdd}, {"PXII"});
    REQUIRE(claims.size() == 2);
    CHECK(claims[0].target.a1() == "B2:B30");
    CHECK(claims[1].target.a1() == "C2:C30");

    std::vector<Diagnostic> diags;
    GroupDraft lost{GroupKind::Formula, parse_range("A1", "S"), {},
                    normalize_expression({"S", 1, 1}, parse_formula("=Other!A1"))};
    CHECK(resolve_dependencies({lost}, {"S"}, &diags).empty());
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].kind == "unresolved");
}

TEST_CASE("partial claims split the claimed group") {
    auto cells = column("A", 2, 30, "1");
    cells.push_back({"A1", "a"});
    cells.push_back({"C1", "x"});
    cells.push_back({"C2", "=SUM(A2:A30)"});
    cells.push_back({"E1", "y"});
    cells.push_back({"E2", "=SUM(A2:A15)"});
    auto g = build_graph(make_workbook({{"S", cells}}), 0);
    CHECK(g.lookup("S.a_1").range.a1() == "A2:A15");
    CHECK(g.lookup("S.a_2").range.a1() == "A16:A30");
    CHECK(g.lookup("S.x").dependencies == std::vector<std::string>{"S.a_1", "S.a_2"});
    CHECK(g.lookup("S.x").formula == "=SUM(S!A2:A30)");
    CHECK(g.lookup("S.y").formula == "=SUM(S.a_1)");
}

TEST_CASE("two identical sub-range claims give three fragments") {
    auto cells = column("A", 2, 30, "1");
    cells.push_back({"A1", "a"});
    cells.push_back({"C1", "x"});
    cells.push_back({"C2", "=SUM(A5:A10)"});
    cells.push_back({"E1", "y"});
    cells.push_back({"E2", "=MAX(A5:A10)"});
    auto g = build_graph(make_workbook({{"S", cells}}), 0);
    std::vector<std::string> got;
    for (const auto& grp : g.groups) {
        if (grp.range.first.column == 1) got.push_back(grp.range.a1());
    }
    CHECK(got == std::vector<std::string>{"A2:A4", "A5:A10", "A11:A30"});
}

TEST_CASE("no partial claims leave groups unchanged") {
    auto g = build_graph(load_sample(), 2);
    for (const auto& grp : g.groups) CHECK(grp.name.find("_1") == std::string::npos);
}

TEST_CASE("naming rules") {
    auto with_header = build_graph(make_workbook({{"PXII", {{"D1", "PIO"}, {"D2", "1"}, {"D3", "2"}}}}), 0);
    CHECK(with_header.groups.at(0).name == "PXII.PIO");
    auto without = build_graph(make_workbook({{"PXII", {{"D2", "1"}, {"D3", "2"}}}}), 0);
    CHECK(without.groups.at(0).name == "PXII.Col_D");
    auto row = build_graph(make_workbook({{"S", {{"B4", "1"}, {"C4", "2"}}}}), 0);
    CHECK(row.groups.at(0).name == "S.Row_4");
    auto block = build_graph(make_workbook({{"Sheet1", {{"B2", "1"}, {"C2", "2"}, {"B3", "3"}, {"C3", "4"}}}}), 0);
    CHECK(block.groups.at(0).name == "Sheet1.Group_0");
    auto labelled_row = build_graph(make_workbook({{"S", {{"A4", "total"}, {"B4", "1"}, {"C4", "2"}}}}), 0);
    CHECK(labelled_row.groups.at(0).name == "S.total");
    REQUIRE(labelled_row.labels.size() == 1);
    CHECK(labelled_row.labels[0].address.a1() == "A4");
    auto messy = build_graph(make_workbook({{"My Sheet", {{"A1", " 2nd  value (W) "}, {"A2", "1"}}}}), 0);
    CHECK(messy.groups.at(0).name == "My_Sheet._2nd_value_W");
    CHECK(sanitize_identifier("   ") == "");
    CHECK(sanitize_identifier("a-b c") == "ab_c");
}

TEST_CASE("name collisions get numeric suffixes") {
    auto g = build_graph(make_workbook({{"S", {{"A1", "v"}, {"A2", "1"}, {"C1", "v"}, {"C2", "=A2"}}}}), 0);
    CHECK(g.groups.at(0).name == "S.v");
    CHECK(g.groups.at(1).name == "S.v_2");
    CHECK(g.lookup("S.v_2").formula == "=S.v");
}

TEST_CASE("a formula reading itself is a cycle") {
    auto g = build_graph(make_workbook({{"Sheet1", {{"A1", "=A1"}}}}), 0);
    REQUIRE(g.groups.size() == 1);
    CHECK(g.edges.count({g.groups[0].name, g.groups[0].name}));
    CHECK(g.has_cycle_diagnostic());
}

TEST_CASE("a running total reads its own earlier rows without a cycle") {
    auto cells = column("A", 2, 10, "1");
    cells.push_back({"B2", "=A2"});
    for (int r = 3; r <= 10; ++r) cells.push_back({"B" + std::to_string(r), "=B" + std::to_string(r - 1) + "+A" + std::to_string(r)});
    auto g = build_graph(make_workbook({{"S", cells}}), 0);
    CHECK_FALSE(g.has_cycle_diagnostic());
    const Group& run = g.lookup("S.Col_B_2");
    CHECK(run.range.a1() == "B3:B10");
    CHECK(std::find(run.dependencies.begin(), run.dependencies.end(), run.name) != run.dependencies.end());
}

TEST_CASE("two groups reading each other form a cycle") {
    auto g = build_graph(make_workbook({{"S", {{"A1", "=B1+1"}, {"B1", "=A1*2"}}}}), 0);
    CHECK(g.has_cycle_diagnostic());
}

TEST_CASE("references into empty cells are dangling, not nodes") {
    auto g = build_graph(make_workbook({{"S", {{"A1", "=Z99*2"}}}}), 0);
    REQUIRE(g.groups.size() == 1);
    REQUIRE(g.diagnostics.size() == 1);
    CHECK(g.diagnostics[0].kind == "dangling");
    CHECK(g.groups[0].dependencies.empty());
    CHECK(g.groups[0].formula == "=S!Z99*2");
}

TEST_CASE("unparsable formulas are reported and kept as text") {
    auto g = build_graph(make_workbook({{"S", {{"A1", "=SUM(("}}}}), 0);
    REQUIRE(g.groups.size() == 1);
    CHECK(g.groups[0].kind == GroupKind::Raw);
    CHECK(g.groups[0].values == std::vector<Value>{std::string("=SUM((")});
    CHECK(g.diagnostics.at(0).kind == "parse");
}

TEST_CASE("a referenced header-like cell is data, not a label") {
    auto g = build_graph(make_workbook({{"S", {{"A1", "rate"}, {"A2", "3"}, {"B2", "=A1&A2"}}}}), 0);
    CHECK(g.labels.empty());
    CHECK(g.find_group(CellAddress{"S", 1, 1}) != nullptr);
}

TEST_CASE("build is deterministic") {
    auto a = build_graph(load_sample(), 2), b = build_graph(load_sample(), 2);
    CHECK(a == b);
    CHECK(to_listing(a) == to_listing(b));
}

TEST_CASE("graph invariants on random workbooks") {
    std::mt19937 rng(4242);
    for (int trial = 0; trial < 300; ++trial) {
        auto m = air::testing::random_reference_workbook(rng);
        auto g = build_graph(m, trial % 3);
        const Sheet& s = m.sheets[0];

        // Partition: non-empty cells are in exactly one group, or are labels.
        for (const auto& [c, rec] : s.cells) {
            int owners = 0;
            for (const auto& grp : g.groups) owners += grp.is_member(c);
            bool label = std::any_of(g.labels.begin(), g.labels.end(),
                                     [&](const Label& l) { return l.address.coord() == c; });
            CHECK(owners + int(label) == 1);
        }
        for (std::size_t i = 0; i < g.groups.size(); ++i)
            for (std::size_t j = i + 1; j < g.groups.size(); ++j)
                CHECK_FALSE(g.groups[i].range.intersects(g.groups[j].range));

        // Names unique.
        std::set<std::string> names;
        for (const auto& grp : g.groups) CHECK(names.insert(grp.name).second);

        // Per-cell dependency graph.
        std::map<Coord, std::vector<Coord>> reads;
        for (const auto& grp : g.groups) {
            if (!grp.is_formula()) continue;
            for (const auto& c : grp.elements()) {
                auto ast = parse_formula(*s.find(c)->formula);
                visit_nodes(ast, [&](const Expr& e) {
                    if (auto* r = std::get_if<CellRef>(&e.node)) reads[c].push_back({r->column, r->row});
                    if (auto* r = std::get_if<RangeRef>(&e.node)) {
                        for (int y = std::min(r->first.row, r->last.row); y <= std::max(r->first.row, r->last.row); ++y)
                            for (int x = std::min(r->first.column, r->last.column); x <= std::max(r->first.column, r->last.column); ++x)
                                reads[c].push_back({x, y});
                    }
                });
            }
        }
        // Edges are exact: (u, v) iff some member of v reads a cell in u's range.
        std::set<std::pair<std::string, std::string>> expected;
        for (const auto& v : g.groups) {
            for (const auto& c : v.elements()) {
                for (const auto& t : reads[c]) {
                    for (const auto& u : g.groups) {
                        if (u.range.contains(t)) expected.insert({u.name, v.name});
                    }
                }
            }
        }
        CHECK(g.edges == expected);

        // Post-split soundness: each claim covers whole groups.
        for (const auto& v : g.groups) {
            if (!v.is_formula()) continue;
            for (const auto& dep : v.dependencies) {
                const Group& u = g.lookup(dep);
                bool whole = false;
                // The union of v's reads inside u is covered by u's range, and
                // every group intersecting a read box is listed.
                for (const auto& c : v.elements())
                    for (const auto& t : reads[c]) whole |= u.range.contains(t);
                CHECK(whole);
            }
        }

        // Cycle diagnostic agrees with a brute-force per-cell DFS.
        std::map<Coord, int> colour;
        bool cyclic = false;
        std::function<void(Coord)> dfs = [&](Coord c) {
            colour[c] = 1;
            for (const auto& t : reads[c]) {
                if (!reads.count(t) && !(s.find(t) && s.find(t)->is_formula())) continue;
                if (colour[t] == 1) cyclic = true;
                else if (colour[t] == 0) dfs(t);
            }
            colour[c] = 2;
        };
        for (const auto& [c, r] : reads) if (colour[c] == 0) dfs(c);
        CHECK(g.has_cycle_diagnostic() == cyclic);
    }
}
