#include "doctest.h"

#include <random>

#include "air/builder.hpp"
#include "air/error.hpp"
#include "air/grouping.hpp"
#include "air/xlsx.hpp"
#include "../support/grouping_oracle.hpp"
#include "../support/workbooks.hpp"

using namespace air;
using air::testing::make_workbook;
using air::testing::Grid;
using air::testing::Oracle;
using air::testing::random_sheet;

namespace {

WorkbookModel sample() { return load_workbook(std::string(AIR_FIXTURE_DIR) + "/sample.xlsx"); }

std::size_t formula_groups_on(const ClassifiedSheet& s, int threshold) {
    return group_formula_cells(s, threshold).size();
}

}  // namespace

TEST_CASE("Clipper formula groups: 6 at threshold 0, 3 at threshold 2") {
    auto sheets = classify_cells(sample());
    const auto& clipper = sheets[1];
    REQUIRE(clipper.name == "Clipper");
    CHECK(formula_groups_on(clipper, 0) == 6);
    CHECK(formula_groups_on(clipper, 2) == 3);
    CHECK(formula_groups_on(clipper, 1) == 6);  // the gap is two rows high

    auto at2 = group_formula_cells(clipper, 2);
    CHECK(at2[0].range.a1() == "D2:D30");
    CHECK(at2[0].missing == std::set<Coord>{{4, 16}, {4, 17}});
}

TEST_CASE("header candidates") {
    auto m = make_workbook({{"S", {{"A1", "x"}, {"A2", "1"}, {"B1", "y"}, {"B2", "t"}, {"C3", "lbl"}, {"D3", "5"}}}});
    auto c = header_candidates(classify_sheet(m.sheets[0]));
    CHECK(c == std::set<Coord>{{1, 1}, {3, 3}});
}

TEST_CASE("unparsable formulas become singleton text groups with a diagnostic") {
    auto m = make_workbook({{"S", {{"A1", "=SUM("}, {"A2", "=SUM("}}}});
    auto s = classify_sheet(m.sheets[0]);
    CHECK(s.diagnostics.size() == 2);
    CHECK(s.diagnostics[0].kind == "parse");
    CHECK(group_raw_cells(s, 0).size() == 2);
}

TEST_CASE("negative threshold is rejected") {
    auto s = classify_sheet(make_workbook({{"S", {{"A1", "1"}}}}).sheets[0]);
    CHECK_THROWS_AS(group_formula_cells(s, -1), Error);
    CHECK_THROWS_AS(group_raw_cells(s, -1), Error);
}

TEST_CASE("rectangle search agrees with the exhaustive oracle") {
    std::mt19937 rng(20240611);
    for (int trial = 0; trial < 1500; ++trial) {
        int size = 2 + trial % 7;
        int threshold = trial % 4;
        auto sheet = random_sheet(rng, size);
        Oracle oracle{sheet.cells, sheet.barriers, threshold};
        auto expected = oracle.run();
        Grid cells = sheet.cells;
        auto got = detail::find_rectangles(cells, sheet.barriers, threshold);
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].first == expected[i].first);
            CHECK(got[i].last == expected[i].second);
        }
    }
}

TEST_CASE("grouping partitions the sheet and each group is maximal") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        int threshold = trial % 3;
        auto sheet = random_sheet(rng, 8);
        Grid cells = sheet.cells;
        auto rects = detail::partition_rectangles(cells, sheet.barriers, threshold);
        std::map<Coord, int> owner;
        for (std::size_t i = 0; i < rects.size(); ++i) {
            const auto& r = rects[i];
            for (int y = r.first.row; y <= r.last.row; ++y) {
                for (int x = r.first.column; x <= r.last.column; ++x) {
                    CHECK(owner.emplace(Coord{x, y}, int(i)).second);  // disjoint
                    auto it = sheet.cells.find({x, y});
                    bool is_member = it != sheet.cells.end() && it->second.key >= 0;
                    CHECK(is_member != bool(r.missing.count({x, y})));
                    if (is_member) {
                        CHECK(it->second.key == sheet.cells.at(r.first).key);
                    }
                }
            }
        }
        for (const auto& [c, g] : sheet.cells) {
            if (g.key >= 0) CHECK(owner.count(c) == 1);  // covered
        }
        // Maximality: with everything else already placed, no rectangle can
        // grow by a row or a column and stay valid.
        for (std::size_t i = 0; i < rects.size(); ++i) {
            const auto& r = rects[i];
            Grid free = sheet.cells;
            for (const auto& [c, o] : owner) {
                if (o != int(i)) free[c].occupied = true;
            }
            Oracle o{free, sheet.barriers, threshold};
            int key = sheet.cells.at(r.first).key;
            int w = r.last.column - r.first.column + 1, h = r.last.row - r.first.row + 1;
            CHECK(o.valid(key, r.first, w, h));
            CHECK_FALSE((o.valid(key, r.first, w + 1, h) && o.valid(key, r.first, w + 1, h + 1)));
            if (o.valid(key, r.first, w, h + 1)) CHECK(w * (h + 1) <= w * h);
            if (o.valid(key, r.first, w + 1, h)) CHECK((w + 1) * h <= w * h);
        }
    }
}

TEST_CASE("raising the threshold never creates more groups") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        auto sheet = random_sheet(rng, 2 + trial % 7);
        std::size_t previous = SIZE_MAX;
        for (int t = 0; t <= 5; ++t) {
            Grid cells = sheet.cells;
            auto n = detail::partition_rectangles(cells, sheet.barriers, t).size();
            CHECK(n <= previous);
            previous = n;
        }
    }
}

TEST_CASE("formula group count per sheet is non-increasing in the threshold") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> kind(0, 9);
    for (int trial = 0; trial < 300; ++trial) {
        air::testing::SheetSpec spec{"S", {}};
        for (int r = 2; r <= 9; ++r) {
            for (int c = 1; c <= 8; ++c) {
                int k = kind(rng);
                std::string a1 = column_letters(c) + std::to_string(r);
                if (k < 3) continue;
                if (k < 6) spec.second.push_back({a1, "=A1*2"});
                else if (k < 8) spec.second.push_back({a1, "=$A$1+1"});
                else spec.second.push_back({a1, "7"});
            }
        }
        auto sheet = classify_sheet(make_workbook({spec}).sheets[0]);
        std::size_t previous = SIZE_MAX;
        for (int t = 0; t <= 4; ++t) {
            auto n = group_formula_cells(sheet, t).size();
            CHECK(n <= previous);
            previous = n;
        }
    }
}

TEST_CASE("greedy search alone is not monotone, which is why thresholds are compared") {
    // x = key 0, # = foreign. At threshold 2 the greedy search takes a
    // large first rectangle that leaves more fragments than threshold 1.
    const char* rows[] = {"..xx..", "...xx.", ".#....", "#.x..x", "#.x...", "x#x.#x"};
    Grid cells;
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) {
            if (rows[r][c] == 'x') cells[{c + 1, r + 1}] = {0, true, false};
            if (rows[r][c] == '#') cells[{c + 1, r + 1}] = {-1, true, false};
        }
    }
    auto g1 = cells, g2 = cells, p2 = cells;
    CHECK(detail::find_rectangles(g1, {}, 1).size() == 4);
    CHECK(detail::find_rectangles(g2, {}, 2).size() == 5);
    CHECK(detail::partition_rectangles(p2, {}, 2).size() == 4);
}
