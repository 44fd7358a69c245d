#include "air/grouping.hpp"

#include <algorithm>

#include "air/error.hpp"
#include "air/formula.hpp"

namespace air {

ClassifiedSheet classify_sheet(const Sheet& sheet) {
    ClassifiedSheet out;
    out.name = sheet.name;
    for (const auto& [coord, rec] : sheet.cells) {
        if (rec.is_formula()) {
            try {
                auto ast = parse_formula(*rec.formula);
                out.formula_cells.emplace(coord, normalize_expression(rec.address, ast));
            } catch (const ParseError& e) {
                out.raw_cells.emplace(coord, RawCell{*rec.formula, ValueType::Text, true});
                out.diagnostics.push_back(Diagnostic{
                    Severity::Warning, "parse", sheet.name, CellRange{sheet.name, coord, coord},
                    "formula '" + *rec.formula + "' not analyzed: " + e.what()});
            }
        } else if (!is_empty(rec.value)) {
            out.raw_cells.emplace(coord, RawCell{rec.value, type_of(rec.value), false});
        }
    }
    return out;
}

std::vector<ClassifiedSheet> classify_cells(const WorkbookModel& model) {
    std::vector<ClassifiedSheet> out;
    out.reserve(model.sheets.size());
    for (const auto& s : model.sheets) out.push_back(classify_sheet(s));
    return out;
}

bool are_coherent(const NormalizedExpression& a, const NormalizedExpression& b) { return a == b; }

std::set<Coord> header_candidates(const ClassifiedSheet& sheet) {
    auto nonempty = [&](Coord c) { return sheet.formula_cells.count(c) || sheet.raw_cells.count(c); };
    auto is_text = [&](Coord c) {
        auto it = sheet.raw_cells.find(c);
        return it != sheet.raw_cells.end() && it->second.type == ValueType::Text && !it->second.unparsed;
    };
    std::set<Coord> out;
    for (const auto& [c, cell] : sheet.raw_cells) {
        if (!is_text(c)) continue;
        Coord below{c.column, c.row + 1};
        Coord right{c.column + 1, c.row};
        bool below_data = nonempty(below) && !is_text(below);
        bool right_data = nonempty(right) && !is_text(right) && !is_text(below);
        if (below_data || right_data) out.insert(c);
    }
    return out;
}

namespace detail {

std::vector<Rectangle> find_rectangles(std::map<Coord, GridCell>& cells,
                                       const std::set<Coord>& barriers, int threshold) {
    int max_col = 0, max_row = 0;
    for (const auto& [c, cell] : cells) {
        if (!cell.nonempty) continue;
        max_col = std::max(max_col, c.column);
        max_row = std::max(max_row, c.row);
    }
    auto get = [&](int c, int r) -> const GridCell* {
        auto it = cells.find({c, r});
        return it == cells.end() ? nullptr : &it->second;
    };
    auto barrier = [&](int c, int r) { return barriers.count({c, r}) > 0; };

    std::vector<Rectangle> out;
    for (auto it = cells.begin(); it != cells.end(); ++it) {
        const Coord seed = it->first;
        const GridCell& sc = it->second;
        if (sc.key < 0 || sc.occupied || !sc.nonempty) continue;
        const int key = sc.key;
        const int c0 = seed.column, r0 = seed.row;
        auto member = [&](int c, int r) {
            const GridCell* g = get(c, r);
            return g && g->nonempty && !g->occupied && g->key == key;
        };
        auto empty = [&](int c, int r) {
            const GridCell* g = get(c, r);
            return !g || (!g->nonempty && !g->occupied);
        };

        // Admissible height for width 1: no foreign or taken cells, empty runs
        // bounded, no row label left of rows below the first.
        std::vector<int> hrun;             // trailing empty run per row
        std::vector<char> row_has_member;  // per row, across the columns so far
        int vrun = 0;
        int last_member = 0;
        for (int r = r0; r <= max_row; ++r) {
            if (r > r0 && c0 > 1 && barrier(c0 - 1, r)) break;
            if (member(c0, r)) {
                vrun = 0;
                hrun.push_back(0);
                row_has_member.push_back(1);
                last_member = r - r0;
            } else if (empty(c0, r)) {
                if (++vrun > threshold || 1 > threshold) break;
                hrun.push_back(1);
                row_has_member.push_back(0);
            } else {
                break;
            }
        }
        int height = int(hrun.size());
        int best_w = 1, best_h = last_member + 1;

        for (int w = 2;; ++w) {
            const int c = c0 + w - 1;
            if (c > max_col) break;
            if (r0 > 1 && barrier(c, r0 - 1)) break;
            int first_member = -1;
            int kept = height;
            int vr = 0;
            for (int i = 0; i < height; ++i) {
                const int r = r0 + i;
                if (member(c, r)) {
                    vr = 0;
                    hrun[i] = 0;
                    row_has_member[i] = 1;
                    if (first_member < 0) first_member = i;
                } else if (empty(c, r)) {
                    if (vr + 1 > threshold || hrun[i] + 1 > threshold) {
                        kept = i;
                        break;
                    }
                    ++vr;
                    ++hrun[i];
                } else {
                    kept = i;
                    break;
                }
            }
            height = kept;
            hrun.resize(std::size_t(height));
            row_has_member.resize(std::size_t(height));
            if (height == 0) break;
            if (first_member < 0 || first_member >= height) continue;
            for (int h = height; h > first_member; --h) {
                if (!row_has_member[std::size_t(h - 1)]) continue;
                long long area = 1LL * w * h, best = 1LL * best_w * best_h;
                if (area > best || (area == best && h > best_h)) {
                    best_w = w;
                    best_h = h;
                }
                break;
            }
        }

        Rectangle rect{seed, {c0 + best_w - 1, r0 + best_h - 1}, {}};
        for (int r = r0; r < r0 + best_h; ++r) {
            for (int c = c0; c < c0 + best_w; ++c) {
                auto f = cells.find({c, r});
                if (f == cells.end()) {
                    cells.emplace(Coord{c, r}, GridCell{-1, false, true});
                    rect.missing.insert({c, r});
                } else {
                    if (!f->second.nonempty) rect.missing.insert({c, r});
                    f->second.occupied = true;
                }
            }
        }
        out.push_back(std::move(rect));
    }
    return out;
}

std::vector<Rectangle> partition_rectangles(std::map<Coord, GridCell>& cells,
                                            const std::set<Coord>& barriers, int threshold) {
    // Runs longer than the sheet extent cannot occur, so larger thresholds
    // all behave alike.
    int extent = 0;
    for (const auto& [c, cell] : cells) extent = std::max({extent, c.column, c.row});
    const int limit = std::min(threshold, extent);

    std::vector<Rectangle> best;
    std::map<Coord, GridCell> best_cells;
    for (int t = 0; t <= limit; ++t) {
        auto trial = cells;
        auto rects = find_rectangles(trial, barriers, t);
        if (t == 0 || rects.size() <= best.size()) {
            best = std::move(rects);
            best_cells = std::move(trial);
        }
    }
    cells = std::move(best_cells);
    return best;
}

}  // namespace detail

namespace {

std::string coherence_key(const NormalizedExpression& n) {
    std::string k = n.canonical_text;
    for (const auto& b : n.bindings) k += "|" + b.str();
    return k;
}

}  // namespace

std::vector<GroupCandidate> group_formula_cells(const ClassifiedSheet& sheet, int threshold) {
    if (threshold < 0) throw Error("threshold must be non-negative");
    std::map<Coord, detail::GridCell> cells;
    std::map<std::string, int> keys;
    std::vector<const NormalizedExpression*> by_key;
    for (const auto& [c, n] : sheet.formula_cells) {
        auto [it, inserted] = keys.emplace(coherence_key(n), int(by_key.size()));
        if (inserted) by_key.push_back(&n);
        cells[c] = detail::GridCell{it->second, true, false};
    }
    for (const auto& [c, raw] : sheet.raw_cells) cells[c] = detail::GridCell{-1, true, false};

    std::vector<GroupCandidate> out;
    for (auto& rect : detail::partition_rectangles(cells, header_candidates(sheet), threshold)) {
        GroupCandidate g;
        g.range = CellRange{sheet.name, rect.first, rect.last};
        g.missing = std::move(rect.missing);
        g.canonical = sheet.formula_cells.at(rect.first);
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<GroupCandidate> group_raw_cells(const ClassifiedSheet& sheet, int threshold,
                                            const std::vector<GroupCandidate>& formula_groups,
                                            std::optional<std::set<Coord>> excluded) {
    if (threshold < 0) throw Error("threshold must be non-negative");
    std::set<Coord> skip = excluded ? *excluded : header_candidates(sheet);
    std::map<Coord, detail::GridCell> cells;
    for (const auto& [c, n] : sheet.formula_cells) cells[c] = detail::GridCell{-1, true, false};
    for (const auto& g : formula_groups) {
        for (int r = g.range.first.row; r <= g.range.last.row; ++r) {
            for (int c = g.range.first.column; c <= g.range.last.column; ++c) {
                auto& cell = cells[{c, r}];
                if (g.missing.count({c, r})) cell.nonempty = false;
                cell.occupied = true;
            }
        }
    }
    int unparsed_key = 1000;
    for (const auto& [c, raw] : sheet.raw_cells) {
        int key = skip.count(c) ? -1 : raw.unparsed ? unparsed_key++ : int(raw.type);
        cells[c] = detail::GridCell{key, true, false};
    }

    std::vector<GroupCandidate> out;
    for (auto& rect : detail::partition_rectangles(cells, skip, threshold)) {
        const RawCell& seed = sheet.raw_cells.at(rect.first);
        GroupCandidate g;
        g.range = CellRange{sheet.name, rect.first, rect.last};
        g.missing = std::move(rect.missing);
        g.type = seed.type;
        g.unparsed = seed.unparsed;
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace air
