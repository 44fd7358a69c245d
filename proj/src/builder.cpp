#include "air/builder.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "air/error.hpp"
#include "air/formula.hpp"
#include "air/rewrite.hpp"

namespace air {

namespace {

CellRange bounding(const std::string& sheet, const std::vector<Coord>& cs) {
    CellRange r{sheet, cs.front(), cs.front()};
    for (const auto& c : cs) {
        r.first.column = std::min(r.first.column, c.column);
        r.first.row = std::min(r.first.row, c.row);
        r.last.column = std::max(r.last.column, c.column);
        r.last.row = std::max(r.last.row, c.row);
    }
    return r;
}

/// Distinct references of a template in first-occurrence order.
std::vector<std::vector<int>> template_references(const NormalizedExpression& n) {
    std::vector<std::vector<int>> out;
    visit_nodes(n.template_ast(), [&](const Expr& e) {
        std::vector<int> ref;
        if (auto* p = std::get_if<Placeholder>(&e.node)) ref = {p->index};
        else if (auto* r = std::get_if<PlaceholderRange>(&e.node)) ref = {r->first, r->last};
        else return;
        if (std::find(out.begin(), out.end(), ref) == out.end()) out.push_back(std::move(ref));
    });
    return out;
}

bool has_members(const GroupDraft& g, const CellRange& r) {
    for (int row = r.first.row; row <= r.last.row; ++row) {
        for (int col = r.first.column; col <= r.last.column; ++col) {
            if (!g.missing.count({col, row})) return true;
        }
    }
    return false;
}

/// Shrinks `r` while its outermost rows/columns hold no member.
std::optional<CellRange> trim(const GroupDraft& g, CellRange r) {
    if (!has_members(g, r)) return std::nullopt;
    auto line_empty = [&](CellRange l) { return !has_members(g, l); };
    while (line_empty({r.sheet, r.first, {r.last.column, r.first.row}})) ++r.first.row;
    while (line_empty({r.sheet, {r.first.column, r.last.row}, r.last})) --r.last.row;
    while (line_empty({r.sheet, r.first, {r.first.column, r.last.row}})) ++r.first.column;
    while (line_empty({r.sheet, {r.last.column, r.first.row}, r.last})) --r.last.column;
    return r;
}

GroupDraft fragment_of(const GroupDraft& g, const CellRange& r) {
    GroupDraft f = g;
    f.range = r;
    f.missing.clear();
    for (const auto& m : g.missing) {
        if (r.contains(m)) f.missing.insert(m);
    }
    return f;
}

/// Splits `g` at the boundaries of `claims` (already restricted to `g`),
/// re-merging neighbouring pieces claimed by the same set of claims.
std::vector<GroupDraft> cut(const GroupDraft& g, const std::vector<CellRange>& claims) {
    std::set<int> rows{g.range.first.row, g.range.last.row + 1};
    std::set<int> cols{g.range.first.column, g.range.last.column + 1};
    for (const auto& x : claims) {
        rows.insert(x.first.row);
        rows.insert(x.last.row + 1);
        cols.insert(x.first.column);
        cols.insert(x.last.column + 1);
    }
    std::vector<int> rb(rows.begin(), rows.end()), cb(cols.begin(), cols.end());
    if (rb.size() == 2 && cb.size() == 2) return {g};

    auto signature = [&](const CellRange& r) {
        std::vector<int> sig;
        for (std::size_t i = 0; i < claims.size(); ++i) {
            if (claims[i].intersects(r)) sig.push_back(int(i));
        }
        return sig;
    };
    struct Piece {
        CellRange range;
        std::vector<int> sig;
        bool open;
    };
    std::vector<Piece> pieces;
    std::vector<std::size_t> open_prev;
    for (std::size_t i = 0; i + 1 < rb.size(); ++i) {
        // Runs of equal signature within this band of rows.
        std::vector<Piece> runs;
        for (std::size_t j = 0; j + 1 < cb.size(); ++j) {
            CellRange cell{g.range.sheet, {cb[j], rb[i]}, {cb[j + 1] - 1, rb[i + 1] - 1}};
            auto sig = signature(cell);
            if (!runs.empty() && runs.back().sig == sig) {
                runs.back().range.last.column = cell.last.column;
            } else {
                runs.push_back({cell, sig, true});
            }
        }
        std::vector<std::size_t> open_now;
        for (auto& run : runs) {
            bool merged = false;
            for (std::size_t k : open_prev) {
                Piece& p = pieces[k];
                if (p.sig == run.sig && p.range.first.column == run.range.first.column &&
                    p.range.last.column == run.range.last.column) {
                    p.range.last.row = run.range.last.row;
                    open_now.push_back(k);
                    merged = true;
                    break;
                }
            }
            if (!merged) {
                pieces.push_back(run);
                open_now.push_back(pieces.size() - 1);
            }
        }
        open_prev = std::move(open_now);
    }
    std::vector<GroupDraft> out;
    for (const auto& p : pieces) {
        if (auto r = trim(g, p.range)) out.push_back(fragment_of(g, *r));
    }
    std::sort(out.begin(), out.end(),
              [](const GroupDraft& a, const GroupDraft& b) { return a.range.first < b.range.first; });
    return out;
}

std::size_t sheet_index(const std::vector<std::string>& sheets, const std::string& s) {
    auto it = std::find(sheets.begin(), sheets.end(), s);
    return std::size_t(it - sheets.begin());
}

void sort_drafts(std::vector<GroupDraft>& drafts, const std::vector<std::string>& sheets) {
    std::stable_sort(drafts.begin(), drafts.end(), [&](const GroupDraft& a, const GroupDraft& b) {
        auto sa = sheet_index(sheets, a.range.sheet), sb = sheet_index(sheets, b.range.sheet);
        if (sa != sb) return sa < sb;
        return a.range.first < b.range.first;
    });
}

std::optional<std::string> text_at(const WorkbookModel& model, const CellAddress& a) {
    if (a.row < 1 || a.column < 1) return std::nullopt;
    const CellRecord* rec = model.find(a);
    if (!rec || rec->is_formula()) return std::nullopt;
    if (auto* s = std::get_if<std::string>(&rec->value)) return *s;
    return std::nullopt;
}

}  // namespace

CellRange DependencyClaim::footprint(const GroupDraft& g, const Coord& at) const {
    CellAddress base{g.range.sheet, at.column, at.row};
    const auto& bindings = g.canonical->bindings;
    std::vector<Coord> cs;
    std::string sheet;
    for (int v : variables) {
        CellAddress a = bindings[std::size_t(v)].apply(base);
        sheet = a.sheet;
        cs.push_back(a.coord());
    }
    return bounding(sheet, cs);
}

std::vector<DependencyClaim> resolve_dependencies(const std::vector<GroupDraft>& groups,
                                                  const std::vector<std::string>& sheets,
                                                  std::vector<Diagnostic>* diagnostics) {
    std::vector<DependencyClaim> out;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const GroupDraft& g = groups[i];
        if (g.kind != GroupKind::Formula || !g.canonical) continue;
        for (auto& vars : template_references(*g.canonical)) {
            const auto& b = g.canonical->bindings[std::size_t(vars.front())];
            std::string sheet = b.sheet.value_or(g.range.sheet);
            if (std::find(sheets.begin(), sheets.end(), sheet) == sheets.end()) {
                if (diagnostics) {
                    diagnostics->push_back({Severity::Warning, "unresolved", g.range.sheet, g.range,
                                            "reference to unknown sheet '" + sheet + "'"});
                }
                continue;
            }
            DependencyClaim claim{i, vars, {}};
            try {
                CellRange a = claim.footprint(g, g.range.first);
                CellRange z = claim.footprint(g, g.range.last);
                claim.target = bounding(sheet, {a.first, a.last, z.first, z.last});
            } catch (const OutOfBoundsError& e) {
                if (diagnostics) {
                    diagnostics->push_back({Severity::Warning, "unresolved", g.range.sheet, g.range,
                                            std::string("reference leaves the sheet: ") + e.what()});
                }
                continue;
            }
            out.push_back(std::move(claim));
        }
    }
    return out;
}

std::vector<GroupDraft> split_conflicts(std::vector<GroupDraft> groups,
                                        const std::vector<std::string>& sheets) {
    for (;;) {
        auto claims = resolve_dependencies(groups, sheets);
        bool changed = false;
        std::vector<GroupDraft> next;
        for (const auto& g : groups) {
            std::vector<CellRange> hits;
            for (const auto& c : claims) {
                if (groups[c.from].origin == g.origin) continue;
                if (auto x = c.target.intersection(g.range)) hits.push_back(*x);
            }
            auto parts = hits.empty() ? std::vector<GroupDraft>{g} : cut(g, hits);
            if (parts.size() != 1 || parts.front().range != g.range) changed = true;
            for (auto& p : parts) next.push_back(std::move(p));
        }
        groups = std::move(next);
        if (!changed) return groups;
    }
}

std::string sanitize_identifier(std::string_view text) {
    std::size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    std::string out;
    bool in_space = false;
    for (std::size_t i = b; i < e; ++i) {
        unsigned char ch = static_cast<unsigned char>(text[i]);
        if (std::isspace(ch)) {
            if (!in_space) out += '_';
            in_space = true;
            continue;
        }
        in_space = false;
        if (std::isalnum(ch) || ch == '_') out += char(ch);
    }
    if (!out.empty() && std::isdigit(static_cast<unsigned char>(out[0]))) out.insert(out.begin(), '_');
    if (!out.empty() && std::all_of(out.begin(), out.end(), [](char c) { return c == '_'; })) out.clear();
    return out;
}

std::string sheet_identifier(const std::string& sheet) {
    auto s = sanitize_identifier(sheet);
    return s.empty() ? "Sheet" : s;
}

std::set<CellAddress> assign_names(std::vector<GroupDraft>& groups, const WorkbookModel& model) {
    std::set<CellAddress> used;
    std::map<int, int> fragments, seen;
    for (const auto& g : groups) ++fragments[g.origin];
    std::map<int, std::string> origin_base;
    int counter = 0;

    std::vector<std::string> wanted;
    for (auto& g : groups) {
        auto it = origin_base.find(g.origin);
        if (it == origin_base.end()) {
            const CellRange& r = g.origin_range;
            auto from = [&](int col, int row) -> std::optional<std::string> {
                CellAddress a{r.sheet, col, row};
                auto t = text_at(model, a);
                if (!t) return std::nullopt;
                auto s = sanitize_identifier(*t);
                if (s.empty()) return std::nullopt;
                used.insert(a);
                return s;
            };
            std::optional<std::string> base;
            if (r.width() == 1) {
                base = from(r.first.column, r.first.row - 1);
                if (!base && r.height() == 1) base = from(r.first.column - 1, r.first.row);
                if (!base) base = "Col_" + column_letters(r.first.column);
            } else if (r.height() == 1) {
                base = from(r.first.column - 1, r.first.row);
                if (!base) base = "Row_" + std::to_string(r.first.row);
            } else {
                base = from(r.first.column, r.first.row - 1);
                if (!base) base = from(r.first.column - 1, r.first.row);
                if (!base) base = "Group_" + std::to_string(counter++);
            }
            it = origin_base.emplace(g.origin, *base).first;
        }
        std::string base = it->second;
        if (fragments[g.origin] > 1) base += "_" + std::to_string(++seen[g.origin]);
        wanted.push_back(sheet_identifier(g.range.sheet) + "." + base);
    }

    std::map<std::string, int> demand;
    for (const auto& w : wanted) ++demand[w];
    std::set<std::string> taken;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        std::string name = wanted[i];
        if (taken.count(name)) {
            for (int k = 2;; ++k) {
                std::string alt = wanted[i] + "_" + std::to_string(k);
                if (!taken.count(alt) && !demand.count(alt)) {
                    name = alt;
                    break;
                }
            }
        }
        taken.insert(name);
        groups[i].name = name;
    }
    return used;
}

namespace {

/// Groups header candidates that ended up naming nothing, like any other
/// text cells, without crossing existing groups.
std::vector<GroupDraft> group_leftover_text(const ClassifiedSheet& sheet,
                                            const std::set<Coord>& leftovers,
                                            const std::vector<GroupDraft>& drafts, int threshold,
                                            int& next_origin) {
    if (leftovers.empty()) return {};
    std::map<Coord, detail::GridCell> cells;
    for (const auto& [c, n] : sheet.formula_cells) cells[c] = {-1, true, false};
    for (const auto& [c, r] : sheet.raw_cells) cells[c] = {leftovers.count(c) ? 0 : -1, true, false};
    for (const auto& d : drafts) {
        if (d.range.sheet != sheet.name) continue;
        for (int r = d.range.first.row; r <= d.range.last.row; ++r) {
            for (int c = d.range.first.column; c <= d.range.last.column; ++c) {
                auto& cell = cells[{c, r}];
                if (d.missing.count({c, r})) cell.nonempty = false;
                cell.occupied = true;
            }
        }
    }
    std::vector<GroupDraft> out;
    for (auto& rect : detail::partition_rectangles(cells, {}, threshold)) {
        GroupDraft d;
        d.kind = GroupKind::Raw;
        d.range = CellRange{sheet.name, rect.first, rect.last};
        d.missing = std::move(rect.missing);
        d.type = ValueType::Text;
        d.origin = next_origin++;
        d.origin_range = d.range;
        out.push_back(std::move(d));
    }
    return out;
}

ValueType common_type(const std::vector<Value>& values) {
    std::optional<ValueType> t;
    for (const auto& v : values) {
        ValueType vt = type_of(v);
        if (vt == ValueType::Empty) return ValueType::Unknown;
        if (t && *t != vt) return ValueType::Unknown;
        t = vt;
    }
    return t.value_or(ValueType::Unknown);
}

/// Tarjan's strongly connected components over group indices.
std::vector<std::vector<std::size_t>> strong_components(
    std::size_t n, const std::vector<std::vector<std::size_t>>& succ) {
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> out;
    int counter = 0;
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = 1;
        for (std::size_t w : succ[v]) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::size_t> comp;
            std::size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = 0;
                comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            out.push_back(std::move(comp));
        }
    };
    for (std::size_t v = 0; v < n; ++v) {
        if (index[v] < 0) visit(v);
    }
    return out;
}

/// Whether the member cells of a group-level cycle really reference each
/// other in a loop (a group reading its own earlier rows is not a cycle).
bool cells_form_cycle(const std::vector<std::size_t>& comp, const std::vector<GroupDraft>& drafts,
                      const std::vector<DependencyClaim>& claims) {
    std::map<std::pair<std::size_t, Coord>, std::size_t> id;
    std::vector<std::pair<std::size_t, Coord>> nodes;
    for (std::size_t g : comp) {
        const auto& d = drafts[g];
        if (d.kind != GroupKind::Formula) continue;
        for (int r = d.range.first.row; r <= d.range.last.row; ++r) {
            for (int c = d.range.first.column; c <= d.range.last.column; ++c) {
                if (!d.is_member({c, r})) continue;
                id[{g, {c, r}}] = nodes.size();
                nodes.push_back({g, {c, r}});
            }
        }
    }
    std::vector<std::vector<std::size_t>> succ(nodes.size());
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        auto [g, at] = nodes[n];
        for (const auto& claim : claims) {
            if (claim.from != g) continue;
            CellRange fp = claim.footprint(drafts[g], at);
            for (std::size_t u : comp) {
                const auto& du = drafts[u];
                if (du.kind != GroupKind::Formula) continue;
                auto x = fp.intersection(du.range);
                if (!x) continue;
                for (int r = x->first.row; r <= x->last.row; ++r) {
                    for (int c = x->first.column; c <= x->last.column; ++c) {
                        auto it = id.find({u, {c, r}});
                        if (it != id.end()) succ[n].push_back(it->second);
                    }
                }
            }
        }
    }
    // Iterative three-colour DFS.
    std::vector<char> colour(nodes.size(), 0);
    for (std::size_t s = 0; s < nodes.size(); ++s) {
        if (colour[s]) continue;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
        colour[s] = 1;
        while (!stack.empty()) {
            auto& [v, next] = stack.back();
            if (next < succ[v].size()) {
                std::size_t w = succ[v][next++];
                if (colour[w] == 1) return true;
                if (colour[w] == 0) {
                    colour[w] = 1;
                    stack.push_back({w, 0});
                }
            } else {
                colour[v] = 2;
                stack.pop_back();
            }
        }
    }
    return false;
}

}  // namespace

DataFlowGraph build_graph(const WorkbookModel& model, int threshold) {
    if (threshold < 0) throw Error("threshold must be non-negative");
    DataFlowGraph graph;
    graph.threshold = threshold;
    graph.source = model.path.string();
    for (const auto& s : model.sheets) graph.sheets.push_back(s.name);

    auto classified = classify_cells(model);
    for (const auto& cs : classified) {
        graph.diagnostics.insert(graph.diagnostics.end(), cs.diagnostics.begin(), cs.diagnostics.end());
    }

    // Formula groups first; their claims decide which header-looking cells
    // are really data (a referenced cell is never a mere label).
    int next_origin = 0;
    std::vector<GroupDraft> drafts;
    std::vector<std::vector<GroupCandidate>> formula_candidates;
    for (const auto& cs : classified) {
        formula_candidates.push_back(group_formula_cells(cs, threshold));
        for (const auto& fc : formula_candidates.back()) {
            GroupDraft d;
            d.kind = GroupKind::Formula;
            d.range = fc.range;
            d.missing = fc.missing;
            d.canonical = fc.canonical;
            d.origin = next_origin++;
            d.origin_range = d.range;
            drafts.push_back(std::move(d));
        }
    }
    auto claims = resolve_dependencies(drafts, graph.sheets);

    std::vector<std::set<Coord>> candidates;
    for (std::size_t s = 0; s < classified.size(); ++s) {
        const auto& cs = classified[s];
        auto cand = header_candidates(cs);
        for (auto it = cand.begin(); it != cand.end();) {
            bool referenced = std::any_of(claims.begin(), claims.end(), [&](const DependencyClaim& c) {
                return c.target.sheet == cs.name && c.target.contains(*it);
            });
            it = referenced ? cand.erase(it) : std::next(it);
        }
        for (const auto& rc : group_raw_cells(cs, threshold, formula_candidates[s], cand)) {
            GroupDraft d;
            d.kind = GroupKind::Raw;
            d.range = rc.range;
            d.missing = rc.missing;
            d.type = rc.type;
            d.unparsed = rc.unparsed;
            d.origin = next_origin++;
            d.origin_range = d.range;
            drafts.push_back(std::move(d));
        }
        candidates.push_back(std::move(cand));
    }

    drafts = split_conflicts(std::move(drafts), graph.sheets);
    sort_drafts(drafts, graph.sheets);

    // Header candidates that name no group are ordinary text after all.
    {
        auto trial = drafts;
        auto used = assign_names(trial, model);
        for (std::size_t s = 0; s < classified.size(); ++s) {
            std::set<Coord> leftovers;
            for (const auto& c : candidates[s]) {
                if (!used.count(CellAddress{classified[s].name, c.column, c.row})) leftovers.insert(c);
            }
            auto extra = group_leftover_text(classified[s], leftovers, drafts, threshold, next_origin);
            drafts.insert(drafts.end(), extra.begin(), extra.end());
        }
        sort_drafts(drafts, graph.sheets);
    }
    auto used = assign_names(drafts, model);

    auto inside_any = [&](const CellAddress& a) {
        return std::any_of(drafts.begin(), drafts.end(),
                           [&](const GroupDraft& d) { return d.range.contains(a); });
    };
    for (std::size_t s = 0; s < classified.size(); ++s) {
        for (const auto& c : candidates[s]) {
            CellAddress a{classified[s].name, c.column, c.row};
            if (used.count(a) && !inside_any(a)) graph.labels.push_back({a, *text_at(model, a)});
        }
    }

    // Materialize nodes.
    for (const auto& d : drafts) {
        Group g;
        g.name = d.name;
        g.kind = d.kind;
        g.range = d.range;
        g.missing = d.missing;
        const Sheet* sheet = model.find_sheet(d.range.sheet);
        for (const auto& c : g.elements()) {
            const CellRecord* rec = sheet->find(c);
            if (d.unparsed) g.values.push_back(*rec->formula);
            else g.values.push_back(rec ? rec->value : Value{});
        }
        if (d.kind == GroupKind::Formula) {
            g.canonical = *d.canonical;
            g.value_type = common_type(g.values);
            auto els = g.elements();
            g.raw_formula = {*sheet->find(els.front())->formula, *sheet->find(els.back())->formula};
        } else {
            g.value_type = d.type;
        }
        graph.groups.push_back(std::move(g));
    }

    // Edges: u -> v when some member of v reads a cell inside u's range.
    claims = resolve_dependencies(drafts, graph.sheets, &graph.diagnostics);
    std::vector<std::vector<std::size_t>> succ(drafts.size());
    for (const auto& claim : claims) {
        const GroupDraft& v = drafts[claim.from];
        Group& gv = graph.groups[claim.from];
        bool any = false;
        for (std::size_t u = 0; u < drafts.size(); ++u) {
            if (!drafts[u].range.intersects(claim.target)) continue;
            any = true;
            bool reads = false;
            for (const auto& at : gv.elements()) {
                if (claim.footprint(v, at).intersects(drafts[u].range)) {
                    reads = true;
                    break;
                }
            }
            if (!reads) continue;
            if (std::find(gv.dependencies.begin(), gv.dependencies.end(), drafts[u].name) ==
                gv.dependencies.end()) {
                gv.dependencies.push_back(drafts[u].name);
            }
            graph.edges.insert({drafts[u].name, v.name});
            if (std::find(succ[u].begin(), succ[u].end(), claim.from) == succ[u].end())
                succ[u].push_back(claim.from);
        }
        if (!any) {
            graph.diagnostics.push_back({Severity::Warning, "dangling", v.range.sheet, claim.target,
                                         v.name + " references " + claim.target.qualified() +
                                             ", which holds no data"});
        }
    }

    for (auto& g : graph.groups) {
        if (g.is_formula()) g.formula = render_group_formula(graph, g);
    }

    for (const auto& comp : strong_components(drafts.size(), succ)) {
        bool looped = comp.size() > 1 ||
                      std::find(succ[comp[0]].begin(), succ[comp[0]].end(), comp[0]) != succ[comp[0]].end();
        if (!looped || !cells_form_cycle(comp, drafts, claims)) continue;
        std::string names;
        for (std::size_t i : comp) names += (names.empty() ? "" : ", ") + drafts[i].name;
        const auto& first = drafts[comp.front()];
        graph.diagnostics.push_back({Severity::Warning, "cycle", first.range.sheet, first.range,
                                     "circular reference among " + names});
    }
    return graph;
}

}  // namespace air
