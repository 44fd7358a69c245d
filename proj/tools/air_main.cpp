// air: analyze spreadsheets into a dataflow graph of cell groups.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "air/builder.hpp"
#include "air/error.hpp"
#include "air/serialize.hpp"
#include "air/spreadsheet_graph.hpp"
#include "air/xlsx.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFatal = 1;
constexpr int kQueryError = 2;

/// Threshold used when --threshold is absent: $AIR_THRESHOLD, else 0.
int default_threshold() {
    const char* env = std::getenv("AIR_THRESHOLD");
    if (!env || !*env) return 0;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (*end || v < 0 || v > 1000000) throw air::Error("AIR_THRESHOLD must be a non-negative integer");
    return int(v);
}

void print_diagnostics(const air::DataFlowGraph& g) {
    for (const auto& d : g.diagnostics) std::cerr << d.str() << "\n";
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw air::IoError("cannot write '" + path + "'");
}

std::string describe_values(const air::Group& g) {
    std::string out;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        if (i) out += ", ";
        out += air::display(g.values[i]);
    }
    return out;
}

void show_group(const air::DataFlowGraph& graph, const air::Group& g) {
    std::cout << g.describe() << "\n";
    std::cout << "type: " << air::to_string(g.value_type) << "\n";
    std::cout << "elements: " << g.element_count() << "\n";
    if (!g.is_formula()) {
        std::cout << "values: " << describe_values(g) << "\n";
        return;
    }
    std::cout << "formula: " << g.formula << "\n";
    std::cout << "cells: " << g.raw_formula.first << " .. " << g.raw_formula.second << "\n";
    std::cout << "dependencies:\n";
    for (const auto& d : g.dependencies) {
        if (const auto* u = graph.find(d)) std::cout << "\t" << u->describe() << "\n";
    }
}

/// Splits a script line into whitespace-separated words; a word may be
/// quoted with single quotes (sheet names with spaces). Stops after
/// `count` words and returns the rest of the line as the last element.
std::vector<std::string> split_words(const std::string& line, std::size_t count) {
    std::vector<std::string> out;
    std::size_t i = 0;
    auto skip = [&] {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    };
    while (out.size() < count) {
        skip();
        if (i >= line.size()) return out;
        std::string word;
        if (line[i] == '\'') {
            ++i;
            while (i < line.size()) {
                if (line[i] == '\'' && i + 1 < line.size() && line[i + 1] == '\'') {
                    word += '\'';
                    i += 2;
                } else if (line[i] == '\'') {
                    ++i;
                    break;
                } else {
                    word += line[i++];
                }
            }
        } else {
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) word += line[i++];
        }
        out.push_back(word);
    }
    skip();
    std::string rest = line.substr(i);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.pop_back();
    if (!rest.empty()) out.push_back(rest);
    return out;
}

void apply_script(air::SpreadsheetGraph& g, std::istream& script) {
    std::string line;
    for (int n = 1; std::getline(script, line); ++n) {
        try {
            auto head = split_words(line, 1);
            if (head.empty() || head[0][0] == '#') continue;
            if (head[0] == "set") {
                auto w = split_words(line, 2);
                if (w.size() != 3) throw air::EditError("expected: set <group> <formula>");
                g.set_formula(w[1], w[2]);
            } else if (head[0] == "add") {
                auto w = split_words(line, 4);
                if (w.size() != 5) throw air::EditError("expected: add <sheet> <header> <range> <formula>");
                g.add_group(w[1], w[2], w[3], w[4]);
            } else {
                throw air::EditError("unknown command '" + head[0] + "'");
            }
        } catch (const air::Error& e) {
            throw air::EditError("line " + std::to_string(n) + ": " + e.what());
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convert spreadsheets into a dataflow graph of cell groups"};
    app.require_subcommand(1);

    std::string input, format = "listing", out, group, cell, script;
    std::optional<int> threshold;

    auto* analyze = app.add_subcommand("analyze", "Build the graph and print it");
    analyze->add_option("input", input, "Workbook (.xlsx)")->required();
    analyze->add_option("--threshold,-t", threshold, "Empty cells tolerated inside a group")
        ->check(CLI::NonNegativeNumber);
    analyze->add_option("--format,-f", format, "listing, json or dot")
        ->check(CLI::IsMember({"listing", "json", "dot"}));
    analyze->add_option("--out,-o", out, "Output file (default: stdout)");

    auto* show = app.add_subcommand("show", "Print one group");
    show->add_option("input", input, "Workbook (.xlsx)")->required();
    show->add_option("--threshold,-t", threshold, "Empty cells tolerated inside a group")
        ->check(CLI::NonNegativeNumber);
    auto* by_group = show->add_option("--group,-g", group, "Group name, e.g. Clipper.Ptotal");
    auto* by_cell = show->add_option("--cell,-c", cell, "Cell, e.g. Flash!B30");
    by_group->excludes(by_cell);
    by_cell->excludes(by_group);

    auto* edit = app.add_subcommand("edit", "Apply an edit script and save the result");
    edit->add_option("input", input, "Workbook (.xlsx)")->required();
    edit->add_option("--threshold,-t", threshold, "Empty cells tolerated inside a group")
        ->check(CLI::NonNegativeNumber);
    edit->add_option("--script,-s", script, "Lines 'set <group> <formula>' / 'add <sheet> <header> <range> <formula>'")
        ->required();
    edit->add_option("--out,-o", out, "Edited workbook")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kQueryError;
    }

    try {
        int t = threshold ? *threshold : default_threshold();
        if (*analyze) {
            auto graph = air::build_graph(air::load_workbook(input), t);
            print_diagnostics(graph);
            if (format == "json") write_output(out, air::to_json(graph));
            else if (format == "dot") write_output(out, air::to_dot(graph));
            else write_output(out, air::to_listing(graph));
            return kOk;
        }
        if (*show) {
            if (group.empty() && cell.empty()) {
                std::cerr << "show: one of --group or --cell is required\n";
                return kQueryError;
            }
            air::SpreadsheetGraph g(std::filesystem::path(input), t);
            try {
                if (!group.empty()) {
                    show_group(g.graph(), g[group]);
                    return kOk;
                }
                auto bang = cell.rfind('!');
                if (bang == std::string::npos) throw air::ParseError("expected SHEET!A1, got '" + cell + "'", 0);
                std::string sheet = cell.substr(0, bang);
                if (sheet.size() >= 2 && sheet.front() == '\'' && sheet.back() == '\'') {
                    sheet = sheet.substr(1, sheet.size() - 2);
                }
                const air::Group* found = g.find_group(sheet, cell.substr(bang + 1));
                if (!found) {
                    std::cerr << "no group contains " << cell << "\n";
                    return kQueryError;
                }
                show_group(g.graph(), *found);
                return kOk;
            } catch (const air::Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kQueryError;
            }
        }
        if (*edit) {
            air::SpreadsheetGraph g(std::filesystem::path(input), t);
            std::ifstream in(script);
            if (!in) throw air::IoError("cannot read script '" + script + "'");
            try {
                apply_script(g, in);
            } catch (const air::EditError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kQueryError;
            }
            g.rewrite_cells();
            g.save(out);
            print_diagnostics(g.graph());
            return kOk;
        }
    } catch (const air::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFatal;
    }
    return kOk;
}
