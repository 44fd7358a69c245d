#include "air/serialize.hpp"

#include <json.hpp>

#include "air/error.hpp"

namespace air {

using nlohmann::json;

namespace {

constexpr int kVersion = 1;

std::string_view kind_name(GroupKind k) { return k == GroupKind::Formula ? "formula" : "raw"; }

json value_to_json(const Value& v) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
            else if constexpr (std::is_same_v<T, DateSerial>) return {{"date", x.serial}};
            else if constexpr (std::is_same_v<T, ErrorCode>) return {{"error", x.code}};
            else return x;
        },
        v);
}

json component_to_json(const Component& c) { return {{"value", c.value}, {"absolute", c.absolute}}; }

json binding_to_json(const LocationExpression& l) {
    return {{"sheet", l.sheet ? json(*l.sheet) : json(nullptr)},
            {"column", component_to_json(l.column)},
            {"row", component_to_json(l.row)}};
}

/// Typed access to a JSON document that reports where it went wrong.
struct Reader {
    const json& node;
    std::string path;

    [[noreturn]] void fail(const std::string& what) const {
        throw SchemaError((path.empty() ? std::string("/") : path) + ": " + what);
    }
    Reader at(const std::string& key) const {
        if (!node.is_object()) fail("expected an object");
        auto it = node.find(key);
        if (it == node.end()) fail("missing field '" + key + "'");
        return {*it, path + "/" + key};
    }
    Reader at(std::size_t i) const { return {node[i], path + "/" + std::to_string(i)}; }
    bool has(const std::string& key) const { return node.is_object() && node.contains(key); }
    std::size_t size() const {
        if (!node.is_array()) fail("expected an array");
        return node.size();
    }
    std::string str() const {
        if (!node.is_string()) fail("expected a string");
        return node.get<std::string>();
    }
    int integer() const {
        if (!node.is_number_integer()) fail("expected an integer");
        return node.get<int>();
    }
    double number() const {
        if (!node.is_number()) fail("expected a number");
        return node.get<double>();
    }
    bool boolean() const {
        if (!node.is_boolean()) fail("expected a boolean");
        return node.get<bool>();
    }
    std::optional<std::string> opt_str() const {
        if (node.is_null()) return std::nullopt;
        return str();
    }
};

Value value_from(const Reader& r) {
    const json& j = r.node;
    if (j.is_null()) return Value{};
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>();
    if (r.has("date")) return DateSerial{r.at("date").number()};
    if (r.has("error")) return ErrorCode{r.at("error").str()};
    r.fail("unrecognized value");
}

Component component_from(const Reader& r) { return {r.at("value").integer(), r.at("absolute").boolean()}; }

CellRange range_from(const Reader& r, const std::string& sheet) {
    try {
        return parse_range(r.str(), sheet);
    } catch (const Error& e) {
        r.fail(e.what());
    }
}

Coord coord_from(const Reader& r) {
    auto c = parse_coord(r.str());
    if (!c) r.fail("invalid cell coordinate");
    return *c;
}

Group group_from(const Reader& r) {
    Group g;
    g.name = r.at("name").str();
    auto kind = r.at("kind").str();
    if (kind == "formula") g.kind = GroupKind::Formula;
    else if (kind == "raw") g.kind = GroupKind::Raw;
    else r.at("kind").fail("unknown group kind '" + kind + "'");
    std::string sheet = r.at("sheet").str();
    g.range = range_from(r.at("range"), sheet);
    auto vt = value_type_from_string(r.at("value_type").str());
    if (!vt) r.at("value_type").fail("unknown value type");
    g.value_type = *vt;
    auto values = r.at("values");
    for (std::size_t i = 0; i < values.size(); ++i) g.values.push_back(value_from(values.at(i)));
    auto missing = r.at("missing");
    for (std::size_t i = 0; i < missing.size(); ++i) g.missing.insert(coord_from(missing.at(i)));
    if (g.is_formula()) {
        g.formula = r.at("formula").str();
        auto canonical = r.at("canonical");
        g.canonical.canonical_text = canonical.at("text").str();
        auto bindings = canonical.at("bindings");
        for (std::size_t i = 0; i < bindings.size(); ++i) {
            auto b = bindings.at(i);
            g.canonical.bindings.push_back(
                {b.at("sheet").opt_str(), component_from(b.at("column")), component_from(b.at("row"))});
        }
        auto raw = r.at("raw_formula");
        if (raw.size() != 2) raw.fail("expected two formulas");
        g.raw_formula = {raw.at(0).str(), raw.at(1).str()};
        auto deps = r.at("dependencies");
        for (std::size_t i = 0; i < deps.size(); ++i) g.dependencies.push_back(deps.at(i).str());
    }
    return g;
}

std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

std::string dot_id(std::string_view s) { return "\"" + dot_escape(s) + "\""; }

}  // namespace

std::string to_listing(const DataFlowGraph& graph) {
    std::string out;
    for (const auto& g : graph.groups) {
        out += g.describe() + "\n";
        if (!g.is_formula()) continue;
        for (const auto& d : g.dependencies) {
            if (const Group* u = graph.find(d)) out += "\t" + u->describe() + "\n";
        }
    }
    return out;
}

std::string to_json(const DataFlowGraph& graph, int indent) {
    json groups = json::array();
    for (const auto& g : graph.groups) {
        json j = {{"name", g.name},
                  {"kind", kind_name(g.kind)},
                  {"sheet", g.range.sheet},
                  {"range", g.range.a1()},
                  {"value_type", to_string(g.value_type)}};
        json values = json::array(), missing = json::array();
        for (const auto& v : g.values) values.push_back(value_to_json(v));
        for (const auto& c : g.missing) missing.push_back(column_letters(c.column) + std::to_string(c.row));
        j["values"] = std::move(values);
        j["missing"] = std::move(missing);
        if (g.is_formula()) {
            json bindings = json::array();
            for (const auto& b : g.canonical.bindings) bindings.push_back(binding_to_json(b));
            j["formula"] = g.formula;
            j["canonical"] = {{"text", g.canonical.canonical_text}, {"bindings", std::move(bindings)}};
            j["raw_formula"] = {g.raw_formula.first, g.raw_formula.second};
            j["dependencies"] = g.dependencies;
        }
        groups.push_back(std::move(j));
    }
    json edges = json::array();
    for (const auto& [u, v] : graph.edges) edges.push_back({u, v});
    json labels = json::array();
    for (const auto& l : graph.labels) {
        labels.push_back({{"sheet", l.address.sheet}, {"cell", l.address.a1()}, {"text", l.text}});
    }
    json diagnostics = json::array();
    for (const auto& d : graph.diagnostics) {
        diagnostics.push_back({{"severity", to_string(d.severity)},
                               {"kind", d.kind},
                               {"sheet", d.sheet},
                               {"range", d.range ? json(d.range->a1()) : json(nullptr)},
                               {"message", d.message}});
    }
    json doc = {{"version", kVersion},         {"threshold", graph.threshold},
                {"source", graph.source},      {"sheets", graph.sheets},
                {"groups", std::move(groups)}, {"edges", std::move(edges)},
                {"labels", std::move(labels)}, {"diagnostics", std::move(diagnostics)}};
    return doc.dump(indent) + "\n";
}

DataFlowGraph from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    Reader root{doc, ""};
    int version = root.at("version").integer();
    if (version != kVersion) {
        root.at("version").fail("unsupported AIR version " + std::to_string(version) + " (expected " +
                                std::to_string(kVersion) + ")");
    }
    DataFlowGraph g;
    g.threshold = root.at("threshold").integer();
    g.source = root.at("source").str();
    auto sheets = root.at("sheets");
    for (std::size_t i = 0; i < sheets.size(); ++i) g.sheets.push_back(sheets.at(i).str());
    auto groups = root.at("groups");
    for (std::size_t i = 0; i < groups.size(); ++i) g.groups.push_back(group_from(groups.at(i)));
    auto edges = root.at("edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto e = edges.at(i);
        if (e.size() != 2) e.fail("expected [from, to]");
        g.edges.insert({e.at(0).str(), e.at(1).str()});
    }
    auto labels = root.at("labels");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto l = labels.at(i);
        std::string sheet = l.at("sheet").str();
        Coord c = coord_from(l.at("cell"));
        g.labels.push_back({CellAddress{sheet, c.column, c.row}, l.at("text").str()});
    }
    auto diagnostics = root.at("diagnostics");
    for (std::size_t i = 0; i < diagnostics.size(); ++i) {
        auto d = diagnostics.at(i);
        Diagnostic out;
        auto sev = severity_from_string(d.at("severity").str());
        if (!sev) d.at("severity").fail("unknown severity");
        out.severity = *sev;
        out.kind = d.at("kind").str();
        out.sheet = d.at("sheet").str();
        if (auto r = d.at("range"); !r.node.is_null()) out.range = range_from(r, out.sheet);
        out.message = d.at("message").str();
        g.diagnostics.push_back(std::move(out));
    }
    return g;
}

std::string to_dot(const DataFlowGraph& graph) {
    std::string out = "digraph {\n";
    for (const auto& g : graph.groups) {
        out += "  " + dot_id(g.name) + " [shape=" + (g.is_formula() ? "ellipse" : "box") +
               ", label=\"" + dot_escape(g.name) + "\\n" + dot_escape(g.range.qualified()) + "\"];\n";
    }
    for (const auto& [u, v] : graph.edges) out += "  " + dot_id(u) + " -> " + dot_id(v) + ";\n";
    return out + "}\n";
}

}  // namespace air
