#include "air/xlsx.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "air/error.hpp"
#include "air/formula.hpp"
#include "xml.hpp"
#include "zip.hpp"

namespace air {

using detail::XmlElement;

namespace {

constexpr std::string_view kRelWorksheet =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet";
constexpr std::string_view kRelSharedStrings =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/sharedStrings";
constexpr std::string_view kRelStyles =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/styles";
constexpr std::string_view kRelOfficeDocument =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument";

struct Relationship {
    std::string type;
    std::string target;  // package path without leading '/'
};

std::string resolve_target(std::string_view base_dir, std::string_view target) {
    if (!target.empty() && target.front() == '/') return std::string(target.substr(1));
    std::vector<std::string> parts;
    std::string joined = std::string(base_dir) + std::string(target);
    std::stringstream ss(joined);
    std::string seg;
    while (std::getline(ss, seg, '/')) {
        if (seg.empty() || seg == ".") continue;
        if (seg == "..") {
            if (!parts.empty()) parts.pop_back();
            continue;
        }
        parts.push_back(seg);
    }
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += '/';
        out += parts[i];
    }
    return out;
}

std::map<std::string, Relationship> read_relationships(const std::map<std::string, std::string>& parts,
                                                       const std::string& rels_part,
                                                       std::string_view base_dir) {
    std::map<std::string, Relationship> out;
    auto it = parts.find(rels_part);
    if (it == parts.end()) return out;
    auto root = detail::parse_xml(it->second, rels_part);
    for (const auto* rel : root->children_named("Relationship")) {
        const auto* id = rel->attribute("Id");
        const auto* type = rel->attribute("Type");
        const auto* target = rel->attribute("Target");
        if (!id || !type || !target) continue;
        const auto* mode = rel->attribute("TargetMode");
        if (mode && *mode == "External") continue;
        out[*id] = Relationship{*type, resolve_target(base_dir, *target)};
    }
    return out;
}

std::vector<std::string> read_shared_strings(const std::string& xml, const std::string& part) {
    std::vector<std::string> out;
    auto root = detail::parse_xml(xml, part);
    for (const auto* si : root->children_named("si")) {
        std::string s;
        if (const auto* t = si->child("t")) s += t->text;
        for (const auto* r : si->children_named("r")) {
            if (const auto* t = r->child("t")) s += t->text;
        }
        out.push_back(std::move(s));
    }
    return out;
}

bool is_date_format_code(std::string_view code) {
    std::string stripped;
    bool in_quote = false, in_bracket = false;
    for (std::size_t i = 0; i < code.size(); ++i) {
        char ch = code[i];
        if (in_quote) {
            if (ch == '"') in_quote = false;
            continue;
        }
        if (in_bracket) {
            if (ch == ']') in_bracket = false;
            continue;
        }
        if (ch == '"') in_quote = true;
        else if (ch == '[') in_bracket = true;
        else if (ch == '\\' || ch == '_' || ch == '*') ++i;
        else stripped.push_back(char(std::tolower(static_cast<unsigned char>(ch))));
    }
    if (stripped == "general") return false;
    return stripped.find_first_of("dmyhs") != std::string::npos;
}

bool is_builtin_date_format(int id) {
    return (id >= 14 && id <= 22) || (id >= 27 && id <= 36) || (id >= 45 && id <= 47) ||
           (id >= 50 && id <= 58);
}

/// Per cellXfs index: whether the style formats numbers as dates.
std::vector<bool> read_date_styles(const std::string& xml, const std::string& part) {
    auto root = detail::parse_xml(xml, part);
    std::map<int, bool> custom;
    if (const auto* fmts = root->child("numFmts")) {
        for (const auto* f : fmts->children_named("numFmt")) {
            const auto* id = f->attribute("numFmtId");
            const auto* code = f->attribute("formatCode");
            if (id && code) custom[std::atoi(id->c_str())] = is_date_format_code(*code);
        }
    }
    std::vector<bool> out;
    if (const auto* xfs = root->child("cellXfs")) {
        for (const auto* xf : xfs->children_named("xf")) {
            int id = 0;
            if (const auto* a = xf->attribute("numFmtId")) id = std::atoi(a->c_str());
            auto it = custom.find(id);
            out.push_back(it != custom.end() ? it->second : is_builtin_date_format(id));
        }
    }
    return out;
}

double parse_double(const std::string& text, const std::string& where) {
    double v = 0;
    auto begin = text.data();
    while (begin < text.data() + text.size() && *begin == ' ') ++begin;
    auto res = std::from_chars(begin, text.data() + text.size(), v);
    if (res.ec != std::errc()) throw IoError("invalid numeric value '" + text + "' at " + where);
    return v;
}

struct SharedFormula {
    Coord anchor;
    std::optional<Expr> ast;  // nullopt when the master does not parse
    std::string text;
};

void read_sheet(Sheet& sheet, const std::string& xml, const std::string& part,
                const std::vector<std::string>& strings, const std::vector<bool>& date_styles) {
    auto root = detail::parse_xml(xml, part);
    const auto* data = root->child("sheetData");
    if (!data) return;
    std::map<std::string, SharedFormula> shared;
    int next_row = 1;
    for (const auto* row : data->children_named("row")) {
        int row_index = next_row;
        if (const auto* r = row->attribute("r")) row_index = std::atoi(r->c_str());
        next_row = row_index + 1;
        int next_col = 1;
        for (const auto* c : row->children_named("c")) {
            Coord at{next_col, row_index};
            if (const auto* r = c->attribute("r")) {
                auto parsed = parse_coord(*r);
                if (!parsed) throw IoError("invalid cell reference '" + *r + "' in " + part);
                at = *parsed;
            }
            next_col = at.column + 1;
            std::string where = part + " cell " + column_letters(at.column) + std::to_string(at.row);

            std::string type = "n";
            if (const auto* t = c->attribute("t")) type = *t;
            bool date_style = false;
            if (const auto* s = c->attribute("s")) {
                auto idx = std::size_t(std::atoi(s->c_str()));
                date_style = idx < date_styles.size() && date_styles[idx];
            }

            std::optional<std::string> formula;
            if (const auto* f = c->child("f")) {
                std::string ftype = f->attribute("t") ? *f->attribute("t") : "normal";
                if (ftype == "shared" && f->attribute("si")) {
                    const std::string& si = *f->attribute("si");
                    if (!f->text.empty()) {
                        SharedFormula sf{at, std::nullopt, f->text};
                        try {
                            sf.ast = parse_formula("=" + f->text);
                        } catch (const ParseError&) {
                        }
                        shared[si] = std::move(sf);
                        formula = "=" + f->text;
                    } else {
                        auto it = shared.find(si);
                        if (it == shared.end())
                            throw IoError("shared formula " + si + " used before definition at " + where);
                        const SharedFormula& sf = it->second;
                        if (sf.ast) {
                            formula = render_formula(shift_references(
                                *sf.ast, at.column - sf.anchor.column, at.row - sf.anchor.row));
                        } else {
                            formula = "=" + sf.text;
                        }
                    }
                } else if (ftype != "dataTable") {
                    formula = "=" + f->text;
                }
            }

            Value value;
            const auto* v = c->child("v");
            if (type == "s") {
                if (v) {
                    auto idx = std::size_t(std::atol(v->text.c_str()));
                    if (idx >= strings.size())
                        throw IoError("shared string index out of range at " + where);
                    value = strings[idx];
                }
            } else if (type == "inlineStr") {
                if (const auto* is = c->child("is")) {
                    std::string s;
                    if (const auto* t = is->child("t")) s += t->text;
                    for (const auto* r : is->children_named("r")) {
                        if (const auto* t = r->child("t")) s += t->text;
                    }
                    value = std::move(s);
                }
            } else if (type == "str" || type == "d") {
                if (v) value = v->text;
            } else if (type == "b") {
                if (v) value = v->text == "1" || v->text == "true";
            } else if (type == "e") {
                if (v) value = ErrorCode{v->text};
            } else {
                if (v && !v->text.empty()) {
                    double d = parse_double(v->text, where);
                    if (date_style) value = DateSerial{d};
                    else value = d;
                }
            }
            if (!formula && is_empty(value)) continue;
            sheet.put(at, std::move(value), std::move(formula));
        }
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec))
        throw IoError("file not found: '" + path.string() + "'");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

WorkbookModel read_xlsx(std::string_view bytes, const std::filesystem::path& origin) {
    auto parts = detail::unzip(bytes);

    std::string workbook_part = "xl/workbook.xml";
    for (const auto& [id, rel] : read_relationships(parts, "_rels/.rels", "")) {
        if (rel.type == kRelOfficeDocument) workbook_part = rel.target;
    }
    if (!parts.count(workbook_part)) {
        if (parts.count("xl/workbook.bin"))
            throw IoError("unsupported workbook part 'xl/workbook.bin' (binary .xlsb workbook)");
        throw IoError("unsupported workbook: missing part '" + workbook_part + "'");
    }
    std::string base_dir = workbook_part.substr(0, workbook_part.rfind('/') + 1);
    std::string rels_part = base_dir + "_rels/" + workbook_part.substr(base_dir.size()) + ".rels";
    auto rels = read_relationships(parts, rels_part, base_dir);

    std::vector<std::string> strings;
    std::vector<bool> date_styles;
    for (const auto& [id, rel] : rels) {
        auto it = parts.find(rel.target);
        if (it == parts.end()) continue;
        if (rel.type == kRelSharedStrings) strings = read_shared_strings(it->second, rel.target);
        if (rel.type == kRelStyles) date_styles = read_date_styles(it->second, rel.target);
    }

    WorkbookModel model;
    model.path = origin;
    auto wb = detail::parse_xml(parts.at(workbook_part), workbook_part);
    const auto* sheets = wb->child("sheets");
    if (!sheets) return model;
    for (const auto* s : sheets->children_named("sheet")) {
        const auto* name = s->attribute("name");
        const auto* rid = s->attribute("id");
        if (!name || !rid) throw IoError("sheet entry without name or id in '" + workbook_part + "'");
        auto rel = rels.find(*rid);
        if (rel == rels.end())
            throw IoError("sheet '" + *name + "' has no relationship in '" + rels_part + "'");
        if (rel->second.type != kRelWorksheet)
            throw IoError("unsupported workbook part '" + rel->second.target + "' for sheet '" +
                          *name + "' (only worksheets are supported)");
        auto part = parts.find(rel->second.target);
        if (part == parts.end())
            throw IoError("missing workbook part '" + rel->second.target + "'");
        Sheet& sheet = model.add_sheet(*name);
        read_sheet(sheet, part->second, rel->second.target, strings, date_styles);
    }
    return model;
}

WorkbookModel load_workbook(const std::filesystem::path& path) {
    std::string bytes = read_file(path);
    try {
        return read_xlsx(bytes, path);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

namespace {

constexpr std::string_view kXmlDecl = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n";
constexpr std::string_view kMainNs = "http://schemas.openxmlformats.org/spreadsheetml/2006/main";
constexpr std::string_view kRelNs =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships";

class StringTable {
public:
    std::size_t index(const std::string& s) {
        auto [it, inserted] = ids_.emplace(s, order_.size());
        if (inserted) order_.push_back(s);
        return it->second;
    }
    std::size_t count() const { return order_.size(); }
    const std::vector<std::string>& strings() const { return order_; }

private:
    std::map<std::string, std::size_t> ids_;
    std::vector<std::string> order_;
};

bool needs_preserve(const std::string& s) {
    return !s.empty() && (s.front() == ' ' || s.back() == ' ' || s.find('\n') != std::string::npos);
}

std::string sheet_xml(const Sheet& sheet, StringTable& strings, std::size_t& string_refs) {
    std::string out(kXmlDecl);
    out += "<worksheet xmlns=\"";
    out += kMainNs;
    out += "\" xmlns:r=\"";
    out += kRelNs;
    out += "\"><sheetData>";
    int current_row = 0;
    for (const auto& [coord, rec] : sheet.cells) {
        if (coord.row != current_row) {
            if (current_row) out += "</row>";
            current_row = coord.row;
            out += "<row r=\"" + std::to_string(current_row) + "\">";
        }
        std::string ref = column_letters(coord.column) + std::to_string(coord.row);
        std::string attrs = " r=\"" + ref + "\"";
        std::string body;
        if (rec.formula) {
            std::string_view f(*rec.formula);
            if (!f.empty() && f.front() == '=') f.remove_prefix(1);
            body += "<f>" + detail::xml_escape(f) + "</f>";
        }
        struct Emit {
            std::string& attrs;
            std::string& body;
            StringTable& strings;
            std::size_t& string_refs;
            bool formula;
            void operator()(std::monostate) {}
            void operator()(double d) { body += "<v>" + format_number(d) + "</v>"; }
            void operator()(const std::string& s) {
                if (formula) {
                    attrs += " t=\"str\"";
                    body += "<v>" + detail::xml_escape(s) + "</v>";
                } else {
                    attrs += " t=\"s\"";
                    ++string_refs;
                    body += "<v>" + std::to_string(strings.index(s)) + "</v>";
                }
            }
            void operator()(bool b) {
                attrs += " t=\"b\"";
                body += b ? "<v>1</v>" : "<v>0</v>";
            }
            void operator()(const DateSerial& d) {
                attrs += " s=\"1\"";
                body += "<v>" + format_number(d.serial) + "</v>";
            }
            void operator()(const ErrorCode& e) {
                attrs += " t=\"e\"";
                body += "<v>" + detail::xml_escape(e.code) + "</v>";
            }
        };
        std::visit(Emit{attrs, body, strings, string_refs, rec.is_formula()}, rec.value);
        out += "<c" + attrs + ">" + body + "</c>";
    }
    if (current_row) out += "</row>";
    out += "</sheetData></worksheet>";
    return out;
}

}  // namespace

std::string write_xlsx(const WorkbookModel& model) {
    std::vector<std::pair<std::string, std::string>> members;
    StringTable strings;
    std::size_t string_refs = 0;
    std::vector<std::string> sheet_parts;
    for (const auto& sheet : model.sheets) sheet_parts.push_back(sheet_xml(sheet, strings, string_refs));

    std::string types(kXmlDecl);
    types +=
        "<Types xmlns=\"http://schemas.openxmlformats.org/package/2006/content-types\">"
        "<Default Extension=\"rels\" ContentType=\"application/vnd.openxmlformats-package.relationships+xml\"/>"
        "<Default Extension=\"xml\" ContentType=\"application/xml\"/>"
        "<Override PartName=\"/xl/workbook.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml\"/>"
        "<Override PartName=\"/xl/styles.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.styles+xml\"/>"
        "<Override PartName=\"/xl/sharedStrings.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.sharedStrings+xml\"/>";
    for (std::size_t i = 0; i < model.sheets.size(); ++i) {
        types += "<Override PartName=\"/xl/worksheets/sheet" + std::to_string(i + 1) +
                 ".xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml\"/>";
    }
    types += "</Types>";
    members.emplace_back("[Content_Types].xml", std::move(types));

    std::string root_rels(kXmlDecl);
    root_rels +=
        "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">"
        "<Relationship Id=\"rId1\" Type=\"" + std::string(kRelOfficeDocument) +
        "\" Target=\"xl/workbook.xml\"/></Relationships>";
    members.emplace_back("_rels/.rels", std::move(root_rels));

    std::string wb(kXmlDecl);
    wb += "<workbook xmlns=\"" + std::string(kMainNs) + "\" xmlns:r=\"" + std::string(kRelNs) + "\"><sheets>";
    std::string wb_rels(kXmlDecl);
    wb_rels += "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">";
    for (std::size_t i = 0; i < model.sheets.size(); ++i) {
        std::string n = std::to_string(i + 1);
        wb += "<sheet name=\"" + detail::xml_escape(model.sheets[i].name) + "\" sheetId=\"" + n +
              "\" r:id=\"rId" + n + "\"/>";
        wb_rels += "<Relationship Id=\"rId" + n + "\" Type=\"" + std::string(kRelWorksheet) +
                   "\" Target=\"worksheets/sheet" + n + ".xml\"/>";
    }
    // Formulas may have changed without fresh cached values; ask for a recalculation on open.
    wb += "</sheets><calcPr fullCalcOnLoad=\"1\"/></workbook>";
    std::string n_styles = std::to_string(model.sheets.size() + 1);
    std::string n_strings = std::to_string(model.sheets.size() + 2);
    wb_rels += "<Relationship Id=\"rId" + n_styles + "\" Type=\"" + std::string(kRelStyles) +
               "\" Target=\"styles.xml\"/>";
    wb_rels += "<Relationship Id=\"rId" + n_strings + "\" Type=\"" + std::string(kRelSharedStrings) +
               "\" Target=\"sharedStrings.xml\"/>";
    wb_rels += "</Relationships>";
    members.emplace_back("xl/workbook.xml", std::move(wb));
    members.emplace_back("xl/_rels/workbook.xml.rels", std::move(wb_rels));

    std::string styles(kXmlDecl);
    styles += "<styleSheet xmlns=\"" + std::string(kMainNs) +
              "\">"
              "<fonts count=\"1\"><font><sz val=\"11\"/><name val=\"Calibri\"/></font></fonts>"
              "<fills count=\"2\"><fill><patternFill patternType=\"none\"/></fill>"
              "<fill><patternFill patternType=\"gray125\"/></fill></fills>"
              "<borders count=\"1\"><border><left/><right/><top/><bottom/><diagonal/></border></borders>"
              "<cellStyleXfs count=\"1\"><xf numFmtId=\"0\" fontId=\"0\" fillId=\"0\" borderId=\"0\"/></cellStyleXfs>"
              "<cellXfs count=\"2\"><xf numFmtId=\"0\" fontId=\"0\" fillId=\"0\" borderId=\"0\" xfId=\"0\"/>"
              "<xf numFmtId=\"14\" fontId=\"0\" fillId=\"0\" borderId=\"0\" xfId=\"0\" applyNumberFormat=\"1\"/></cellXfs>"
              "<cellStyles count=\"1\"><cellStyle name=\"Normal\" xfId=\"0\" builtinId=\"0\"/></cellStyles>"
              "</styleSheet>";
    members.emplace_back("xl/styles.xml", std::move(styles));

    std::string sst(kXmlDecl);
    sst += "<sst xmlns=\"" + std::string(kMainNs) + "\" count=\"" + std::to_string(string_refs) +
           "\" uniqueCount=\"" + std::to_string(strings.count()) + "\">";
    for (const auto& s : strings.strings()) {
        sst += needs_preserve(s) ? "<si><t xml:space=\"preserve\">" : "<si><t>";
        sst += detail::xml_escape(s) + "</t></si>";
    }
    sst += "</sst>";
    members.emplace_back("xl/sharedStrings.xml", std::move(sst));

    for (std::size_t i = 0; i < sheet_parts.size(); ++i)
        members.emplace_back("xl/worksheets/sheet" + std::to_string(i + 1) + ".xml", std::move(sheet_parts[i]));
    return detail::zip(members);
}

void save_workbook(const WorkbookModel& model, const std::filesystem::path& path) {
    std::string bytes = write_xlsx(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw IoError("cannot write '" + path.string() + "'");
}

}  // namespace air
