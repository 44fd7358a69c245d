#include "xml.hpp"

#include <expat.h>

#include "air/error.hpp"

namespace air::detail {

const XmlElement* XmlElement::child(std::string_view local) const {
    for (const auto& c : children) {
        if (c->name == local) return c.get();
    }
    return nullptr;
}

std::vector<const XmlElement*> XmlElement::children_named(std::string_view local) const {
    std::vector<const XmlElement*> out;
    for (const auto& c : children) {
        if (c->name == local) out.push_back(c.get());
    }
    return out;
}

const std::string* XmlElement::attribute(std::string_view local) const {
    auto it = attributes.find(std::string(local));
    return it == attributes.end() ? nullptr : &it->second;
}

std::string XmlElement::deep_text() const {
    std::string out = text;
    for (const auto& c : children) out += c->deep_text();
    return out;
}

namespace {

constexpr char kNsSeparator = '\x01';

std::string local_name(const char* qualified) {
    std::string_view q(qualified);
    auto sep = q.rfind(kNsSeparator);
    return std::string(sep == std::string_view::npos ? q : q.substr(sep + 1));
}

struct Builder {
    std::unique_ptr<XmlElement> root;
    std::vector<XmlElement*> stack;
};

void on_start(void* user, const XML_Char* name, const XML_Char** atts) {
    auto* b = static_cast<Builder*>(user);
    auto el = std::make_unique<XmlElement>();
    el->name = local_name(name);
    for (int i = 0; atts[i]; i += 2) el->attributes[local_name(atts[i])] = atts[i + 1];
    XmlElement* raw = el.get();
    if (b->stack.empty()) {
        b->root = std::move(el);
    } else {
        b->stack.back()->children.push_back(std::move(el));
    }
    b->stack.push_back(raw);
}

void on_end(void* user, const XML_Char*) { static_cast<Builder*>(user)->stack.pop_back(); }

void on_text(void* user, const XML_Char* s, int len) {
    auto* b = static_cast<Builder*>(user);
    if (!b->stack.empty()) b->stack.back()->text.append(s, std::size_t(len));
}

}  // namespace

std::unique_ptr<XmlElement> parse_xml(std::string_view document, const std::string& part) {
    XML_Parser parser = XML_ParserCreateNS(nullptr, kNsSeparator);
    if (!parser) throw IoError("cannot create XML parser");
    Builder b;
    XML_SetUserData(parser, &b);
    XML_SetElementHandler(parser, on_start, on_end);
    XML_SetCharacterDataHandler(parser, on_text);
    auto status = XML_Parse(parser, document.data(), int(document.size()), XML_TRUE);
    if (status != XML_STATUS_OK) {
        std::string msg = "malformed XML in workbook part '" + part + "': " +
                          XML_ErrorString(XML_GetErrorCode(parser)) + " at line " +
                          std::to_string(XML_GetCurrentLineNumber(parser));
        XML_ParserFree(parser);
        throw IoError(msg);
    }
    XML_ParserFree(parser);
    if (!b.root) throw IoError("empty XML in workbook part '" + part + "'");
    return std::move(b.root);
}

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\r': out += "&#13;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace air::detail
