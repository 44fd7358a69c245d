#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace air::detail {

/// Minimal element tree. Names are namespace-local ("c", not "x:c"); the
/// same goes for attribute names ("id" for r:id).
struct XmlElement {
    std::string name;
    std::map<std::string, std::string> attributes;
    std::vector<std::unique_ptr<XmlElement>> children;
    std::string text;  // concatenated character data directly inside this element

    const XmlElement* child(std::string_view local) const;
    std::vector<const XmlElement*> children_named(std::string_view local) const;
    const std::string* attribute(std::string_view local) const;
    /// Text of this element and all descendants, in document order.
    std::string deep_text() const;
};

/// Throws IoError naming `part` on malformed XML.
std::unique_ptr<XmlElement> parse_xml(std::string_view document, const std::string& part);

std::string xml_escape(std::string_view s);

}  // namespace air::detail
