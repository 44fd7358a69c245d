#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace air::detail {

/// Reads every member of a ZIP archive (stored or deflated; no ZIP64).
/// Throws IoError on a corrupt archive.
std::map<std::string, std::string> unzip(std::string_view archive);

/// Builds a deflated ZIP archive from (name, bytes) members in order.
std::string zip(const std::vector<std::pair<std::string, std::string>>& members);

}  // namespace air::detail
