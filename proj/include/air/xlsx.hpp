#pragma once

#include <filesystem>

#include "air/workbook.hpp"

namespace air {

/// Reads an XLSX (Office Open XML) workbook. Shared formulas and shared
/// strings are expanded; formula cells keep their cached values; cells styled
/// with a date number format load as DateSerial. Throws IoError.
WorkbookModel load_workbook(const std::filesystem::path& path);

/// Writes `model` as a fresh XLSX package. Styles other than the date format,
/// charts, defined names and other parts are not written. Throws IoError.
void save_workbook(const WorkbookModel& model, const std::filesystem::path& path);

/// In-memory variants used by the file functions.
WorkbookModel read_xlsx(std::string_view bytes, const std::filesystem::path& origin = {});
std::string write_xlsx(const WorkbookModel& model);

}  // namespace air
