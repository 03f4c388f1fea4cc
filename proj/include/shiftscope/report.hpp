/// @file report.hpp
/// @brief JSON, table and CSV renderings of test reports.
///
/// Time fields all end in "elapsed_seconds" so callers comparing two
/// reports can drop them by name.

#pragma once

#include <string>

#include "shiftscope/detector.hpp"

namespace shiftscope::report {

enum class Format { kJson, kTable, kCsv };

/// "json", "table" or "csv"; anything else throws ConfigError.
Format parse_format(std::string_view name);

std::string render(const ShiftReport& r, Format format);
std::string render(const PerturbationReport& r, Format format);

}  // namespace shiftscope::report
