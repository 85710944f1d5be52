#pragma once

#include <span>
#include <string>

#include "peano/evaluation.hpp"
#include "peano/tables.hpp"

namespace peano {

enum class ReportFormat { Csv, MarkdownTable, JsonLines };

ReportFormat parse_report_format(std::string_view name);  // csv | markdown_table | json_lines

// Four columns in fixed order: function, interval, parameter, mse.
std::string format_table(std::span<const SweepReport> reports, ReportFormat format);

// Full single-sweep record (interval, sampling, precision, errors, argmax).
std::string format_sweep_report(const SweepReport& report, ReportFormat format);

std::string format_layer_compare_text(const LayerCompareReport& report);

// One hex mantissa per line, ascending index, after a  "# format=... entries=..."
// header. Mantissas are zero-padded to the format width, lowercase.
std::string lut_file_text(std::span<const FixedPoint> entries, QFormat fmt);

}  // namespace peano
