#include "peano/report_io.hpp"

#include <cstdio>

#include <json.hpp>

namespace peano {

namespace {

std::string num(double v, const char* spec = "%.9e") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string interval_text(const SweepReport& r) {
    return "[" + num(r.spec.lo, "%.9g") + "," + num(r.spec.hi, "%.9g") + "]";
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string quoted = "\"";
    for (const char c : text) {
        if (c == '"') {
            quoted += '"';
        }
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
    if (name == "csv") {
        return ReportFormat::Csv;
    }
    if (name == "markdown_table") {
        return ReportFormat::MarkdownTable;
    }
    if (name == "json_lines") {
        return ReportFormat::JsonLines;
    }
    throw Error("unknown report format: " + std::string(name));
}

std::string format_table(std::span<const SweepReport> reports, ReportFormat format) {
    std::string out;
    switch (format) {
        case ReportFormat::Csv:
            out = "function,interval,parameter,mse\n";
            for (const SweepReport& r : reports) {
                out += csv_field(sweep_function_name(r.spec.function)) + "," +
                       csv_field(interval_text(r)) + "," + csv_field(r.spec.label) + "," +
                       num(r.mse) + "\n";
            }
            break;
        case ReportFormat::MarkdownTable:
            out = "| Function | Interval | Parameter | MSE |\n| --- | --- | --- | --- |\n";
            for (const SweepReport& r : reports) {
                out += std::string("| ") + sweep_function_name(r.spec.function) + " | " +
                       interval_text(r) + " | " + r.spec.label + " | " + num(r.mse) + " |\n";
            }
            break;
        case ReportFormat::JsonLines:
            for (const SweepReport& r : reports) {
                nlohmann::json j;
                j["function"] = sweep_function_name(r.spec.function);
                j["interval"] = {r.spec.lo, r.spec.hi};
                j["parameter"] = r.spec.label;
                j["mse"] = r.mse;
                out += j.dump() + "\n";
            }
            break;
    }
    return out;
}

std::string format_sweep_report(const SweepReport& r, ReportFormat format) {
    const std::string fn = sweep_function_name(r.spec.function);
    const std::string sampling = sampling_descriptor(r.spec.sampling);
    const std::string precision = precision_mode_name(r.spec.precision);
    switch (format) {
        case ReportFormat::Csv:
            return "function,lo,hi,sampling,precision,parameter,mse,max_abs_err,argmax_err,"
                   "samples\n" +
                   csv_field(fn) + "," + num(r.spec.lo, "%.9g") + "," + num(r.spec.hi, "%.9g") +
                   "," + csv_field(sampling) + "," + precision + "," + csv_field(r.spec.label) +
                   "," + num(r.mse) + "," + num(r.max_abs_err) + "," + num(r.argmax_err, "%.9g") +
                   "," + std::to_string(r.sample_count) + "\n";
        case ReportFormat::MarkdownTable:
            return "| Field | Value |\n| --- | --- |\n| function | " + fn + " |\n| interval | " +
                   interval_text(r) + " |\n| sampling | " + sampling + " |\n| precision | " +
                   precision + " |\n| parameter | " + r.spec.label + " |\n| mse | " + num(r.mse) +
                   " |\n| max_abs_err | " + num(r.max_abs_err) + " |\n| argmax_err | " +
                   num(r.argmax_err, "%.9g") + " |\n| samples | " +
                   std::to_string(r.sample_count) + " |\n";
        case ReportFormat::JsonLines: {
            nlohmann::json j;
            j["function"] = fn;
            j["interval"] = {r.spec.lo, r.spec.hi};
            j["sampling"] = sampling;
            j["precision"] = precision;
            j["parameter"] = r.spec.label;
            j["mse"] = r.mse;
            j["max_abs_err"] = r.max_abs_err;
            j["argmax_err"] = r.argmax_err;
            j["samples"] = r.sample_count;
            return j.dump() + "\n";
        }
    }
    return {};
}

std::string format_layer_compare_text(const LayerCompareReport& r) {
    std::string out = std::string("layer=") + layer_kind_name(r.layer) +
                      " rows=" + std::to_string(r.rows) + " cols=" + std::to_string(r.cols) +
                      "\n";
    out += "mse=" + num(r.mse) + "\n";
    out += "max_abs_err=" + num(r.max_abs_err) + "\n";
    if (r.layer == LayerKind::Softmax) {
        out += "sum_dev_min=" + num(r.sumdev_min) + " sum_dev_mean=" + num(r.sumdev_mean) +
               " sum_dev_max=" + num(r.sumdev_max) + " sum_dev_max_abs=" +
               num(r.sumdev_max_abs) + "\n";
    }
    return out;
}

std::string lut_file_text(std::span<const FixedPoint> entries, QFormat fmt) {
    const int digits = (fmt.total_bits + 3) / 4;
    const std::uint64_t mask =
        fmt.total_bits == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << fmt.total_bits) - 1;
    std::string out = "# format=" + fmt.to_string() + " entries=" +
                      std::to_string(entries.size()) + "\n";
    char buf[32];
    for (const FixedPoint& e : entries) {
        std::snprintf(buf, sizeof(buf), "0x%0*llx", digits,
                      static_cast<unsigned long long>(static_cast<std::uint64_t>(e.raw()) & mask));
        out += buf;
        out += '\n';
    }
    return out;
}

}  // namespace peano
