#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "peano/evaluation.hpp"
#include "peano/report_io.hpp"

namespace {

struct FormatOpts {
    std::string io = "Q8.8";
    std::string accum = "Q16.16";
    std::string table = "Q2.14";
};

void add_format_flags(CLI::App* cmd, FormatOpts& f) {
    cmd->add_option("--io-format", f.io, "Activation format, Qi.f (i integer bits incl. sign)");
    cmd->add_option("--accum-format", f.accum, "Accumulator format, Qi.f");
    cmd->add_option("--table-format", f.table, "Table/coefficient format, Qi.f");
}

peano::ApproxParams build_params(int m, int alpha_star, bool lmsr, const FormatOpts& f) {
    peano::ApproxParams p = peano::ApproxParams::with_formats(peano::QFormat::parse(f.io),
                                                              peano::QFormat::parse(f.accum),
                                                              peano::QFormat::parse(f.table));
    p.m = m;
    p.alpha_star = alpha_star;
    p.use_lmsr = lmsr;
    return p;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw peano::Error("cannot open " + path + " for writing");
    }
    out << text;
    out.flush();
    if (!out) {
        throw peano::Error("failed while writing " + path);
    }
}

struct SweepOpts {
    std::string fn;
    double lo = 0.0;
    double hi = 0.0;
    std::string sampling = "grid";
    long points = 100000;
    double step = 0.0;
    long count = 1000;
    std::uint64_t seed = 0;
    int cols = 197;
    int m = 4;
    int alpha_star = 4;
    bool lmsr = false;
    std::string precision = "real";
    std::string format = "csv";
    std::string out;
    int threads = 1;
    FormatOpts formats;
};

peano::SweepFunction parse_fn(const std::string& name) {
    if (name == "recip-sqrt") return peano::SweepFunction::RecipSqrt;
    if (name == "reciprocal") return peano::SweepFunction::Reciprocal;
    if (name == "exp") return peano::SweepFunction::Exp;
    if (name == "gelu") return peano::SweepFunction::Gelu;
    if (name == "softmax-row") return peano::SweepFunction::SoftmaxRow;
    if (name == "layernorm-row") return peano::SweepFunction::LayerNormRow;
    throw peano::Error("unknown function: " + name);
}

std::string auto_label(const peano::SweepSpec& spec) {
    switch (spec.function) {
        case peano::SweepFunction::RecipSqrt:
        case peano::SweepFunction::LayerNormRow:
            return "m=" + std::to_string(spec.params.m);
        case peano::SweepFunction::Reciprocal:
        case peano::SweepFunction::Exp:
        case peano::SweepFunction::SoftmaxRow:
            return "alpha*=" + std::to_string(spec.params.alpha_star) +
                   (spec.params.use_lmsr ? " LMSR" : " MSR");
        case peano::SweepFunction::Gelu:
            return std::to_string(spec.params.gelu.segment_count()) + " segments";
    }
    return {};
}

void run_sweep_cmd(const SweepOpts& o) {
    peano::SweepSpec spec;
    spec.function = parse_fn(o.fn);
    spec.lo = o.lo;
    spec.hi = o.hi;
    if (o.sampling == "grid") {
        spec.sampling = o.step > 0.0 ? peano::Sampling::grid_step(o.step)
                                     : peano::Sampling::grid(o.points);
    } else if (o.sampling == "integers") {
        spec.sampling = peano::Sampling::integers();
    } else {
        spec.sampling = peano::Sampling::random(o.count, o.seed);
    }
    spec.params = build_params(o.m, o.alpha_star, o.lmsr, o.formats);
    spec.precision = o.precision == "fixed" ? peano::PrecisionMode::FixedPoint
                                            : peano::PrecisionMode::RealArithmetic;
    spec.row_length = o.cols;
    spec.label = auto_label(spec);

    const peano::SweepReport report = peano::run_sweep(spec, o.threads);
    std::printf("fn=%s mse=%.6e max_err=%.6e\n", peano::sweep_function_name(spec.function),
                report.mse, report.max_abs_err);

    const std::string text =
        peano::format_sweep_report(report, peano::parse_report_format(o.format));
    if (o.out.empty()) {
        std::cout << text;
    } else {
        write_file(o.out, text);
    }
}

struct Table4Opts {
    std::string format = "markdown_table";
    std::string out;
    long points = 100000;
    int threads = 1;
    FormatOpts formats;
};

void run_table4_cmd(const Table4Opts& o) {
    peano::Table4Options options;
    options.grid_points = o.points;
    options.threads = o.threads;
    options.io_format = peano::QFormat::parse(o.formats.io);
    options.accum_format = peano::QFormat::parse(o.formats.accum);
    options.table_format = peano::QFormat::parse(o.formats.table);
    const std::vector<peano::SweepReport> reports = peano::table4_suite(options);
    const std::string text = peano::format_table(reports, peano::parse_report_format(o.format));
    std::cout << text;
    if (!o.out.empty()) {
        write_file(o.out, text);
    }
}

struct LayerCompareOpts {
    std::string layer;
    int rows = 8;
    int cols = 197;
    std::uint64_t seed = 0;
    int m = 4;
    int alpha_star = 4;
    bool lmsr = false;
    int threads = 1;
    std::string out;
    FormatOpts formats;
};

void run_layer_compare_cmd(const LayerCompareOpts& o) {
    const peano::ApproxParams params = build_params(o.m, o.alpha_star, o.lmsr, o.formats);
    const peano::Tensor2D tensor =
        peano::random_normal_tensor(o.rows, o.cols, o.seed, params.io_format);
    peano::LayerKind kind = peano::LayerKind::Softmax;
    if (o.layer == "layernorm") {
        kind = peano::LayerKind::LayerNorm;
    } else if (o.layer == "gelu") {
        kind = peano::LayerKind::Gelu;
    }
    const peano::LayerCompareReport report =
        peano::layer_compare(tensor, kind, params, o.threads);
    const std::string text = peano::format_layer_compare_text(report);
    std::cout << text;
    if (!o.out.empty()) {
        write_file(o.out, text);
    }
}

struct DumpLutsOpts {
    int m = 4;
    int alpha_star = 4;
    std::string table_format = "Q2.14";
    std::string out_dir = ".";
};

void run_dump_luts_cmd(const DumpLutsOpts& o) {
    const peano::QFormat fmt = peano::QFormat::parse(o.table_format);
    const peano::Pow2FracTable pow2 = peano::build_pow2_table(o.m, fmt);
    const peano::RecipTable recip = peano::build_recip_table(o.alpha_star, fmt);
    const std::filesystem::path dir(o.out_dir);
    const std::string pow2_path = (dir / ("fracpow2_m" + std::to_string(o.m) + ".txt")).string();
    const std::string recip_path =
        (dir / ("storedrecip_a" + std::to_string(o.alpha_star) + ".txt")).string();
    write_file(pow2_path, peano::lut_file_text(pow2.entries, fmt));
    write_file(recip_path, peano::lut_file_text(recip.entries, fmt));
    std::cout << pow2_path << "\n" << recip_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Division-free fixed-point kernels for layer norm, softmax, and GELU"};
    app.require_subcommand(1);

    SweepOpts sweep_opts;
    CLI::App* sweep = app.add_subcommand("sweep", "Sweep one approximation against its oracle");
    sweep->add_option("--fn", sweep_opts.fn, "Function to sweep")
        ->required()
        ->check(CLI::IsMember(
            {"recip-sqrt", "reciprocal", "exp", "gelu", "softmax-row", "layernorm-row"}));
    sweep->add_option("--lo", sweep_opts.lo, "Interval lower bound")->required();
    sweep->add_option("--hi", sweep_opts.hi, "Interval upper bound")->required();
    sweep->add_option("--sampling", sweep_opts.sampling, "Sampling scheme")
        ->check(CLI::IsMember({"grid", "integers", "random"}));
    sweep->add_option("--points", sweep_opts.points, "Grid point count")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--step", sweep_opts.step, "Grid step (overrides --points)");
    sweep->add_option("--count", sweep_opts.count, "Random sample / row count")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--seed", sweep_opts.seed, "Random sampling seed");
    sweep->add_option("--cols", sweep_opts.cols, "Row length for row functions")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--m", sweep_opts.m, "Pow2 table fraction bits")->check(CLI::PositiveNumber);
    sweep->add_option("--alpha-star", sweep_opts.alpha_star, "Reciprocal table threshold")
        ->check(CLI::PositiveNumber);
    sweep->add_flag("--lmsr", sweep_opts.lmsr, "Interpolated reciprocal");
    sweep->add_option("--precision", sweep_opts.precision, "Arithmetic mode")
        ->check(CLI::IsMember({"real", "fixed"}));
    sweep->add_option("--format", sweep_opts.format, "Report format")
        ->check(CLI::IsMember({"csv", "markdown_table", "json_lines"}));
    sweep->add_option("--out", sweep_opts.out, "Report file path");
    sweep->add_option("--threads", sweep_opts.threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    add_format_flags(sweep, sweep_opts.formats);
    sweep->callback([&] { run_sweep_cmd(sweep_opts); });

    Table4Opts table4_opts;
    CLI::App* table4 = app.add_subcommand("table4", "Run the standard accuracy suite");
    table4->add_option("--format", table4_opts.format, "Report format")
        ->check(CLI::IsMember({"csv", "markdown_table", "json_lines"}));
    table4->add_option("--out", table4_opts.out, "Report file path");
    table4->add_option("--points", table4_opts.points, "Grid point count")
        ->check(CLI::PositiveNumber);
    table4->add_option("--threads", table4_opts.threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    add_format_flags(table4, table4_opts.formats);
    table4->callback([&] { run_table4_cmd(table4_opts); });

    LayerCompareOpts lc_opts;
    CLI::App* lc = app.add_subcommand("layer-compare",
                                      "Compare a fixed-point layer against its reference");
    lc->add_option("--layer", lc_opts.layer, "Layer to compare")
        ->required()
        ->check(CLI::IsMember({"layernorm", "softmax", "gelu"}));
    lc->add_option("--rows", lc_opts.rows, "Row count")->check(CLI::PositiveNumber);
    lc->add_option("--cols", lc_opts.cols, "Column count")->check(CLI::PositiveNumber);
    lc->add_option("--seed", lc_opts.seed, "Tensor seed");
    lc->add_option("--m", lc_opts.m, "Pow2 table fraction bits")->check(CLI::PositiveNumber);
    lc->add_option("--alpha-star", lc_opts.alpha_star, "Reciprocal table threshold")
        ->check(CLI::PositiveNumber);
    lc->add_flag("--lmsr", lc_opts.lmsr, "Interpolated reciprocal");
    lc->add_option("--threads", lc_opts.threads, "Worker threads")->check(CLI::PositiveNumber);
    lc->add_option("--out", lc_opts.out, "Stats file path");
    add_format_flags(lc, lc_opts.formats);
    lc->callback([&] { run_layer_compare_cmd(lc_opts); });

    DumpLutsOpts dump_opts;
    CLI::App* dump = app.add_subcommand("dump-luts", "Write lookup table contents as hex text");
    dump->add_option("--m", dump_opts.m, "Pow2 table fraction bits")->check(CLI::PositiveNumber);
    dump->add_option("--alpha-star", dump_opts.alpha_star, "Reciprocal table threshold")
        ->check(CLI::PositiveNumber);
    dump->add_option("--table-format", dump_opts.table_format, "Entry format, Qi.f");
    dump->add_option("--out-dir", dump_opts.out_dir, "Output directory");
    dump->callback([&] { run_dump_luts_cmd(dump_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const peano::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
