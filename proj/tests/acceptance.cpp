// Acceptance suite. Runs every release criterion at its pinned tolerance and
// prints one pass/fail line per criterion. An optional argument filters by
// criterion id prefix ("1", "3", "3d", ...). Exit code 0 iff everything
// selected passed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "peano/evaluation.hpp"
#include "peano/report_io.hpp"
#include "peano/rng.hpp"

using namespace peano;

namespace {

int g_failures = 0;
std::string g_filter;

bool selected(const char* id) {
    return g_filter.empty() || std::string(id).rfind(g_filter, 0) == 0;
}

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("[%s] %s %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    if (!pass) {
        ++g_failures;
    }
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

bool within_factor(double measured, double pinned, double factor) {
    return measured <= pinned * factor && measured >= pinned / factor;
}

// ---------------------------------------------------------------------------
// 1 + 2: reference-accuracy table and its ordering
// ---------------------------------------------------------------------------

void criteria_1_and_2() {
    if (!selected("1") && !selected("2")) {
        return;
    }
    const auto start = std::chrono::steady_clock::now();
    Table4Options options;
    options.threads = 8;
    const std::vector<SweepReport> rows = table4_suite(options);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (selected("1")) {
        struct Pin {
            int row;
            double value;
            double factor;
        };
        // rsqrt m=3,4,5; reciprocal MSR a*=4,5; LMSR a*=4,5 (looser band:
        // the published sampling scheme is unknown); gelu handled separately.
        const Pin pins[] = {{0, 4.93e-5, 2.0}, {1, 9.56e-6, 2.0}, {2, 7.86e-6, 2.0},
                            {3, 4.19e-6, 2.0}, {4, 4.03e-6, 2.0}, {5, 3.63e-9, 3.0},
                            {6, 3.58e-9, 3.0}};
        bool pass = true;
        std::string detail;
        for (const Pin& p : pins) {
            const double mse = rows[p.row].mse;
            if (!within_factor(mse, p.value, p.factor)) {
                pass = false;
                detail += " " + rows[p.row].spec.label + " mse=" + fmt("%.3e", mse) +
                          " outside factor " + fmt("%.0f", p.factor) + " of " +
                          fmt("%.2e", p.value) + ";";
            }
        }
        const double gelu = rows[7].mse;
        if (std::abs(gelu / 2.65e-4 - 1.0) > 0.10) {
            pass = false;
            detail += " gelu 7-segment mse=" + fmt("%.3e", gelu) + " not within 10% of 2.65e-4;";
        }
        if (seconds >= 10.0) {
            pass = false;
            detail += " suite took " + fmt("%.1f", seconds) + " s;";
        }
        if (pass) {
            detail = "8 reference rows within tolerance, gelu mse=" + fmt("%.4e", gelu) +
                     ", suite " + fmt("%.2f", seconds) + " s";
        }
        report("1", pass, "reference-accuracy reproduction: " + detail);
    }

    if (selected("2")) {
        const bool pass = rows[0].mse > rows[1].mse && rows[1].mse > rows[2].mse &&
                          rows[3].mse > rows[5].mse && rows[4].mse > rows[6].mse;
        report("2", pass,
               "monotone ordering: m 4.9e-5>9.6e-6>7.8e-6 and MSR>LMSR at both alpha*: " +
                   fmt("%.3e", rows[0].mse) + " > " + fmt("%.3e", rows[1].mse) + " > " +
                   fmt("%.3e", rows[2].mse));
    }
}

// ---------------------------------------------------------------------------
// 3: property suite standing in for model-level accuracy
// ---------------------------------------------------------------------------

void criterion_3a() {
    if (!selected("3a")) {
        return;
    }
    // Pinned regression bound, measured once by brute force over this exact
    // configuration: 100 batches of 1000 rows, n=197 standard-normal logits,
    // batch b seeded with 1000+b, alpha*=4, MSR, fixed point. The deviation
    // is dominated by per-element output truncation (~n * 2^-9 at Q8.8
    // outputs whose values sit near 1/n); the reciprocal flooring itself
    // contributes at most 2^-alpha*.
    const double kPinnedDelta = 0.4300;
    const ApproxParams params;
    double delta = 0.0;
    for (int batch = 0; batch < 100; ++batch) {
        const Tensor2D t =
            random_normal_tensor(1000, 197, 1000 + static_cast<std::uint64_t>(batch),
                                 params.io_format);
        const LayerCompareReport r = layer_compare(t, LayerKind::Softmax, params, 8);
        delta = std::max(delta, r.sumdev_max_abs);
    }
    report("3a", delta <= kPinnedDelta,
           "softmax near-normalization over 1e5 rows: max |sum-1| = " + fmt("%.4f", delta) +
               " <= pinned " + fmt("%.4f", kPinnedDelta));
}

void criterion_3b() {
    if (!selected("3b")) {
        return;
    }
    const ApproxParams params;
    const Kernels k(params);
    std::mt19937_64 gen(42);
    long inversions = 0;
    const int cols = 64;
    std::vector<std::int64_t> in(cols);
    std::vector<std::int64_t> out(cols);
    for (int row = 0; row < 10000; ++row) {
        for (int c = 0; c < cols; ++c) {
            in[c] = quantize(rng::normal(gen), params.io_format, Rounding::Nearest).raw();
        }
        softmax_row(k, in, out);
        for (int i = 0; i < cols; ++i) {
            for (int j = i + 1; j < cols; ++j) {
                const bool inverted = (in[i] > in[j] && out[i] < out[j]) ||
                                      (in[j] > in[i] && out[j] < out[i]);
                if (inverted) {
                    ++inversions;
                }
            }
        }
    }
    report("3b", inversions == 0,
           "softmax order preservation on 1e4 rows: " + std::to_string(inversions) +
               " inversions");
}

void criterion_3c() {
    if (!selected("3c")) {
        return;
    }
    const ApproxParams params;
    const Kernels k(params);
    std::mt19937_64 gen(43);
    const int cols = 197;
    std::vector<std::int64_t> base(cols);
    std::vector<std::int64_t> shifted(cols);
    std::vector<std::int64_t> out_a(cols);
    std::vector<std::int64_t> out_b(cols);
    long mismatches = 0;
    for (int pair = 0; pair < 1000; ++pair) {
        const std::int64_t c_raw = static_cast<std::int64_t>(gen() % 1025) - 512;  // [-2, 2]
        for (int c = 0; c < cols; ++c) {
            base[c] = static_cast<std::int64_t>(gen() % 1537) - 768;  // [-3, 3]
            shifted[c] = base[c] + c_raw;
        }
        softmax_row(k, base, out_a);
        softmax_row(k, shifted, out_b);
        if (out_a != out_b) {
            ++mismatches;
        }
    }
    report("3c", mismatches == 0,
           "softmax shift invariance bit-exact on 1e3 pairs: " + std::to_string(mismatches) +
               " mismatches");
}

void criterion_3d() {
    if (!selected("3d")) {
        return;
    }
    const PiecewiseLinear pw = PiecewiseLinear::gelu7(QFormat{16, 8}, QFormat{16, 14});
    double worst = 0.0;
    double worst_bp = 0.0;
    for (const double b : pw.breakpoints()) {
        const double seam = std::abs(pw.eval_real(std::nextafter(b, -10.0)) - pw.eval_real(b));
        if (seam > worst) {
            worst = seam;
            worst_bp = b;
        }
    }
    report("3d", worst <= 1e-4,
           "gelu breakpoint continuity <= 1e-4: worst seam " + fmt("%.3e", worst) + " at x=" +
               fmt("%.2f", worst_bp));
}

void criterion_3e() {
    if (!selected("3e")) {
        return;
    }
    const QFormat accum{32, 16};
    const Pow2FracTable table = build_pow2_table(4, QFormat{16, 14});
    bool pass = true;
    for (int k = -3; k <= 6; ++k) {
        const FixedPoint x = quantize(std::ldexp(1.0, 2 * k), accum);
        if (recip_sqrt(x, table, accum).value() != std::ldexp(1.0, -k)) {
            pass = false;
        }
        if (realmode::recip_sqrt(std::ldexp(1.0, 2 * k), 4) != std::ldexp(1.0, -k)) {
            pass = false;
        }
    }
    report("3e", pass, "recip_sqrt exact on x = 4^k for k in [-3, 6]");
}

void criterion_3f() {
    if (!selected("3f")) {
        return;
    }
    const QFormat table_fmt{16, 14};
    const RecipTable table = build_recip_table(4, table_fmt);
    bool pass = true;
    for (int i = 1; i <= 31; ++i) {
        const FixedPoint out = msr_recip(quantize(static_cast<double>(i), QFormat{32, 16}), table);
        if (out.raw() != quantize(1.0 / i, table_fmt, Rounding::Nearest).raw()) {
            pass = false;
        }
    }
    report("3f", pass, "msr_recip exact table hits for all integers in [1, 31]");
}

// ---------------------------------------------------------------------------
// 4: worked examples
// ---------------------------------------------------------------------------

void criterion_4() {
    if (!selected("4")) {
        return;
    }
    const QFormat io{16, 8};
    const QFormat accum{32, 16};
    const QFormat table_fmt{16, 14};
    const RecipTable table = build_recip_table(4, table_fmt);
    bool pass = true;
    std::string detail;

    // msr_recip(59) = (1/29) >> 1, bit for bit
    const FixedPoint via_kernel = msr_recip(quantize(59.0, io), table);
    const FixedPoint direct = shift(quantize(1.0 / 29.0, table_fmt, Rounding::Nearest), -1);
    if (via_kernel.raw() != direct.raw()) {
        pass = false;
        detail += " msr(59) != (1/29)>>1;";
    }

    // peano_exp gates to zero strictly below -3
    for (std::int64_t raw = -8 * 256; raw < -3 * 256; ++raw) {
        if (peano_exp(FixedPoint(raw, io), table, false, accum).raw() != 0) {
            pass = false;
            detail += " peano_exp nonzero below -3;";
            break;
        }
    }
    if (realmode::peano_exp(-3.0000001, 4, false) != 0.0 ||
        realmode::peano_exp(-3.0, 4, false) == 0.0) {
        pass = false;
        detail += " realmode gate boundary wrong;";
    }

    // pade_exp(0) = 1 exactly
    if (realmode::pade_exp(0.0, 4, false) != 1.0) {
        pass = false;
        detail += " realmode pade_exp(0) != 1;";
    }
    const FixedPoint at0 = pade_exp(quantize(0.0, io), table, false, accum);
    if (to_format(at0, io, Rounding::Nearest).raw() != quantize(1.0, io).raw()) {
        pass = false;
        detail += " fixed pade_exp(0) != 1 at nearest I/O rounding;";
    }

    report("4", pass,
           pass ? "worked examples: msr(59)=(1/29)>>1 bit-exact, exp gate, pade_exp(0)=1"
                : "worked examples:" + detail);
}

// ---------------------------------------------------------------------------
// 5: determinism across runs and thread counts
// ---------------------------------------------------------------------------

void criterion_5() {
    if (!selected("5")) {
        return;
    }
    Table4Options options;
    const std::string t_run1 = format_table(table4_suite(options), ReportFormat::Csv);
    const std::string t_run2 = format_table(table4_suite(options), ReportFormat::Csv);
    options.threads = 8;
    const std::string t_par = format_table(table4_suite(options), ReportFormat::Csv);

    const ApproxParams params;
    const Tensor2D t = random_normal_tensor(64, 197, 7, params.io_format);
    const std::string lc_run1 =
        format_layer_compare_text(layer_compare(t, LayerKind::Softmax, params, 1));
    const std::string lc_run2 =
        format_layer_compare_text(layer_compare(t, LayerKind::Softmax, params, 1));
    const std::string lc_par =
        format_layer_compare_text(layer_compare(t, LayerKind::Softmax, params, 8));

    const bool pass = t_run1 == t_run2 && t_run1 == t_par && lc_run1 == lc_run2 &&
                      lc_run1 == lc_par;
    report("5", pass, "byte-identical table4 and layer_compare output across runs and threads {1,8}");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) {
        g_filter = argv[1];
    }
    criteria_1_and_2();
    criterion_3a();
    criterion_3b();
    criterion_3c();
    criterion_3d();
    criterion_3e();
    criterion_3f();
    criterion_4();
    criterion_5();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all selected criteria passed\n");
    return 0;
}
