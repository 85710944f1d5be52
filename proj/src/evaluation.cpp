#include "peano/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "peano/rng.hpp"

namespace peano {

namespace {

constexpr long kChunk = 8192;

// Runs body(chunk_index, begin, end) over [0, n) in fixed-size chunks. The
// chunk layout is independent of the thread count, so per-chunk results can
// be reduced in chunk order for bit-identical output.
void parallel_chunks(long n, int threads, const std::function<void(long, long, long)>& body) {
    const long chunks = (n + kChunk - 1) / kChunk;
    if (threads <= 1 || chunks <= 1) {
        for (long c = 0; c < chunks; ++c) {
            body(c, c * kChunk, std::min(n, (c + 1) * kChunk));
        }
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            for (long c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
                body(c, c * kChunk, std::min(n, (c + 1) * kChunk));
            }
        } catch (...) {
            const std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) {
                failure = std::current_exception();
            }
            next.store(chunks);
        }
    };
    const int pool_size = static_cast<int>(std::min<long>(threads, chunks));
    std::vector<std::thread> pool;
    pool.reserve(pool_size);
    for (int i = 0; i < pool_size; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

struct ErrorAccum {
    double sum_sq = 0.0;
    double max_abs = -1.0;
    double arg = 0.0;
    long count = 0;

    void feed(double input, double approx, double oracle) {
        const double err = approx - oracle;
        sum_sq += err * err;
        const double abs_err = std::abs(err);
        if (abs_err > max_abs) {
            max_abs = abs_err;
            arg = input;
        }
        ++count;
    }

    void merge(const ErrorAccum& other) {
        sum_sq += other.sum_sq;
        if (other.max_abs > max_abs) {
            max_abs = other.max_abs;
            arg = other.arg;
        }
        count += other.count;
    }
};

std::vector<double> build_samples(const SweepSpec& spec) {
    if (!(spec.lo < spec.hi)) {
        throw EmptyIntervalError("sweep interval is empty");
    }
    const Sampling& s = spec.sampling;
    std::vector<double> samples;
    switch (s.kind) {
        case SamplingKind::Grid: {
            long count = s.count;
            if (s.step > 0.0) {
                count = static_cast<long>(std::floor((spec.hi - spec.lo) / s.step)) + 1;
            }
            if (count < 1) {
                throw Error("sweep: grid needs at least one point");
            }
            samples.resize(count);
            if (count == 1) {
                samples[0] = spec.lo;
            } else {
                for (long i = 0; i < count; ++i) {
                    samples[i] = spec.lo + (spec.hi - spec.lo) * static_cast<double>(i) /
                                               static_cast<double>(count - 1);
                }
            }
            break;
        }
        case SamplingKind::Integers: {
            const double first = std::ceil(spec.lo);
            const double last = std::floor(spec.hi);
            if (first > last) {
                throw EmptyIntervalError("sweep: no integers in interval");
            }
            samples.reserve(static_cast<std::size_t>(last - first) + 1);
            for (double v = first; v <= last; v += 1.0) {
                samples.push_back(v);
            }
            break;
        }
        case SamplingKind::Random: {
            if (s.count < 1) {
                throw Error("sweep: random sampling needs count >= 1");
            }
            std::mt19937_64 gen(s.seed);
            samples.resize(s.count);
            for (long i = 0; i < s.count; ++i) {
                samples[i] = rng::uniform(gen, spec.lo, spec.hi);
            }
            break;
        }
    }
    return samples;
}

bool is_row_function(SweepFunction fn) {
    return fn == SweepFunction::SoftmaxRow || fn == SweepFunction::LayerNormRow;
}

SweepReport run_row_sweep(const SweepSpec& spec, int threads) {
    if (spec.sampling.kind != SamplingKind::Random) {
        throw Error("row sweeps use random sampling");
    }
    if (!(spec.lo < spec.hi)) {
        throw EmptyIntervalError("sweep interval is empty");
    }
    const long rows = spec.sampling.count;
    const int cols = spec.row_length;
    if (rows < 1 || cols < 1) {
        throw Error("row sweep needs rows >= 1 and row_length >= 1");
    }

    std::mt19937_64 gen(spec.sampling.seed);
    std::vector<double> values(static_cast<std::size_t>(rows) * cols);
    for (double& v : values) {
        v = rng::uniform(gen, spec.lo, spec.hi);
    }

    const std::vector<double> gamma(cols, 1.0);
    const std::vector<double> beta(cols, 0.0);
    const bool fixed = spec.precision == PrecisionMode::FixedPoint;

    std::shared_ptr<const Kernels> kern;
    std::shared_ptr<const Tensor2D> tensor;
    std::shared_ptr<const LayerNormParams> ln;
    if (fixed) {
        kern = std::make_shared<Kernels>(spec.params);
        tensor = std::make_shared<Tensor2D>(Tensor2D::from_values(
            static_cast<int>(rows), cols, values, spec.params.io_format, Rounding::Nearest));
        ln = std::make_shared<LayerNormParams>(
            LayerNormParams::unit(cols, spec.params));
    }

    const long chunks = (rows + kChunk - 1) / kChunk;
    std::vector<ErrorAccum> partials(chunks);
    parallel_chunks(rows, threads, [&](long chunk, long begin, long end) {
        ErrorAccum acc;
        std::vector<double> xs(cols);
        std::vector<std::int64_t> out(cols);
        for (long r = begin; r < end; ++r) {
            std::vector<double> approx_row;
            if (fixed) {
                const auto in = tensor->row(static_cast<int>(r));
                for (int c = 0; c < cols; ++c) {
                    xs[c] = std::ldexp(static_cast<double>(in[c]),
                                       -spec.params.io_format.frac_bits);
                }
                if (spec.function == SweepFunction::SoftmaxRow) {
                    softmax_row(*kern, in, out);
                } else {
                    layer_norm_row(*kern, in, *ln, out);
                }
                approx_row.resize(cols);
                for (int c = 0; c < cols; ++c) {
                    approx_row[c] = std::ldexp(static_cast<double>(out[c]),
                                               -spec.params.io_format.frac_bits);
                }
            } else {
                const std::span<const double> in(values.data() + static_cast<std::size_t>(r) * cols,
                                                 static_cast<std::size_t>(cols));
                std::copy(in.begin(), in.end(), xs.begin());
                approx_row = spec.function == SweepFunction::SoftmaxRow
                                 ? realmode::softmax_row(in, spec.params)
                                 : realmode::layer_norm_row(in, gamma, beta, spec.params);
            }
            const std::vector<double> oracle_row =
                spec.function == SweepFunction::SoftmaxRow
                    ? reference_softmax(xs)
                    : reference_layer_norm(xs, gamma, beta);
            for (int c = 0; c < cols; ++c) {
                acc.feed(xs[c], approx_row[c], oracle_row[c]);
            }
        }
        partials[chunk] = acc;
    });

    ErrorAccum total;
    for (const ErrorAccum& p : partials) {
        total.merge(p);
    }
    SweepReport report;
    report.spec = spec;
    report.sample_count = total.count;
    report.mse = total.count > 0 ? total.sum_sq / static_cast<double>(total.count) : 0.0;
    report.max_abs_err = std::max(total.max_abs, 0.0);
    report.argmax_err = total.arg;
    return report;
}

}  // namespace

Sampling Sampling::grid(long count) { return {SamplingKind::Grid, count, 0.0, 0}; }
Sampling Sampling::grid_step(double step) { return {SamplingKind::Grid, 0, step, 0}; }
Sampling Sampling::integers() { return {SamplingKind::Integers, 0, 0.0, 0}; }
Sampling Sampling::random(long count, std::uint64_t seed) {
    return {SamplingKind::Random, count, 0.0, seed};
}

SweepReport run_scalar_sweep(const SweepSpec& spec, const std::function<double(double)>& approx,
                             const std::function<double(double)>& oracle, int threads) {
    const std::vector<double> samples = build_samples(spec);
    const long n = static_cast<long>(samples.size());
    const long chunks = (n + kChunk - 1) / kChunk;
    std::vector<ErrorAccum> partials(chunks);
    parallel_chunks(n, threads, [&](long chunk, long begin, long end) {
        ErrorAccum acc;
        for (long i = begin; i < end; ++i) {
            const double x = samples[i];
            acc.feed(x, approx(x), oracle(x));
        }
        partials[chunk] = acc;
    });
    ErrorAccum total;
    for (const ErrorAccum& p : partials) {
        total.merge(p);
    }
    SweepReport report;
    report.spec = spec;
    report.sample_count = total.count;
    report.mse = total.count > 0 ? total.sum_sq / static_cast<double>(total.count) : 0.0;
    report.max_abs_err = std::max(total.max_abs, 0.0);
    report.argmax_err = total.arg;
    return report;
}

SweepReport run_sweep(const SweepSpec& spec, int threads) {
    if (is_row_function(spec.function)) {
        return run_row_sweep(spec, threads);
    }

    std::function<double(double)> approx;
    std::function<double(double)> oracle;
    const ApproxParams& p = spec.params;

    if (spec.precision == PrecisionMode::RealArithmetic) {
        switch (spec.function) {
            case SweepFunction::RecipSqrt:
                approx = [m = p.m](double x) { return realmode::recip_sqrt(x, m); };
                oracle = [](double x) { return 1.0 / std::sqrt(x); };
                break;
            case SweepFunction::Reciprocal:
                approx = [a = p.alpha_star, lmsr = p.use_lmsr](double x) {
                    return lmsr ? realmode::lmsr_recip(x, a) : realmode::msr_recip(x, a);
                };
                oracle = [](double x) { return 1.0 / x; };
                break;
            case SweepFunction::Exp:
                approx = [a = p.alpha_star, lmsr = p.use_lmsr](double x) {
                    return realmode::peano_exp(x, a, lmsr);
                };
                oracle = [](double x) { return std::exp(x); };
                break;
            case SweepFunction::Gelu:
                approx = [g = p.gelu](double x) { return g.eval_real(x); };
                oracle = gelu_exact;
                break;
            default:
                throw Error("unsupported sweep function");
        }
    } else {
        auto kern = std::make_shared<const Kernels>(p);
        // Var and Sum sit in the accumulator format; activations in I/O.
        const bool operand_is_accum = spec.function == SweepFunction::RecipSqrt ||
                                      spec.function == SweepFunction::Reciprocal;
        const QFormat in = operand_is_accum ? p.accum_format : p.io_format;
        const QFormat accum = p.accum_format;
        oracle = [in, fn = spec.function](double x) {
            const double q = quantize(x, in, Rounding::Nearest).value();
            switch (fn) {
                case SweepFunction::RecipSqrt:
                    return 1.0 / std::sqrt(q);
                case SweepFunction::Reciprocal:
                    return 1.0 / q;
                case SweepFunction::Exp:
                    return std::exp(q);
                default:
                    return gelu_exact(q);
            }
        };
        switch (spec.function) {
            case SweepFunction::RecipSqrt:
                approx = [kern, in, accum](double x) {
                    return kern->recip_sqrt(quantize(x, in, Rounding::Nearest), accum).value();
                };
                break;
            case SweepFunction::Reciprocal:
                approx = [kern, in, accum](double x) {
                    return kern->reciprocal(quantize(x, in, Rounding::Nearest), accum).value();
                };
                break;
            case SweepFunction::Exp:
                approx = [kern, in](double x) {
                    return kern->peano_exp(quantize(x, in, Rounding::Nearest)).value();
                };
                break;
            case SweepFunction::Gelu:
                approx = [kern, in](double x) {
                    return kern->gelu(quantize(x, in, Rounding::Nearest)).value();
                };
                break;
            default:
                throw Error("unsupported sweep function");
        }
    }
    return run_scalar_sweep(spec, approx, oracle, threads);
}

std::vector<SweepReport> table4_suite(const Table4Options& options) {
    const ApproxParams base =
        ApproxParams::with_formats(options.io_format, options.accum_format, options.table_format);

    std::vector<SweepReport> reports;
    reports.reserve(9);
    auto run = [&](SweepFunction fn, double lo, double hi, ApproxParams params,
                   std::string label) {
        SweepSpec spec;
        spec.function = fn;
        spec.lo = lo;
        spec.hi = hi;
        spec.sampling = Sampling::grid(options.grid_points);
        spec.params = std::move(params);
        spec.precision = PrecisionMode::RealArithmetic;
        spec.label = std::move(label);
        reports.push_back(run_sweep(spec, options.threads));
    };

    for (int m : {3, 4, 5}) {
        ApproxParams p = base;
        p.m = m;
        run(SweepFunction::RecipSqrt, 1.0, 128.0, p, "m=" + std::to_string(m));
    }
    for (bool lmsr : {false, true}) {
        for (int alpha : {4, 5}) {
            ApproxParams p = base;
            p.alpha_star = alpha;
            p.use_lmsr = lmsr;
            run(SweepFunction::Reciprocal, 8.0, 64.0, p,
                "alpha*=" + std::to_string(alpha) + (lmsr ? " LMSR" : " MSR"));
        }
    }
    run(SweepFunction::Gelu, -4.0, 4.0, base, "7 segments");
    {
        ApproxParams p = base;
        p.gelu = PiecewiseLinear::fit_gelu(10, options.io_format, options.table_format);
        run(SweepFunction::Gelu, -4.0, 4.0, p, "10 segments (custom fit)");
    }
    return reports;
}

LayerCompareReport layer_compare(const Tensor2D& rows, LayerKind layer,
                                 const ApproxParams& params, int threads) {
    if (rows.rows < 1 || rows.cols < 1) {
        throw ShapeError("layer_compare: empty tensor");
    }
    if (rows.raw.size() != static_cast<std::size_t>(rows.rows) * rows.cols) {
        throw ShapeError("layer_compare: tensor data length does not match extents");
    }
    if (!(rows.format == params.io_format)) {
        throw FormatMismatchError("layer_compare: tensor format " + rows.format.to_string() +
                                  " does not match I/O format " + params.io_format.to_string());
    }

    const Kernels kern(params);
    const LayerNormParams ln = LayerNormParams::unit(rows.cols, params);
    const std::vector<double> gamma(rows.cols, 1.0);
    const std::vector<double> beta(rows.cols, 0.0);
    const int frac = params.io_format.frac_bits;

    LayerCompareReport report;
    report.layer = layer;
    report.rows = rows.rows;
    report.cols = rows.cols;
    report.row_mse.assign(rows.rows, 0.0);
    report.row_max_err.assign(rows.rows, 0.0);
    std::vector<double> sumdev(layer == LayerKind::Softmax ? rows.rows : 0, 0.0);

    parallel_chunks(rows.rows, threads, [&](long, long begin, long end) {
        std::vector<double> xs(rows.cols);
        std::vector<std::int64_t> out(rows.cols);
        for (long r = begin; r < end; ++r) {
            const auto in = rows.row(static_cast<int>(r));
            for (int c = 0; c < rows.cols; ++c) {
                xs[c] = std::ldexp(static_cast<double>(in[c]), -frac);
            }
            std::vector<double> oracle_row;
            switch (layer) {
                case LayerKind::LayerNorm:
                    layer_norm_row(kern, in, ln, out);
                    oracle_row = reference_layer_norm(xs, gamma, beta);
                    break;
                case LayerKind::Softmax:
                    softmax_row(kern, in, out);
                    oracle_row = reference_softmax(xs);
                    break;
                case LayerKind::Gelu:
                    gelu_row(kern, in, out);
                    oracle_row = reference_gelu_map(xs);
                    break;
            }
            double sum_sq = 0.0;
            double max_abs = 0.0;
            double sum_y = 0.0;
            for (int c = 0; c < rows.cols; ++c) {
                const double y = std::ldexp(static_cast<double>(out[c]), -frac);
                const double err = std::abs(y - oracle_row[c]);
                sum_sq += (y - oracle_row[c]) * (y - oracle_row[c]);
                max_abs = std::max(max_abs, err);
                sum_y += y;
            }
            report.row_mse[r] = sum_sq / rows.cols;
            report.row_max_err[r] = max_abs;
            if (layer == LayerKind::Softmax) {
                sumdev[r] = sum_y - 1.0;
            }
        }
    });

    double total_sq = 0.0;
    for (int r = 0; r < rows.rows; ++r) {
        total_sq += report.row_mse[r] * rows.cols;
        report.max_abs_err = std::max(report.max_abs_err, report.row_max_err[r]);
    }
    report.mse = total_sq / (static_cast<double>(rows.rows) * rows.cols);
    if (layer == LayerKind::Softmax) {
        double lo = sumdev[0];
        double hi = sumdev[0];
        double sum = 0.0;
        double max_abs = 0.0;
        for (const double d : sumdev) {
            lo = std::min(lo, d);
            hi = std::max(hi, d);
            sum += d;
            max_abs = std::max(max_abs, std::abs(d));
        }
        report.sumdev_min = lo;
        report.sumdev_max = hi;
        report.sumdev_mean = sum / static_cast<double>(sumdev.size());
        report.sumdev_max_abs = max_abs;
    }
    return report;
}

Tensor2D random_normal_tensor(int rows, int cols, std::uint64_t seed, QFormat fmt) {
    if (rows < 1 || cols < 1) {
        throw ShapeError("random tensor extents must be positive");
    }
    std::mt19937_64 gen(seed);
    std::vector<double> values(static_cast<std::size_t>(rows) * cols);
    for (double& v : values) {
        v = rng::normal(gen);
    }
    return Tensor2D::from_values(rows, cols, values, fmt, Rounding::Nearest);
}

const char* sweep_function_name(SweepFunction fn) {
    switch (fn) {
        case SweepFunction::RecipSqrt:
            return "recip_sqrt";
        case SweepFunction::Reciprocal:
            return "reciprocal";
        case SweepFunction::Exp:
            return "exp";
        case SweepFunction::Gelu:
            return "gelu";
        case SweepFunction::SoftmaxRow:
            return "softmax_row";
        case SweepFunction::LayerNormRow:
            return "layernorm_row";
    }
    return "?";
}

const char* layer_kind_name(LayerKind layer) {
    switch (layer) {
        case LayerKind::LayerNorm:
            return "layernorm";
        case LayerKind::Softmax:
            return "softmax";
        case LayerKind::Gelu:
            return "gelu";
    }
    return "?";
}

const char* precision_mode_name(PrecisionMode mode) {
    return mode == PrecisionMode::RealArithmetic ? "real_arithmetic" : "fixed_point";
}

std::string sampling_descriptor(const Sampling& sampling) {
    switch (sampling.kind) {
        case SamplingKind::Grid:
            if (sampling.step > 0.0) {
                return "grid:step=" + std::to_string(sampling.step);
            }
            return "grid:" + std::to_string(sampling.count);
        case SamplingKind::Integers:
            return "integers";
        case SamplingKind::Random:
            return "random:" + std::to_string(sampling.count) +
                   ":seed=" + std::to_string(sampling.seed);
    }
    return "?";
}

}  // namespace peano
