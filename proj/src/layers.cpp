#include "peano/layers.hpp"

#include <algorithm>
#include <cmath>

namespace peano {

namespace {

using detail::checked_raw;
using detail::int128;
using detail::shift_right_rounded;

void check_cell(const Tensor2D& t, int r, int c) {
    if (r < 0 || r >= t.rows || c < 0 || c >= t.cols) {
        throw ShapeError("tensor index out of range");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor2D
// ---------------------------------------------------------------------------

Tensor2D Tensor2D::zeros(int rows, int cols, QFormat fmt) {
    if (rows < 0 || cols < 0) {
        throw ShapeError("tensor extents must be non-negative");
    }
    Tensor2D t;
    t.rows = rows;
    t.cols = cols;
    t.format = fmt;
    t.raw.assign(static_cast<std::size_t>(rows) * cols, 0);
    return t;
}

Tensor2D Tensor2D::from_values(int rows, int cols, std::span<const double> values, QFormat fmt,
                               Rounding mode) {
    if (values.size() != static_cast<std::size_t>(rows) * cols) {
        throw ShapeError("tensor data length does not match extents");
    }
    Tensor2D t = zeros(rows, cols, fmt);
    for (std::size_t i = 0; i < values.size(); ++i) {
        t.raw[i] = quantize(values[i], fmt, mode).raw();
    }
    return t;
}

std::span<const std::int64_t> Tensor2D::row(int r) const {
    check_cell(*this, r, 0);
    return {raw.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
}

std::span<std::int64_t> Tensor2D::row(int r) {
    check_cell(*this, r, 0);
    return {raw.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
}

FixedPoint Tensor2D::at(int r, int c) const {
    check_cell(*this, r, c);
    return FixedPoint(raw[static_cast<std::size_t>(r) * cols + c], format);
}

void Tensor2D::set(int r, int c, const FixedPoint& v) {
    check_cell(*this, r, c);
    if (!(v.format() == format)) {
        throw FormatMismatchError("tensor stores " + format.to_string());
    }
    raw[static_cast<std::size_t>(r) * cols + c] = v.raw();
}

double Tensor2D::value_at(int r, int c) const { return at(r, c).value(); }

// ---------------------------------------------------------------------------
// fixed-point rows
// ---------------------------------------------------------------------------

LayerNormParams LayerNormParams::unit(int cols, const ApproxParams& params) {
    LayerNormParams p;
    const FixedPoint one = quantize(1.0, params.io_format, Rounding::Nearest);
    const FixedPoint zero(0, params.io_format);
    p.gamma.assign(static_cast<std::size_t>(cols), one);
    p.beta.assign(static_cast<std::size_t>(cols), zero);
    p.eps_floor = params.io_format.resolution();
    return p;
}

void layer_norm_row(const Kernels& k, std::span<const std::int64_t> x, const LayerNormParams& p,
                    std::span<std::int64_t> out) {
    if (x.empty()) {
        throw EmptyRowError("layer_norm: empty row");
    }
    if (out.size() != x.size() || p.gamma.size() != x.size() || p.beta.size() != x.size()) {
        throw ShapeError("layer_norm: row/gamma/beta lengths differ");
    }
    if (!(p.eps_floor > 0)) {
        throw Error("layer_norm: eps_floor must be positive");
    }
    const ApproxParams& prm = k.params();
    const QFormat io = prm.io_format;
    const QFormat acc = prm.accum_format;
    const Rounding mode = prm.rounding;
    const int up = acc.frac_bits - io.frac_bits;
    const auto n = static_cast<std::int64_t>(x.size());

    // Exact mantissa sums; 1/n is a pre-quantized constant, not a division.
    int128 sum = 0;
    int128 sum_sq = 0;
    for (const std::int64_t r : x) {
        sum += r;
        sum_sq += int128(r) * r;
    }
    const FixedPoint inv_n = quantize(1.0 / static_cast<double>(n), acc, Rounding::Nearest);
    const std::int64_t avg = checked_raw(
        shift_right_rounded(int128(inv_n.raw()) * sum, io.frac_bits, mode), acc, "average");
    const std::int64_t avg_sq =
        checked_raw(shift_right_rounded(int128(inv_n.raw()) * sum_sq, 2 * io.frac_bits, mode),
                    acc, "mean square");

    int128 variance =
        int128(avg_sq) - shift_right_rounded(int128(avg) * avg, acc.frac_bits, mode);
    std::int64_t floor_raw = quantize(p.eps_floor, acc, Rounding::Nearest).raw();
    if (floor_raw < 1) {
        floor_raw = 1;
    }
    const std::int64_t var_raw =
        variance < int128(floor_raw) ? floor_raw : checked_raw(variance, acc, "variance");

    const FixedPoint rs = k.recip_sqrt(FixedPoint(var_raw, acc), acc);

    for (std::size_t i = 0; i < x.size(); ++i) {
        const int128 centered = (int128(x[i]) << up) - avg;
        int128 y = shift_right_rounded(centered * rs.raw(), acc.frac_bits, mode);
        y = shift_right_rounded(y * p.gamma[i].raw(), io.frac_bits, mode);
        y += int128(p.beta[i].raw()) << up;
        out[i] = checked_raw(shift_right_rounded(y, up, mode), io, "layer_norm output");
    }
}

void softmax_row(const Kernels& k, std::span<const std::int64_t> x, std::span<std::int64_t> out) {
    if (x.empty()) {
        throw EmptyRowError("softmax: empty row");
    }
    if (out.size() != x.size()) {
        throw ShapeError("softmax: output length differs");
    }
    const ApproxParams& prm = k.params();
    const QFormat io = prm.io_format;
    const QFormat acc = prm.accum_format;
    const Rounding mode = prm.rounding;
    const int up = acc.frac_bits - io.frac_bits;
    const std::int64_t max_raw = *std::max_element(x.begin(), x.end());
    const std::int64_t two = std::int64_t(2) << acc.frac_bits;

    // out temporarily holds the accumulator-format exponential terms.
    int128 sum = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int128 shifted = ((int128(x[i]) - max_raw) << up) + two;
        const FixedPoint e =
            k.peano_exp(FixedPoint(checked_raw(shifted, acc, "shifted input"), acc));
        out[i] = e.raw();
        sum += e.raw();
    }
    const FixedPoint recip =
        k.reciprocal(FixedPoint(checked_raw(sum, acc, "softmax sum"), acc), acc);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int128 y = shift_right_rounded(int128(out[i]) * recip.raw(), acc.frac_bits, mode);
        out[i] = checked_raw(shift_right_rounded(y, up, mode), io, "softmax output");
    }
}

void gelu_row(const Kernels& k, std::span<const std::int64_t> x, std::span<std::int64_t> out) {
    if (out.size() != x.size()) {
        throw ShapeError("gelu: output length differs");
    }
    const QFormat io = k.params().io_format;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = k.gelu(FixedPoint(x[i], io)).raw();
    }
}

// ---------------------------------------------------------------------------
// tensor wrappers
// ---------------------------------------------------------------------------

namespace {

void check_tensor(const Tensor2D& x, const ApproxParams& params) {
    if (x.raw.size() != static_cast<std::size_t>(x.rows) * x.cols) {
        throw ShapeError("tensor data length does not match extents");
    }
    if (!(x.format == params.io_format)) {
        throw FormatMismatchError("tensor format " + x.format.to_string() +
                                  " does not match I/O format " +
                                  params.io_format.to_string());
    }
}

}  // namespace

Tensor2D peano_layer_norm(const Tensor2D& x, const LayerNormParams& p,
                          const ApproxParams& params) {
    check_tensor(x, params);
    const Kernels k(params);
    Tensor2D y = Tensor2D::zeros(x.rows, x.cols, x.format);
    for (int r = 0; r < x.rows; ++r) {
        layer_norm_row(k, x.row(r), p, y.row(r));
    }
    return y;
}

Tensor2D peano_softmax(const Tensor2D& x, const ApproxParams& params) {
    check_tensor(x, params);
    const Kernels k(params);
    Tensor2D y = Tensor2D::zeros(x.rows, x.cols, x.format);
    for (int r = 0; r < x.rows; ++r) {
        softmax_row(k, x.row(r), y.row(r));
    }
    return y;
}

Tensor2D peano_gelu_map(const Tensor2D& x, const ApproxParams& params) {
    check_tensor(x, params);
    const Kernels k(params);
    Tensor2D y = Tensor2D::zeros(x.rows, x.cols, x.format);
    for (int r = 0; r < x.rows; ++r) {
        gelu_row(k, x.row(r), y.row(r));
    }
    return y;
}

// ---------------------------------------------------------------------------
// references
// ---------------------------------------------------------------------------

std::vector<double> reference_layer_norm(std::span<const double> x, std::span<const double> gamma,
                                         std::span<const double> beta) {
    if (x.empty()) {
        throw EmptyRowError("reference_layer_norm: empty row");
    }
    if (gamma.size() != x.size() || beta.size() != x.size()) {
        throw ShapeError("reference_layer_norm: row/gamma/beta lengths differ");
    }
    const auto n = static_cast<double>(x.size());
    double mean = 0.0;
    double mean_sq = 0.0;
    for (const double v : x) {
        mean += v;
        mean_sq += v * v;
    }
    mean /= n;
    mean_sq /= n;
    const double variance = mean_sq - mean * mean;
    std::vector<double> y(x.size());
    if (variance <= 0.0) {
        std::copy(beta.begin(), beta.end(), y.begin());  // zero-deviation limit
        return y;
    }
    const double inv_sd = 1.0 / std::sqrt(variance);
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = (x[i] - mean) * inv_sd * gamma[i] + beta[i];
    }
    return y;
}

std::vector<double> reference_softmax(std::span<const double> x) {
    if (x.empty()) {
        throw EmptyRowError("reference_softmax: empty row");
    }
    const double max = *std::max_element(x.begin(), x.end());
    std::vector<double> y(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = std::exp(x[i] - max);
        sum += y[i];
    }
    for (double& v : y) {
        v /= sum;
    }
    return y;
}

std::vector<double> reference_gelu_map(std::span<const double> x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = gelu_exact(x[i]);
    }
    return y;
}

// ---------------------------------------------------------------------------
// real-arithmetic rows
// ---------------------------------------------------------------------------

namespace realmode {

std::vector<double> layer_norm_row(std::span<const double> x, std::span<const double> gamma,
                                   std::span<const double> beta, const ApproxParams& params,
                                   double eps_floor) {
    if (x.empty()) {
        throw EmptyRowError("layer_norm: empty row");
    }
    if (gamma.size() != x.size() || beta.size() != x.size()) {
        throw ShapeError("layer_norm: row/gamma/beta lengths differ");
    }
    const double inv_n = 1.0 / static_cast<double>(x.size());
    double avg = 0.0;
    double avg_sq = 0.0;
    for (const double v : x) {
        avg += v;
        avg_sq += v * v;
    }
    avg *= inv_n;
    avg_sq *= inv_n;
    double variance = avg_sq - avg * avg;
    if (variance < eps_floor) {
        variance = eps_floor;
    }
    std::vector<double> y(x.size());
    if (variance <= 0.0) {
        std::copy(beta.begin(), beta.end(), y.begin());
        return y;
    }
    const double rs = realmode::recip_sqrt(variance, params.m);
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = (x[i] - avg) * rs * gamma[i] + beta[i];
    }
    return y;
}

std::vector<double> softmax_row(std::span<const double> x, const ApproxParams& params) {
    if (x.empty()) {
        throw EmptyRowError("softmax: empty row");
    }
    const double max = *std::max_element(x.begin(), x.end());
    std::vector<double> y(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = realmode::peano_exp(x[i] - max + 2.0, params.alpha_star, params.use_lmsr);
        sum += y[i];
    }
    const double recip = params.use_lmsr ? realmode::lmsr_recip(sum, params.alpha_star)
                                         : realmode::msr_recip(sum, params.alpha_star);
    for (double& v : y) {
        v *= recip;
    }
    return y;
}

std::vector<double> gelu_row(std::span<const double> x, const ApproxParams& params) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = params.gelu.eval_real(x[i]);
    }
    return y;
}

}  // namespace realmode

}  // namespace peano
