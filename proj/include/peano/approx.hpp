#pragma once

#include <vector>

#include "peano/fixed_point.hpp"
#include "peano/tables.hpp"

namespace peano {

// Piecewise-linear function: slope[i] * (x - breakpoint[i]) + intercept[i] on
// [breakpoint[i], breakpoint[i+1]), constant 0 below the first breakpoint and
// identity above the last. Coefficients are kept at full precision and
// pre-quantized at construction (breakpoints in cmp_format for raw mantissa
// comparisons against inputs, slopes/intercepts in coef_format).
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;

    static PiecewiseLinear make(std::vector<double> breakpoints, std::vector<double> slopes,
                                std::vector<double> intercepts, QFormat cmp_format,
                                QFormat coef_format);

    // The published seven-segment GELU shape.
    static PiecewiseLinear gelu7(QFormat cmp_format, QFormat coef_format);

    // GELU fitted with `segments` pieces: zero tail below -3, identity tail
    // above 3, interior knots from the |gelu''|^(2/5) density rule, node
    // values by continuous linear-spline least squares on a uniform grid.
    static PiecewiseLinear fit_gelu(int segments, QFormat cmp_format, QFormat coef_format,
                                    int grid_points = 100001);

    int segment_count() const { return static_cast<int>(breakpoints_.size()) + 1; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& slopes() const { return slopes_; }
    const std::vector<double>& intercepts() const { return intercepts_; }
    const std::vector<std::int64_t>& breakpoint_raw() const { return bp_raw_; }
    const std::vector<std::int64_t>& slope_raw() const { return slope_raw_; }
    const std::vector<std::int64_t>& intercept_raw() const { return intercept_raw_; }
    const QFormat& cmp_format() const { return cmp_format_; }
    const QFormat& coef_format() const { return coef_format_; }

    double eval_real(double x) const;

private:
    std::vector<double> breakpoints_;
    std::vector<double> slopes_;      // size breakpoints-1
    std::vector<double> intercepts_;  // size breakpoints-1
    QFormat cmp_format_;
    QFormat coef_format_;
    std::vector<std::int64_t> bp_raw_;
    std::vector<std::int64_t> slope_raw_;
    std::vector<std::int64_t> intercept_raw_;
};

// Knobs shared by every approximation.
struct ApproxParams {
    int m = 4;                      // pow2 fraction bits (layer norm)
    int alpha_star = 4;             // reciprocal table threshold (softmax)
    bool use_lmsr = false;          // interpolated reciprocal on/off
    QFormat io_format{16, 8};       // activations
    QFormat accum_format{32, 16};   // sums, variances, exp terms
    QFormat table_format{16, 14};   // pre-stored entries and pwl coefficients
    Rounding rounding = Rounding::Truncate;
    PiecewiseLinear gelu = PiecewiseLinear::gelu7(QFormat{16, 8}, QFormat{16, 14});

    // Defaults with the gelu shape rebuilt for the chosen formats.
    static ApproxParams with_formats(QFormat io, QFormat accum, QFormat table);
};

// 1/sqrt(x) via leading-one log2, halving, and the pre-stored fractional
// power of two, shifted by the integer part. No division or sqrt executed.
FixedPoint recip_sqrt(const FixedPoint& x, const Pow2FracTable& table, QFormat out_format,
                      Rounding mode = Rounding::Truncate);
FixedPoint recip_sqrt(const FixedPoint& x, const Pow2FracTable& table);

// Multi-scale reciprocal: scale x into table range with a power-of-two shift,
// look up, shift back. Requires x >= 1.
FixedPoint msr_recip(const FixedPoint& x, const RecipTable& table, QFormat out_format,
                     Rounding mode = Rounding::Truncate);
FixedPoint msr_recip(const FixedPoint& x, const RecipTable& table);

// msr_recip with linear interpolation between adjacent entries; the bits
// dropped by the scale shift (plus the input's own fractional bits) form the
// interpolation fraction. At the top of an octave the right neighbor
// 1/2^(alpha*+1) is synthesized from the stored 1/2^alpha* entry by one shift.
FixedPoint lmsr_recip(const FixedPoint& x, const RecipTable& table, QFormat out_format,
                      Rounding mode = Rounding::Truncate);
FixedPoint lmsr_recip(const FixedPoint& x, const RecipTable& table);

// (12 + 6x + x^2) / (12 - 6x + x^2) with the ratio taken through the
// reciprocal table (msr or lmsr). x must lie in [-3, 2].
FixedPoint pade_exp(const FixedPoint& x, const RecipTable& table, bool use_lmsr,
                    QFormat work_format, Rounding mode = Rounding::Truncate);

// 0 for x_tilde < -3, pade_exp otherwise (boundary inclusive).
FixedPoint peano_exp(const FixedPoint& x_tilde, const RecipTable& table, bool use_lmsr,
                     QFormat work_format, Rounding mode = Rounding::Truncate);

// Segment lookup by mantissa comparison, then one multiply and one add.
// Returns a value in x's format.
FixedPoint peano_gelu(const FixedPoint& x, const PiecewiseLinear& pw, QFormat work_format,
                      Rounding mode = Rounding::Truncate);

// tanh-form GELU at double precision, the target the piecewise shapes
// approximate and the oracle for their error metrics.
double gelu_exact(double x);

// Double-precision mirrors of the kernels: identical structure (leading-one,
// flooring, scale shifts) with tables at full precision. These quantify the
// algorithmic error with no fixed-point noise.
namespace realmode {

double recip_sqrt(double x, int m);
double msr_recip(double x, int alpha_star);
double lmsr_recip(double x, int alpha_star);
double pade_exp(double x, int alpha_star, bool use_lmsr);
double peano_exp(double x_tilde, int alpha_star, bool use_lmsr);
double gelu(double x, const PiecewiseLinear& pw);

}  // namespace realmode

// Prebuilt tables bundled with their parameters, for call sites that
// evaluate many inputs.
class Kernels {
public:
    explicit Kernels(ApproxParams params);

    const ApproxParams& params() const { return params_; }
    const Pow2FracTable& pow2_table() const { return pow2_; }
    const RecipTable& recip_table() const { return recip_; }

    FixedPoint recip_sqrt(const FixedPoint& x, QFormat out_format) const;
    FixedPoint reciprocal(const FixedPoint& x, QFormat out_format) const;  // msr/lmsr per params
    FixedPoint pade_exp(const FixedPoint& x) const;                        // accum format
    FixedPoint peano_exp(const FixedPoint& x_tilde) const;                 // accum format
    FixedPoint gelu(const FixedPoint& x) const;

private:
    ApproxParams params_;
    Pow2FracTable pow2_;
    RecipTable recip_;
};

}  // namespace peano
