#include "peano/approx.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace peano {

namespace {

using detail::checked_raw;
using detail::int128;
using detail::shift_right_rounded;

// raw * 2^amount expressed in out, rounding right shifts per mode.
FixedPoint scaled_to_format(std::int64_t raw, int amount, QFormat out, Rounding mode,
                            const char* what) {
    int128 wide(raw);
    if (amount >= 0) {
        wide <<= amount;
    } else {
        wide = shift_right_rounded(wide, -amount, mode);
    }
    return FixedPoint(checked_raw(wide, out, what), out);
}

struct ScalePick {
    int alpha;
    std::int64_t index;  // floor(x >> alpha), in [1, 2^(alpha*+1) - 1]
};

ScalePick pick_scale(const FixedPoint& x, const RecipTable& table, const char* op) {
    if (x.raw() <= 0) {
        throw NonPositiveInputError(std::string(op) + " requires x > 0");
    }
    const int frac = x.format().frac_bits;
    if (x.raw() < (std::int64_t(1) << frac)) {
        throw RangeViolationError(std::string(op) + " requires x >= 1");
    }
    const int level = leading_one(x);
    const int alpha = level <= table.alpha_star ? 0 : level - table.alpha_star;
    return {alpha, x.raw() >> (alpha + frac)};
}

}  // namespace

// ---------------------------------------------------------------------------
// scalar kernels, fixed point
// ---------------------------------------------------------------------------

FixedPoint recip_sqrt(const FixedPoint& x, const Pow2FracTable& table, QFormat out_format,
                      Rounding mode) {
    if (x.raw() <= 0) {
        throw NonPositiveInputError("recip_sqrt requires x > 0");
    }
    const int frac = x.format().frac_bits;
    const int msb = std::bit_width(static_cast<std::uint64_t>(x.raw())) - 1;
    const int k = msb - frac;
    const std::int64_t rest = x.raw() - (std::int64_t(1) << msb);

    // (k + f) * 2^msb is an exact integer; -(k+f)/2 = numer / 2^(msb+1).
    const int128 numer = -(int128(k) * (int128(1) << msb) + rest);
    const int half_bits = msb + 1;
    const std::int64_t u = static_cast<std::int64_t>(numer >> half_bits);  // floor
    const int128 v_num = numer - (int128(u) << half_bits);                 // v * 2^half_bits
    const std::int64_t index = static_cast<std::int64_t>((v_num << table.m) >> half_bits);

    const FixedPoint& entry = table.entries[static_cast<std::size_t>(index)];
    const int amount = static_cast<int>(u) + out_format.frac_bits - table.format.frac_bits;
    return scaled_to_format(entry.raw(), amount, out_format, mode, "recip_sqrt output");
}

FixedPoint recip_sqrt(const FixedPoint& x, const Pow2FracTable& table) {
    return recip_sqrt(x, table, table.format);
}

FixedPoint msr_recip(const FixedPoint& x, const RecipTable& table, QFormat out_format,
                     Rounding mode) {
    const ScalePick pick = pick_scale(x, table, "msr_recip");
    const FixedPoint& entry = table.entries[static_cast<std::size_t>(pick.index - 1)];
    const int amount = out_format.frac_bits - table.format.frac_bits - pick.alpha;
    return scaled_to_format(entry.raw(), amount, out_format, mode, "msr_recip output");
}

FixedPoint msr_recip(const FixedPoint& x, const RecipTable& table) {
    return msr_recip(x, table, table.format);
}

FixedPoint lmsr_recip(const FixedPoint& x, const RecipTable& table, QFormat out_format,
                      Rounding mode) {
    const ScalePick pick = pick_scale(x, table, "lmsr_recip");
    const int frac_bits = pick.alpha + x.format().frac_bits;
    const std::int64_t t_raw = x.raw() & ((std::int64_t(1) << frac_bits) - 1);

    const std::int64_t last = static_cast<std::int64_t>(table.entries.size());
    const std::int64_t left = table.entries[static_cast<std::size_t>(pick.index - 1)].raw();
    // Right neighbor; past the stored range it is 1/2^(alpha*+1), i.e. the
    // 1/2^alpha* entry shifted right once (exact, power of two).
    const std::int64_t right =
        pick.index + 1 <= last
            ? table.entries[static_cast<std::size_t>(pick.index)].raw()
            : table.entries[static_cast<std::size_t>((std::int64_t(1) << table.alpha_star) - 1)]
                      .raw() >>
                  1;

    const int128 contrib = shift_right_rounded(int128(t_raw) * (right - left), frac_bits, mode);
    const std::int64_t interp =
        checked_raw(int128(left) + contrib, table.format, "lmsr interpolation");
    const int amount = out_format.frac_bits - table.format.frac_bits - pick.alpha;
    return scaled_to_format(interp, amount, out_format, mode, "lmsr_recip output");
}

FixedPoint lmsr_recip(const FixedPoint& x, const RecipTable& table) {
    return lmsr_recip(x, table, table.format);
}

FixedPoint pade_exp(const FixedPoint& x, const RecipTable& table, bool use_lmsr,
                    QFormat work_format, Rounding mode) {
    const FixedPoint xw = to_format(x, work_format, mode);
    const std::int64_t one = std::int64_t(1) << work_format.frac_bits;
    if (xw.raw() < -3 * one || xw.raw() > 2 * one) {
        throw RangeViolationError("pade_exp domain is [-3, 2]");
    }
    const FixedPoint sq = mul(xw, xw, mode);
    const FixedPoint six_x = add(shift(xw, 2), shift(xw, 1));  // 6x = (x << 2) + (x << 1)
    const FixedPoint twelve(12 * one, work_format);
    const FixedPoint numer = add(add(twelve, six_x), sq);
    const FixedPoint denom = add(sub(twelve, six_x), sq);
    if (denom.raw() <= 0) {
        throw Error("pade_exp denominator not positive");  // discriminant < 0, unreachable
    }
    const FixedPoint recip = use_lmsr ? lmsr_recip(denom, table, work_format, mode)
                                      : msr_recip(denom, table, work_format, mode);
    return mul(numer, recip, mode);
}

FixedPoint peano_exp(const FixedPoint& x_tilde, const RecipTable& table, bool use_lmsr,
                     QFormat work_format, Rounding mode) {
    const FixedPoint xw = to_format(x_tilde, work_format, mode);
    if (xw.raw() < -3 * (std::int64_t(1) << work_format.frac_bits)) {
        return FixedPoint(0, work_format);
    }
    return pade_exp(xw, table, use_lmsr, work_format, mode);
}

FixedPoint peano_gelu(const FixedPoint& x, const PiecewiseLinear& pw, QFormat work_format,
                      Rounding mode) {
    if (!(x.format() == pw.cmp_format())) {
        throw FormatMismatchError("peano_gelu: input format " + x.format().to_string() +
                                  " does not match breakpoint format " +
                                  pw.cmp_format().to_string());
    }
    const auto& bp = pw.breakpoint_raw();
    if (x.raw() < bp.front()) {
        return FixedPoint(0, x.format());
    }
    if (x.raw() >= bp.back()) {
        return x;  // identity tail, exact
    }
    std::size_t seg = bp.size() - 2;
    while (x.raw() < bp[seg]) {
        --seg;
    }

    // slope * (x - breakpoint) + intercept at work precision, then back.
    const std::int64_t diff = x.raw() - bp[seg];
    const int128 prod = int128(pw.slope_raw()[seg]) * int128(diff);
    const int prod_frac = pw.coef_format().frac_bits + x.format().frac_bits;
    int128 acc = prod_frac >= work_format.frac_bits
                     ? shift_right_rounded(prod, prod_frac - work_format.frac_bits, mode)
                     : prod << (work_format.frac_bits - prod_frac);
    const int icept_shift = work_format.frac_bits - pw.coef_format().frac_bits;
    acc += icept_shift >= 0
               ? int128(pw.intercept_raw()[seg]) << icept_shift
               : shift_right_rounded(int128(pw.intercept_raw()[seg]), -icept_shift, mode);
    const int out_shift = work_format.frac_bits - x.format().frac_bits;
    const int128 out = out_shift >= 0 ? shift_right_rounded(acc, out_shift, mode)
                                      : acc << -out_shift;
    return FixedPoint(checked_raw(out, x.format(), "gelu output"), x.format());
}

// ---------------------------------------------------------------------------
// real-arithmetic mirrors
// ---------------------------------------------------------------------------

double gelu_exact(double x) {
    constexpr double sqrt_2_over_pi = 0.7978845608028653558798921198687637369517;
    return 0.5 * x * (1.0 + std::tanh(sqrt_2_over_pi * (x + 0.044715 * x * x * x)));
}

namespace realmode {

double recip_sqrt(double x, int m) {
    if (!(x > 0)) {
        throw NonPositiveInputError("recip_sqrt requires x > 0");
    }
    int exp2i = 0;
    const double mant = std::frexp(x, &exp2i);  // x = mant * 2^exp2i, mant in [0.5, 1)
    const int k = exp2i - 1;
    const double f = 2.0 * mant - 1.0;  // in [0, 1)
    const double t = -(static_cast<double>(k) + f) / 2.0;
    const double u = std::floor(t);
    const double index = std::floor(std::ldexp(t - u, m));
    return std::ldexp(std::exp2(std::ldexp(index, -m)), static_cast<int>(u));
}

namespace {

int scale_of(double x, int alpha_star, const char* op) {
    if (!(x > 0)) {
        throw NonPositiveInputError(std::string(op) + " requires x > 0");
    }
    if (x < 1.0) {
        throw RangeViolationError(std::string(op) + " requires x >= 1");
    }
    int exp2i = 0;
    std::frexp(x, &exp2i);
    const int level = exp2i - 1;
    return level <= alpha_star ? 0 : level - alpha_star;
}

}  // namespace

double msr_recip(double x, int alpha_star) {
    const int alpha = scale_of(x, alpha_star, "msr_recip");
    const double j = std::floor(std::ldexp(x, -alpha));
    return std::ldexp(1.0 / j, -alpha);
}

double lmsr_recip(double x, int alpha_star) {
    const int alpha = scale_of(x, alpha_star, "lmsr_recip");
    const double scaled = std::ldexp(x, -alpha);
    const double j = std::floor(scaled);
    const double t = scaled - j;
    const double last = std::ldexp(1.0, alpha_star + 1) - 1.0;
    const double right = j + 1.0 <= last ? 1.0 / (j + 1.0) : std::ldexp(1.0, -(alpha_star + 1));
    return std::ldexp((1.0 - t) * (1.0 / j) + t * right, -alpha);
}

double pade_exp(double x, int alpha_star, bool use_lmsr) {
    if (x < -3.0 || x > 2.0) {
        throw RangeViolationError("pade_exp domain is [-3, 2]");
    }
    const double sq = x * x;
    const double six_x = 6.0 * x;
    const double denom = 12.0 - six_x + sq;
    if (!(denom > 0)) {
        throw Error("pade_exp denominator not positive");
    }
    const double recip = use_lmsr ? lmsr_recip(denom, alpha_star) : msr_recip(denom, alpha_star);
    return (12.0 + six_x + sq) * recip;
}

double peano_exp(double x_tilde, int alpha_star, bool use_lmsr) {
    if (x_tilde < -3.0) {
        return 0.0;
    }
    return pade_exp(x_tilde, alpha_star, use_lmsr);
}

double gelu(double x, const PiecewiseLinear& pw) { return pw.eval_real(x); }

}  // namespace realmode

// ---------------------------------------------------------------------------
// piecewise linear
// ---------------------------------------------------------------------------

PiecewiseLinear PiecewiseLinear::make(std::vector<double> breakpoints, std::vector<double> slopes,
                                      std::vector<double> intercepts, QFormat cmp_format,
                                      QFormat coef_format) {
    if (breakpoints.size() < 2 || slopes.size() != breakpoints.size() - 1 ||
        intercepts.size() != slopes.size()) {
        throw Error("piecewise: need n breakpoints and n-1 slope/intercept pairs");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > breakpoints[i - 1])) {
            throw Error("piecewise: breakpoints must be strictly increasing");
        }
    }
    // Adjacent pieces (and the 0 / identity tails) must meet at breakpoints
    // up to the coefficient quantum plus the published shapes' own seams
    // (the seven-segment gelu constants leave a 1.3e-4 gap at -0.75).
    const double tol = std::ldexp(1.0, -coef_format.frac_bits) + 2e-4;
    const std::size_t segs = slopes.size();
    for (std::size_t i = 0; i + 1 < segs; ++i) {
        const double left = slopes[i] * (breakpoints[i + 1] - breakpoints[i]) + intercepts[i];
        if (std::abs(left - intercepts[i + 1]) > tol) {
            throw Error("piecewise: discontinuity at breakpoint " +
                        std::to_string(breakpoints[i + 1]));
        }
    }
    if (std::abs(intercepts.front()) > tol) {
        throw Error("piecewise: discontinuity against the zero tail");
    }
    const double top =
        slopes.back() * (breakpoints.back() - breakpoints[segs - 1]) + intercepts.back();
    if (std::abs(top - breakpoints.back()) > tol) {
        throw Error("piecewise: discontinuity against the identity tail");
    }

    PiecewiseLinear pw;
    pw.breakpoints_ = std::move(breakpoints);
    pw.slopes_ = std::move(slopes);
    pw.intercepts_ = std::move(intercepts);
    pw.cmp_format_ = cmp_format;
    pw.coef_format_ = coef_format;
    pw.bp_raw_.reserve(pw.breakpoints_.size());
    for (double b : pw.breakpoints_) {
        pw.bp_raw_.push_back(quantize(b, cmp_format, Rounding::Nearest).raw());
    }
    pw.slope_raw_.reserve(segs);
    pw.intercept_raw_.reserve(segs);
    for (std::size_t i = 0; i < segs; ++i) {
        pw.slope_raw_.push_back(quantize(pw.slopes_[i], coef_format, Rounding::Nearest).raw());
        pw.intercept_raw_.push_back(
            quantize(pw.intercepts_[i], coef_format, Rounding::Nearest).raw());
    }
    return pw;
}

PiecewiseLinear PiecewiseLinear::gelu7(QFormat cmp_format, QFormat coef_format) {
    return make({-3.0, -2.1, -0.75, 0.0, 0.5, 3.0},
                {-0.0414, -0.0982, 0.2266, 0.6914, 1.0617},
                {0.0, -0.0373, -0.17, 0.0, 0.3457}, cmp_format, coef_format);
}

double PiecewiseLinear::eval_real(double x) const {
    if (breakpoints_.empty()) {
        throw Error("piecewise: not initialized");
    }
    if (x < breakpoints_.front()) {
        return 0.0;
    }
    if (x >= breakpoints_.back()) {
        return x;
    }
    std::size_t seg = breakpoints_.size() - 2;
    while (x < breakpoints_[seg]) {
        --seg;
    }
    return slopes_[seg] * (x - breakpoints_[seg]) + intercepts_[seg];
}

PiecewiseLinear PiecewiseLinear::fit_gelu(int segments, QFormat cmp_format, QFormat coef_format,
                                          int grid_points) {
    if (segments < 4) {
        throw Error("fit_gelu needs at least 4 segments");
    }
    if (grid_points < 1000) {
        throw Error("fit_gelu needs at least 1000 grid points");
    }
    const double lo = -3.0;
    const double hi = 3.0;
    const int inner_knots = segments - 3;  // knots strictly between lo and hi

    // Knot placement: inverse CDF of the |f''|^(2/5) density.
    const int dn = 20001;
    std::vector<double> xs(dn);
    std::vector<double> cdf(dn);
    double acc = 0.0;
    for (int i = 0; i < dn; ++i) {
        const double x = lo + (hi - lo) * i / (dn - 1);
        const double h = 1e-4;
        const double d2 = (gelu_exact(x + h) - 2.0 * gelu_exact(x) + gelu_exact(x - h)) / (h * h);
        acc += std::pow(std::abs(d2), 0.4);
        xs[i] = x;
        cdf[i] = acc;
    }
    std::vector<double> bps;
    bps.push_back(lo);
    for (int q = 1; q <= inner_knots; ++q) {
        const double target = cdf.front() + (cdf.back() - cdf.front()) * q / (inner_knots + 1);
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
        const std::size_t j = static_cast<std::size_t>(it - cdf.begin());
        if (j == 0 || cdf[j] == cdf[j - 1]) {
            bps.push_back(xs[j]);
        } else {
            const double frac = (target - cdf[j - 1]) / (cdf[j] - cdf[j - 1]);
            bps.push_back(xs[j - 1] + frac * (xs[j] - xs[j - 1]));
        }
    }
    bps.push_back(hi);

    // Node values by least squares over hat functions, continuous by
    // construction; v(lo) = 0 and v(hi) = hi pin the tails.
    const std::size_t nodes = bps.size();
    const std::size_t unknowns = nodes - 2;
    std::vector<double> diag(unknowns, 0.0);
    std::vector<double> off(unknowns, 0.0);  // off[i] couples unknown i and i+1
    std::vector<double> rhs(unknowns, 0.0);
    const double v_first = 0.0;
    const double v_last = hi;

    std::size_t seg = 0;
    for (int i = 0; i < grid_points; ++i) {
        const double x = lo + (hi - lo) * i / (grid_points - 1);
        if (x >= hi) {
            break;
        }
        while (seg + 2 < nodes && x >= bps[seg + 1]) {
            ++seg;
        }
        const double t = (x - bps[seg]) / (bps[seg + 1] - bps[seg]);
        const double y = gelu_exact(x);
        const double wl = 1.0 - t;
        const double wr = t;
        const bool left_unknown = seg >= 1;
        const bool right_unknown = seg + 1 <= unknowns;
        if (left_unknown) {
            diag[seg - 1] += wl * wl;
            rhs[seg - 1] += wl * y;
        }
        if (right_unknown) {
            diag[seg] += wr * wr;
            rhs[seg] += wr * y;
        }
        if (left_unknown && right_unknown) {
            off[seg - 1] += wl * wr;
        } else if (!left_unknown && right_unknown) {
            rhs[seg] -= wr * wl * v_first;
        } else if (left_unknown && !right_unknown) {
            rhs[seg - 1] -= wl * wr * v_last;
        }
    }

    // Thomas solve (symmetric tridiagonal).
    for (std::size_t i = 1; i < unknowns; ++i) {
        const double w = off[i - 1] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> v(unknowns);
    v[unknowns - 1] = rhs[unknowns - 1] / diag[unknowns - 1];
    for (std::size_t i = unknowns - 1; i-- > 0;) {
        v[i] = (rhs[i] - off[i] * v[i + 1]) / diag[i];
    }

    std::vector<double> values;
    values.reserve(nodes);
    values.push_back(v_first);
    values.insert(values.end(), v.begin(), v.end());
    values.push_back(v_last);

    std::vector<double> slopes(nodes - 1);
    std::vector<double> intercepts(nodes - 1);
    for (std::size_t i = 0; i + 1 < nodes; ++i) {
        slopes[i] = (values[i + 1] - values[i]) / (bps[i + 1] - bps[i]);
        intercepts[i] = values[i];
    }
    return make(std::move(bps), std::move(slopes), std::move(intercepts), cmp_format, coef_format);
}

// ---------------------------------------------------------------------------
// kernels bundle
// ---------------------------------------------------------------------------

ApproxParams ApproxParams::with_formats(QFormat io, QFormat accum, QFormat table) {
    ApproxParams p;
    p.io_format = io;
    p.accum_format = accum;
    p.table_format = table;
    p.gelu = PiecewiseLinear::gelu7(io, table);
    return p;
}

Kernels::Kernels(ApproxParams params)
    : params_(std::move(params)),
      pow2_(build_pow2_table(params_.m, params_.table_format)),
      recip_(build_recip_table(params_.alpha_star, params_.table_format)) {
    if (params_.accum_format.frac_bits < params_.io_format.frac_bits) {
        throw Error("accumulator format must carry at least the I/O fractional bits");
    }
    if (!(params_.gelu.cmp_format() == params_.io_format)) {
        throw FormatMismatchError("gelu breakpoints are in " +
                                  params_.gelu.cmp_format().to_string() + " but I/O is " +
                                  params_.io_format.to_string());
    }
}

FixedPoint Kernels::recip_sqrt(const FixedPoint& x, QFormat out_format) const {
    return peano::recip_sqrt(x, pow2_, out_format, params_.rounding);
}

FixedPoint Kernels::reciprocal(const FixedPoint& x, QFormat out_format) const {
    return params_.use_lmsr ? lmsr_recip(x, recip_, out_format, params_.rounding)
                            : msr_recip(x, recip_, out_format, params_.rounding);
}

FixedPoint Kernels::pade_exp(const FixedPoint& x) const {
    return peano::pade_exp(x, recip_, params_.use_lmsr, params_.accum_format, params_.rounding);
}

FixedPoint Kernels::peano_exp(const FixedPoint& x_tilde) const {
    return peano::peano_exp(x_tilde, recip_, params_.use_lmsr, params_.accum_format,
                            params_.rounding);
}

FixedPoint Kernels::gelu(const FixedPoint& x) const {
    return peano_gelu(x, params_.gelu, params_.accum_format, params_.rounding);
}

}  // namespace peano
