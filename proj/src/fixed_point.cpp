#include "peano/fixed_point.hpp"

#include <bit>
#include <charconv>
#include <cmath>

namespace peano {

namespace detail {

int128 shift_right_rounded(int128 wide, int amount, Rounding mode) {
    if (amount == 0) {
        return wide;
    }
    if (mode == Rounding::Nearest) {
        wide += int128(1) << (amount - 1);
    }
    return wide >> amount;
}

std::int64_t checked_raw(int128 raw, const QFormat& fmt, const char* what) {
    if (raw > int128(fmt.max_raw()) || raw < int128(fmt.min_raw())) {
        throw OverflowError(std::string(what) + " overflows " + fmt.to_string());
    }
    return static_cast<std::int64_t>(raw);
}

}  // namespace detail

namespace {

using detail::checked_raw;
using detail::int128;
using detail::shift_right_rounded;

void require_same_format(const FixedPoint& a, const FixedPoint& b, const char* what) {
    if (!(a.format() == b.format())) {
        throw FormatMismatchError(std::string(what) + ": formats " + a.format().to_string() +
                                  " and " + b.format().to_string() + " differ");
    }
}

}  // namespace

QFormat::QFormat(int total, int frac) : total_bits(total), frac_bits(frac) {
    if (frac < 1 || frac >= total || total > 64) {
        throw Error("invalid format: total=" + std::to_string(total) +
                    " frac=" + std::to_string(frac));
    }
}

std::int64_t QFormat::max_raw() const {
    if (total_bits == 64) {
        return INT64_MAX;
    }
    return (std::int64_t(1) << (total_bits - 1)) - 1;
}

std::int64_t QFormat::min_raw() const {
    if (total_bits == 64) {
        return INT64_MIN;
    }
    return -(std::int64_t(1) << (total_bits - 1));
}

double QFormat::max_value() const { return std::ldexp(static_cast<double>(max_raw()), -frac_bits); }
double QFormat::min_value() const { return std::ldexp(static_cast<double>(min_raw()), -frac_bits); }

QFormat QFormat::parse(std::string_view text) {
    // Qi.f, i = integer bits including sign.
    if (text.size() < 4 || (text[0] != 'Q' && text[0] != 'q')) {
        throw Error("bad Q format string: " + std::string(text));
    }
    auto dot = text.find('.');
    if (dot == std::string_view::npos) {
        throw Error("bad Q format string: " + std::string(text));
    }
    int int_bits = 0;
    int frac = 0;
    auto r1 = std::from_chars(text.data() + 1, text.data() + dot, int_bits);
    auto r2 = std::from_chars(text.data() + dot + 1, text.data() + text.size(), frac);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r1.ptr != text.data() + dot ||
        r2.ptr != text.data() + text.size()) {
        throw Error("bad Q format string: " + std::string(text));
    }
    return QFormat(int_bits + frac, frac);
}

std::string QFormat::to_string() const {
    return "Q" + std::to_string(int_bits()) + "." + std::to_string(frac_bits);
}

FixedPoint::FixedPoint(std::int64_t raw, QFormat fmt) : raw_(raw), fmt_(fmt) {
    if (raw > fmt.max_raw() || raw < fmt.min_raw()) {
        throw OverflowError("mantissa " + std::to_string(raw) + " outside " + fmt.to_string());
    }
}

bool operator==(const FixedPoint& a, const FixedPoint& b) {
    require_same_format(a, b, "compare");
    return a.raw() == b.raw();
}

bool operator<(const FixedPoint& a, const FixedPoint& b) {
    require_same_format(a, b, "compare");
    return a.raw() < b.raw();
}

FixedPoint quantize(double value, QFormat fmt, Rounding mode) {
    if (!std::isfinite(value)) {
        throw Error("quantize: non-finite input");
    }
    double scaled = std::ldexp(value, fmt.frac_bits);
    double mant = (mode == Rounding::Nearest) ? std::floor(scaled + 0.5) : std::floor(scaled);
    // Compare in double before casting; 2^63 is exact in double.
    if (mant > static_cast<double>(fmt.max_raw()) || mant < static_cast<double>(fmt.min_raw())) {
        throw OverflowError("value " + std::to_string(value) + " outside " + fmt.to_string());
    }
    return FixedPoint(static_cast<std::int64_t>(mant), fmt);
}

FixedPoint to_format(const FixedPoint& x, QFormat fmt, Rounding mode) {
    int diff = fmt.frac_bits - x.format().frac_bits;
    int128 raw = int128(x.raw());
    if (diff >= 0) {
        raw <<= diff;
    } else {
        raw = shift_right_rounded(raw, -diff, mode);
    }
    return FixedPoint(checked_raw(raw, fmt, "conversion"), fmt);
}

int leading_one(const FixedPoint& x) {
    if (x.raw() <= 0) {
        throw NonPositiveInputError("leading_one requires x > 0");
    }
    int msb = std::bit_width(static_cast<std::uint64_t>(x.raw())) - 1;
    return msb - x.format().frac_bits;
}

FixedPoint fraction_after_leading_one(const FixedPoint& x, int k) {
    if (x.raw() <= 0) {
        throw NonPositiveInputError("fraction_after_leading_one requires x > 0");
    }
    int msb = k + x.format().frac_bits;
    std::int64_t rest = x.raw() - (std::int64_t(1) << msb);  // bits below the leading one
    // rest * 2^-msb expressed at frac_bits: shift by frac_bits - msb.
    int diff = x.format().frac_bits - msb;
    std::int64_t raw = diff >= 0 ? (rest << diff) : (rest >> -diff);
    return FixedPoint(raw, x.format());
}

FixedPoint shift(const FixedPoint& x, int amount) {
    int128 raw = int128(x.raw());
    if (amount >= 0) {
        if (amount > 126) {
            throw OverflowError("shift amount too large");
        }
        raw <<= amount;
    } else {
        int down = -amount;
        raw = down > 63 ? (raw < 0 ? -1 : 0) : (raw >> down);
    }
    return FixedPoint(checked_raw(raw, x.format(), "shift"), x.format());
}

FixedPoint add(const FixedPoint& a, const FixedPoint& b) {
    require_same_format(a, b, "add");
    return FixedPoint(checked_raw(int128(a.raw()) + int128(b.raw()), a.format(), "sum"),
                      a.format());
}

FixedPoint sub(const FixedPoint& a, const FixedPoint& b) {
    require_same_format(a, b, "sub");
    return FixedPoint(checked_raw(int128(a.raw()) - int128(b.raw()), a.format(), "difference"),
                      a.format());
}

FixedPoint neg(const FixedPoint& x) {
    return FixedPoint(checked_raw(-int128(x.raw()), x.format(), "negation"), x.format());
}

FixedPoint mul(const FixedPoint& a, const FixedPoint& b, Rounding mode) {
    require_same_format(a, b, "mul");
    int128 wide = int128(a.raw()) * int128(b.raw());
    return FixedPoint(
        checked_raw(shift_right_rounded(wide, a.format().frac_bits, mode), a.format(), "product"),
        a.format());
}

}  // namespace peano
