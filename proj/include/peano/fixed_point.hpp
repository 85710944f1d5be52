#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace peano {

// Error hierarchy. Everything thrown by this library derives from Error.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OverflowError : Error {
    using Error::Error;
};
struct FormatMismatchError : Error {
    using Error::Error;
};
struct NonPositiveInputError : Error {
    using Error::Error;
};
struct RangeViolationError : Error {
    using Error::Error;
};

enum class Rounding {
    Truncate,  // floor on the scaled value (arithmetic right shift on mantissas)
    Nearest,   // round half up (floor(x + 1/2))
};

struct QFormat;

namespace detail {
using int128 = __int128;
// Arithmetic right shift with the requested rounding; amount >= 0.
int128 shift_right_rounded(int128 wide, int amount, Rounding mode);
// Narrow to int64 or throw OverflowError naming `what`.
std::int64_t checked_raw(int128 raw, const QFormat& fmt, const char* what);
}  // namespace detail

// Signed fixed-point format: total_bits wide mantissa, frac_bits of fraction.
// A value is mantissa * 2^-frac_bits.
struct QFormat {
    int total_bits = 16;
    int frac_bits = 8;

    QFormat() = default;
    QFormat(int total, int frac);

    int int_bits() const { return total_bits - frac_bits; }  // includes sign
    std::int64_t max_raw() const;
    std::int64_t min_raw() const;
    double max_value() const;
    double min_value() const;
    double resolution() const { return std::ldexp(1.0, -frac_bits); }

    bool operator==(const QFormat&) const = default;

    // "Qi.f" with i = integer bits including sign, e.g. Q2.14 -> {16, 14}.
    static QFormat parse(std::string_view text);
    std::string to_string() const;
};

class FixedPoint {
public:
    FixedPoint() : raw_(0), fmt_() {}
    FixedPoint(std::int64_t raw, QFormat fmt);

    std::int64_t raw() const { return raw_; }
    const QFormat& format() const { return fmt_; }
    double value() const { return std::ldexp(static_cast<double>(raw_), -fmt_.frac_bits); }

    bool is_zero() const { return raw_ == 0; }
    bool is_positive() const { return raw_ > 0; }

private:
    std::int64_t raw_;
    QFormat fmt_;
};

// Comparisons require matching formats (raw comparison is then exact).
bool operator==(const FixedPoint& a, const FixedPoint& b);
bool operator<(const FixedPoint& a, const FixedPoint& b);

FixedPoint quantize(double value, QFormat fmt, Rounding mode = Rounding::Truncate);

// Re-express x in fmt (mantissa shift; right shifts round per mode).
FixedPoint to_format(const FixedPoint& x, QFormat fmt, Rounding mode = Rounding::Truncate);

// Position k of the most significant set bit of the value: 2^k <= x < 2^(k+1).
// Negative k means the leading one sits among the fractional bits.
int leading_one(const FixedPoint& x);

// The fraction f in x = 2^k (1 + f), f in [0,1), by masking/shifting the
// mantissa. k must equal leading_one(x). Truncates to x's format when k > 0.
FixedPoint fraction_after_leading_one(const FixedPoint& x, int k);

// Multiply by 2^amount. Negative amounts arithmetic-right-shift the mantissa.
FixedPoint shift(const FixedPoint& x, int amount);

FixedPoint add(const FixedPoint& a, const FixedPoint& b);
FixedPoint sub(const FixedPoint& a, const FixedPoint& b);
FixedPoint neg(const FixedPoint& x);
// Exact double-width product, re-quantized to the operands' format.
FixedPoint mul(const FixedPoint& a, const FixedPoint& b, Rounding mode = Rounding::Truncate);

}  // namespace peano
