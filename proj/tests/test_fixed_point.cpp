#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "peano/fixed_point.hpp"

using namespace peano;

namespace {
const QFormat kIo{16, 8};
}

TEST_CASE("quantize hits exact mantissas") {
    CHECK(quantize(0.5, kIo, Rounding::Nearest).raw() == 128);
    CHECK(quantize(1.0 / 3.0, kIo, Rounding::Nearest).raw() == 85);
    CHECK(quantize(1.0 / 3.0, kIo, Rounding::Nearest).value() == doctest::Approx(0.33203125));
    CHECK_THROWS_AS(quantize(200.0, kIo, Rounding::Nearest), OverflowError);
    CHECK_THROWS_AS(quantize(-200.0, kIo, Rounding::Truncate), OverflowError);
    CHECK(quantize(127.99609375, kIo, Rounding::Nearest).raw() == kIo.max_raw());
}

TEST_CASE("quantize rounding modes bound the error") {
    std::mt19937_64 gen(11);
    for (int i = 0; i < 2000; ++i) {
        const double v = (static_cast<double>(gen() >> 11) / 9007199254740992.0) * 200.0 - 100.0;
        const double t = quantize(v, kIo, Rounding::Truncate).value();
        const double n = quantize(v, kIo, Rounding::Nearest).value();
        CHECK(v - t >= 0.0);
        CHECK(v - t < kIo.resolution());
        CHECK(std::abs(v - n) <= kIo.resolution() / 2);
    }
}

TEST_CASE("leading_one") {
    CHECK(leading_one(quantize(6.0, kIo)) == 2);
    CHECK(leading_one(quantize(1.0, kIo)) == 0);
    CHECK(leading_one(quantize(0.25, kIo)) == -2);
    CHECK_THROWS_AS(leading_one(FixedPoint(0, kIo)), NonPositiveInputError);
    CHECK_THROWS_AS(leading_one(quantize(-1.0, kIo)), NonPositiveInputError);
}

TEST_CASE("fraction_after_leading_one") {
    CHECK(fraction_after_leading_one(quantize(6.0, kIo), 2).value() == 0.5);
    CHECK(fraction_after_leading_one(quantize(1.0, kIo), 0).value() == 0.0);
    CHECK(fraction_after_leading_one(quantize(0.375, kIo), -2).value() == 0.5);
}

TEST_CASE("leading_one and fraction recompose the value") {
    std::mt19937_64 gen(7);
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t raw = static_cast<std::int64_t>(gen() % 32767) + 1;
        const FixedPoint x(raw, kIo);
        const int k = leading_one(x);
        const FixedPoint f = fraction_after_leading_one(x, k);
        CHECK(f.value() >= 0.0);
        CHECK(f.value() < 1.0);
        if (k <= 0) {  // no fraction bits dropped for subunit leading ones
            CHECK(std::ldexp(1.0 + f.value(), k) == x.value());
        } else {
            CHECK(std::abs(std::ldexp(1.0 + f.value(), k) - x.value()) <
                  std::ldexp(kIo.resolution(), k));
        }
    }
}

TEST_CASE("shift") {
    CHECK(shift(quantize(1.5, kIo), 2).value() == 6.0);
    CHECK(shift(quantize(1.0, kIo), -3).value() == 0.125);
    CHECK(shift(FixedPoint(5, kIo), -1).raw() == 2);
    CHECK(shift(FixedPoint(-5, kIo), -1).raw() == -3);  // truncation toward -inf
    CHECK_THROWS_AS(shift(quantize(100.0, kIo), 4), OverflowError);
}

TEST_CASE("shift round trip when no bits are lost") {
    std::mt19937_64 gen(13);
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t raw = static_cast<std::int64_t>(gen() % 65536) - 32768;
        const int amount = static_cast<int>(gen() % 6) + 1;
        const FixedPoint x(raw, kIo);
        const bool lost = (raw & ((std::int64_t(1) << amount) - 1)) != 0;
        if (!lost) {
            CHECK(shift(shift(x, -amount), amount).raw() == raw);
        }
        // left-then-right is lossless whenever the left shift fits
        if (std::abs(raw) < (std::int64_t(1) << (14 - amount))) {
            CHECK(shift(shift(x, amount), -amount).raw() == raw);
        }
    }
}

TEST_CASE("arithmetic") {
    CHECK(mul(quantize(1.5, kIo), quantize(2.0, kIo)).value() == 3.0);
    CHECK(add(quantize(0.5, kIo), quantize(0.25, kIo)).value() == 0.75);
    CHECK(sub(quantize(0.5, kIo), quantize(0.25, kIo)).value() == 0.25);
    CHECK(neg(quantize(0.5, kIo)).value() == -0.5);
    CHECK(mul(FixedPoint(3, kIo), FixedPoint(3, kIo), Rounding::Truncate).raw() == 0);
    // half-up at the re-quantization boundary
    CHECK(mul(FixedPoint(128, kIo), FixedPoint(1, kIo), Rounding::Nearest).raw() == 1);
    CHECK(mul(FixedPoint(128, kIo), FixedPoint(1, kIo), Rounding::Truncate).raw() == 0);
    CHECK_THROWS_AS(add(quantize(100.0, kIo), quantize(100.0, kIo)), OverflowError);
    CHECK_THROWS_AS(add(quantize(1.0, kIo), quantize(1.0, QFormat{32, 16})),
                    FormatMismatchError);
}

TEST_CASE("round trip through double") {
    std::mt19937_64 gen(17);
    for (int i = 0; i < 5000; ++i) {
        const int total = 8 + static_cast<int>(gen() % 34);  // up to 41 bits, exact in double
        const int frac = 1 + static_cast<int>(gen() % (total - 1));
        const QFormat fmt{total, frac};
        const std::int64_t span = fmt.max_raw() - fmt.min_raw();
        const std::int64_t raw = fmt.min_raw() + static_cast<std::int64_t>(gen() % span);
        const FixedPoint x(raw, fmt);
        CHECK(quantize(x.value(), fmt, Rounding::Truncate).raw() == raw);
        CHECK(quantize(x.value(), fmt, Rounding::Nearest).raw() == raw);
    }
}

TEST_CASE("to_format") {
    const QFormat wide{32, 16};
    const FixedPoint x = quantize(1.0 / 3.0, kIo, Rounding::Nearest);
    const FixedPoint w = to_format(x, wide);
    CHECK(w.value() == x.value());
    CHECK(to_format(w, kIo).raw() == x.raw());
    // downshift truncates toward -inf
    CHECK(to_format(FixedPoint(-1, wide), kIo).raw() == -1);
    CHECK(to_format(FixedPoint(-1, wide), kIo, Rounding::Nearest).raw() == 0);
    CHECK_THROWS_AS(to_format(quantize(100.0, kIo), QFormat{8, 4}), OverflowError);
}

TEST_CASE("QFormat parsing and printing") {
    CHECK(QFormat::parse("Q2.14") == QFormat{16, 14});
    CHECK(QFormat::parse("Q8.8") == QFormat{16, 8});
    CHECK(QFormat{16, 14}.to_string() == "Q2.14");
    CHECK(QFormat{32, 16}.to_string() == "Q16.16");
    CHECK_THROWS_AS(QFormat::parse("16.8"), Error);
    CHECK_THROWS_AS(QFormat::parse("Q16"), Error);
    CHECK_THROWS_AS(QFormat(8, 8), Error);
    CHECK_THROWS_AS(QFormat(70, 8), Error);
}

TEST_CASE("representable range matches the format") {
    CHECK(kIo.max_value() == doctest::Approx(127.99609375));
    CHECK(kIo.min_value() == -128.0);
    CHECK_THROWS_AS(FixedPoint(40000, kIo), OverflowError);
}
