#include "peano/tables.hpp"

#include <cmath>

namespace peano {

Pow2FracTable build_pow2_table(int m, QFormat fmt) {
    if (m < 1 || m > 30) {
        throw Error("pow2 table: m must be in [1, 30], got " + std::to_string(m));
    }
    Pow2FracTable table;
    table.m = m;
    table.format = fmt;
    const std::int64_t n = std::int64_t(1) << m;
    table.entries.reserve(n);
    for (std::int64_t j = 0; j < n; ++j) {
        double v = std::exp2(std::ldexp(static_cast<double>(j), -m));
        table.entries.push_back(quantize(v, fmt, Rounding::Nearest));
    }
    for (std::int64_t j = 1; j < n; ++j) {
        if (table.entries[j].raw() <= table.entries[j - 1].raw()) {
            throw Error("pow2 table not strictly increasing at " + fmt.to_string() +
                        " with m=" + std::to_string(m));
        }
    }
    if (table.entries.back().value() >= 2.0) {
        throw Error("pow2 table top entry reaches 2.0 at " + fmt.to_string());
    }
    return table;
}

RecipTable build_recip_table(int alpha_star, QFormat fmt) {
    if (alpha_star < 1 || alpha_star > 30) {
        throw Error("recip table: alpha* must be in [1, 30], got " + std::to_string(alpha_star));
    }
    RecipTable table;
    table.alpha_star = alpha_star;
    table.format = fmt;
    const std::int64_t n = (std::int64_t(1) << (alpha_star + 1)) - 1;
    table.entries.reserve(n);
    for (std::int64_t i = 1; i <= n; ++i) {
        table.entries.push_back(quantize(1.0 / static_cast<double>(i), fmt, Rounding::Nearest));
    }
    for (std::int64_t i = 1; i < n; ++i) {
        if (table.entries[i].raw() >= table.entries[i - 1].raw()) {
            throw Error("recip table not strictly decreasing at " + fmt.to_string() +
                        " with alpha*=" + std::to_string(alpha_star));
        }
    }
    return table;
}

}  // namespace peano
