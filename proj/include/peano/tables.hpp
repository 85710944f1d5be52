#pragma once

#include <vector>

#include "peano/fixed_point.hpp"

namespace peano {

// Pre-stored 2^v for the 2^m fractions representable with m bits:
// entries[j] = 2^(j * 2^-m), j = 0 .. 2^m - 1. entries[0] is exactly 1.0.
struct Pow2FracTable {
    int m = 4;
    QFormat format;
    std::vector<FixedPoint> entries;
};

// Pre-stored reciprocals 1/1 .. 1/(2^(alpha*+1) - 1):
// entries[i] = 1/(i + 1). entries[0] is exactly 1.0.
struct RecipTable {
    int alpha_star = 4;
    QFormat format;
    std::vector<FixedPoint> entries;
};

// Entries are quantized round-to-nearest from the exact real values.
// Throws OverflowError when fmt cannot hold 1.0, and Error when the format is
// too coarse to keep the entries strictly monotone.
Pow2FracTable build_pow2_table(int m, QFormat fmt);
RecipTable build_recip_table(int alpha_star, QFormat fmt);

}  // namespace peano
