#pragma once

#include <cmath>
#include <random>

namespace peano::rng {

// mt19937_64's output sequence is pinned by the standard; the distribution
// transforms below are written out so sampled values are stable across
// standard-library implementations.

inline double uniform01(std::mt19937_64& gen) {
    return std::ldexp(static_cast<double>(gen() >> 11), -53);  // [0, 1)
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform01(gen);
}

// Box-Muller, cosine branch.
inline double normal(std::mt19937_64& gen) {
    const double u1 = std::ldexp(static_cast<double>((gen() >> 11) + 1), -53);  // (0, 1]
    const double u2 = uniform01(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
}

}  // namespace peano::rng
