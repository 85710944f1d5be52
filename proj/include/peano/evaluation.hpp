#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "peano/approx.hpp"
#include "peano/layers.hpp"

namespace peano {

struct EmptyIntervalError : Error {
    using Error::Error;
};

enum class SweepFunction { RecipSqrt, Reciprocal, Exp, Gelu, SoftmaxRow, LayerNormRow };
enum class SamplingKind { Grid, Integers, Random };
enum class PrecisionMode { RealArithmetic, FixedPoint };

struct Sampling {
    SamplingKind kind = SamplingKind::Grid;
    long count = 100000;       // grid points, random samples, or random rows
    double step = 0.0;         // when > 0, overrides count for grids
    std::uint64_t seed = 0;

    static Sampling grid(long count);
    static Sampling grid_step(double step);
    static Sampling integers();
    static Sampling random(long count, std::uint64_t seed);
};

struct SweepSpec {
    SweepFunction function = SweepFunction::RecipSqrt;
    double lo = 1.0;
    double hi = 128.0;
    Sampling sampling;
    ApproxParams params;
    PrecisionMode precision = PrecisionMode::RealArithmetic;
    int row_length = 197;  // row functions only
    std::string label;     // parameter descriptor echoed into reports
};

struct SweepReport {
    SweepSpec spec;
    double mse = 0.0;
    double max_abs_err = 0.0;
    double argmax_err = 0.0;  // input value at the largest error
    long sample_count = 0;
};

// MSE and max-abs-error of the approximation against its oracle over the
// sampled interval. Deterministic for a fixed spec, including across thread
// counts (fixed-size chunks reduced in order).
SweepReport run_sweep(const SweepSpec& spec, int threads = 1);

// The sweep loop with caller-supplied scalar functions (used by run_sweep and
// for plumbing checks).
SweepReport run_scalar_sweep(const SweepSpec& spec, const std::function<double(double)>& approx,
                             const std::function<double(double)>& oracle, int threads = 1);

struct Table4Options {
    long grid_points = 100000;
    int threads = 1;
    QFormat io_format{16, 8};
    QFormat accum_format{32, 16};
    QFormat table_format{16, 14};
};

// The standard nine rows, real-arithmetic mode: recip_sqrt m=3,4,5 on [1,128];
// reciprocal MSR/LMSR at alpha*=4,5 on [8,64]; gelu with the published 7
// segments and the locally fitted 10-segment variant on [-4,4].
std::vector<SweepReport> table4_suite(const Table4Options& options = {});

enum class LayerKind { LayerNorm, Softmax, Gelu };

struct LayerCompareReport {
    LayerKind layer = LayerKind::Softmax;
    int rows = 0;
    int cols = 0;
    double mse = 0.0;          // over all elements
    double max_abs_err = 0.0;
    double sumdev_min = 0.0;   // softmax only: per-row sum(y) - 1 statistics
    double sumdev_mean = 0.0;
    double sumdev_max = 0.0;
    double sumdev_max_abs = 0.0;
    std::vector<double> row_mse;
    std::vector<double> row_max_err;
};

// Fixed-point layer against its double-precision reference, row by row.
LayerCompareReport layer_compare(const Tensor2D& rows, LayerKind layer,
                                 const ApproxParams& params, int threads = 1);

// Seeded standard-normal tensor quantized to fmt.
Tensor2D random_normal_tensor(int rows, int cols, std::uint64_t seed, QFormat fmt);

const char* sweep_function_name(SweepFunction fn);
const char* layer_kind_name(LayerKind layer);
const char* precision_mode_name(PrecisionMode mode);
std::string sampling_descriptor(const Sampling& sampling);

}  // namespace peano
