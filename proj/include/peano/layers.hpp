#pragma once

#include <span>
#include <vector>

#include "peano/approx.hpp"

namespace peano {

struct EmptyRowError : Error {
    using Error::Error;
};
struct ShapeError : Error {
    using Error::Error;
};

// Row-major fixed-point matrix; every element shares one format.
struct Tensor2D {
    int rows = 0;
    int cols = 0;
    QFormat format;
    std::vector<std::int64_t> raw;

    static Tensor2D zeros(int rows, int cols, QFormat fmt);
    static Tensor2D from_values(int rows, int cols, std::span<const double> values, QFormat fmt,
                                Rounding mode = Rounding::Nearest);

    std::span<const std::int64_t> row(int r) const;
    std::span<std::int64_t> row(int r);
    FixedPoint at(int r, int c) const;
    void set(int r, int c, const FixedPoint& v);
    double value_at(int r, int c) const;
};

struct LayerNormParams {
    std::vector<FixedPoint> gamma;  // per column, I/O format
    std::vector<FixedPoint> beta;
    double eps_floor = 0.00390625;  // variance substitute for degenerate rows

    // gamma = 1, beta = 0, eps_floor = one I/O quantum.
    static LayerNormParams unit(int cols, const ApproxParams& params);
};

// Row kernels. Mantissas are in k.params().io_format; out.size() == x.size().
void layer_norm_row(const Kernels& k, std::span<const std::int64_t> x, const LayerNormParams& p,
                    std::span<std::int64_t> out);
void softmax_row(const Kernels& k, std::span<const std::int64_t> x, std::span<std::int64_t> out);
void gelu_row(const Kernels& k, std::span<const std::int64_t> x, std::span<std::int64_t> out);

// Whole-tensor wrappers; rows are independent.
Tensor2D peano_layer_norm(const Tensor2D& x, const LayerNormParams& p, const ApproxParams& params);
Tensor2D peano_softmax(const Tensor2D& x, const ApproxParams& params);
Tensor2D peano_gelu_map(const Tensor2D& x, const ApproxParams& params);

// Exact double-precision references: the oracles for every error metric.
std::vector<double> reference_layer_norm(std::span<const double> x, std::span<const double> gamma,
                                         std::span<const double> beta);
std::vector<double> reference_softmax(std::span<const double> x);
std::vector<double> reference_gelu_map(std::span<const double> x);

namespace realmode {

// The approximation algorithms run at double precision (exact tables).
std::vector<double> layer_norm_row(std::span<const double> x, std::span<const double> gamma,
                                   std::span<const double> beta, const ApproxParams& params,
                                   double eps_floor = 0.0);
std::vector<double> softmax_row(std::span<const double> x, const ApproxParams& params);
std::vector<double> gelu_row(std::span<const double> x, const ApproxParams& params);

}  // namespace realmode

}  // namespace peano
