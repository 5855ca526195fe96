#pragma once

#include <cstddef>
#include <span>

namespace rar::kernels {

// Dense kernels behind the model's forward/backward passes. Each has a
// serial reference twin under kernels::serial with identical accumulation
// order, so the OpenMP versions are bitwise-equal to the reference and the
// test suite asserts exact equality. bench_kernels compares their throughput.

// out[r] = sum_c w[r*cols+c] * x[c] + (bias ? bias[r] : 0)
void matvec(std::span<const double> w, std::span<const double> x, std::span<const double> bias,
            std::span<double> out, size_t rows, size_t cols);

// out[c] += sum_r w[r*cols+c] * dy[r]   (gradient through a matvec input)
void matvec_transposed_accum(std::span<const double> w, std::span<const double> dy,
                             std::span<double> out, size_t rows, size_t cols);

// gw[r*cols+c] += dy[r] * x[c]          (gradient of a matvec weight)
void accum_outer(std::span<double> gw, std::span<const double> dy, std::span<const double> x,
                 size_t rows, size_t cols);

// In-place, numerically stable; logits become probabilities.
void softmax_inplace(std::span<double> logits);

namespace serial {
void matvec(std::span<const double> w, std::span<const double> x, std::span<const double> bias,
            std::span<double> out, size_t rows, size_t cols);
void matvec_transposed_accum(std::span<const double> w, std::span<const double> dy,
                             std::span<double> out, size_t rows, size_t cols);
void accum_outer(std::span<double> gw, std::span<const double> dy, std::span<const double> x,
                 size_t rows, size_t cols);
void softmax_inplace(std::span<double> logits);
}  // namespace serial

}  // namespace rar::kernels
