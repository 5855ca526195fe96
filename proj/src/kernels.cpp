#include "rar/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace rar::kernels {

// Parallelism is across independent output elements only; the per-element
// accumulation order matches the serial twin, which keeps results bitwise
// identical at any thread count.

void matvec(std::span<const double> w, std::span<const double> x, std::span<const double> bias,
            std::span<double> out, size_t rows, size_t cols) {
#pragma omp parallel for schedule(static) if (rows * cols > 4096)
    for (size_t r = 0; r < rows; ++r) {
        const double* wr = w.data() + r * cols;
        double acc = bias.empty() ? 0.0 : bias[r];
        for (size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        out[r] = acc;
    }
}

void matvec_transposed_accum(std::span<const double> w, std::span<const double> dy,
                             std::span<double> out, size_t rows, size_t cols) {
#pragma omp parallel for schedule(static) if (rows * cols > 4096)
    for (size_t c = 0; c < cols; ++c) {
        double acc = 0.0;
        for (size_t r = 0; r < rows; ++r) acc += w[r * cols + c] * dy[r];
        out[c] += acc;
    }
}

void accum_outer(std::span<double> gw, std::span<const double> dy, std::span<const double> x,
                 size_t rows, size_t cols) {
#pragma omp parallel for schedule(static) if (rows * cols > 4096)
    for (size_t r = 0; r < rows; ++r) {
        double* gr = gw.data() + r * cols;
        const double d = dy[r];
        for (size_t c = 0; c < cols; ++c) gr[c] += d * x[c];
    }
}

void softmax_inplace(std::span<double> logits) {
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& v : logits) {
        v = std::exp(v - max_logit);
        total += v;
    }
    for (double& v : logits) v /= total;
}

namespace serial {

void matvec(std::span<const double> w, std::span<const double> x, std::span<const double> bias,
            std::span<double> out, size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r) {
        const double* wr = w.data() + r * cols;
        double acc = bias.empty() ? 0.0 : bias[r];
        for (size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        out[r] = acc;
    }
}

void matvec_transposed_accum(std::span<const double> w, std::span<const double> dy,
                             std::span<double> out, size_t rows, size_t cols) {
    for (size_t c = 0; c < cols; ++c) {
        double acc = 0.0;
        for (size_t r = 0; r < rows; ++r) acc += w[r * cols + c] * dy[r];
        out[c] += acc;
    }
}

void accum_outer(std::span<double> gw, std::span<const double> dy, std::span<const double> x,
                 size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r) {
        double* gr = gw.data() + r * cols;
        const double d = dy[r];
        for (size_t c = 0; c < cols; ++c) gr[c] += d * x[c];
    }
}

void softmax_inplace(std::span<double> logits) { kernels::softmax_inplace(logits); }

}  // namespace serial

}  // namespace rar::kernels
