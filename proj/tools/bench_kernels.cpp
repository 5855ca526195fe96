// Compares the OpenMP kernels against their serial reference twins: verifies
// bitwise-identical results, then times both over the shapes the model
// actually uses.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "rar/kernels.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

struct Case {
    size_t rows;
    size_t cols;
    int reps;
};

}  // namespace

int main() {
    // rows x cols: gate matvec (d x d) and head matvec (vocab x d) shapes
    const std::vector<Case> cases = {
        {64, 64, 20000}, {128, 128, 8000}, {101, 64, 20000}, {512, 512, 500},
    };

    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist(0.0, 1.0);

    std::printf("%-14s %-10s %12s %12s %8s\n", "kernel", "shape", "serial_ms", "omp_ms", "equal");
    for (const auto& c : cases) {
        std::vector<double> w(c.rows * c.cols), x(c.cols), bias(c.rows);
        std::vector<double> out_serial(c.rows), out_omp(c.rows);
        for (double& v : w) v = dist(rng);
        for (double& v : x) v = dist(rng);
        for (double& v : bias) v = dist(rng);

        auto t0 = clock_type::now();
        for (int r = 0; r < c.reps; ++r)
            rar::kernels::serial::matvec(w, x, bias, out_serial, c.rows, c.cols);
        double serial_ms = seconds_since(t0) * 1e3;

        t0 = clock_type::now();
        for (int r = 0; r < c.reps; ++r) rar::kernels::matvec(w, x, bias, out_omp, c.rows, c.cols);
        double omp_ms = seconds_since(t0) * 1e3;

        bool equal = out_serial == out_omp;
        char shape[32];
        std::snprintf(shape, sizeof(shape), "%zux%zu", c.rows, c.cols);
        std::printf("%-14s %-10s %12.2f %12.2f %8s\n", "matvec", shape, serial_ms, omp_ms,
                    equal ? "yes" : "NO");
        if (!equal) return 1;
    }

    for (const auto& c : cases) {
        std::vector<double> w(c.rows * c.cols), dy(c.rows), x(c.cols);
        std::vector<double> g_serial(c.rows * c.cols, 0.0), g_omp(c.rows * c.cols, 0.0);
        std::vector<double> dx_serial(c.cols, 0.0), dx_omp(c.cols, 0.0);
        for (double& v : w) v = dist(rng);
        for (double& v : dy) v = dist(rng);
        for (double& v : x) v = dist(rng);

        auto t0 = clock_type::now();
        for (int r = 0; r < c.reps / 4; ++r) {
            rar::kernels::serial::accum_outer(g_serial, dy, x, c.rows, c.cols);
            rar::kernels::serial::matvec_transposed_accum(w, dy, dx_serial, c.rows, c.cols);
        }
        double serial_ms = seconds_since(t0) * 1e3;

        t0 = clock_type::now();
        for (int r = 0; r < c.reps / 4; ++r) {
            rar::kernels::accum_outer(g_omp, dy, x, c.rows, c.cols);
            rar::kernels::matvec_transposed_accum(w, dy, dx_omp, c.rows, c.cols);
        }
        double omp_ms = seconds_since(t0) * 1e3;

        bool equal = g_serial == g_omp && dx_serial == dx_omp;
        char shape[32];
        std::snprintf(shape, sizeof(shape), "%zux%zu", c.rows, c.cols);
        std::printf("%-14s %-10s %12.2f %12.2f %8s\n", "backward", shape, serial_ms, omp_ms,
                    equal ? "yes" : "NO");
        if (!equal) return 1;
    }

    return 0;
}
