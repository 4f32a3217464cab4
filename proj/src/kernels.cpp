#include "metagrad/kernels.hpp"

#include <omp.h>

#include <atomic>
#include <cmath>
#include <cstring>

namespace metagrad::kernels {

namespace {

std::atomic<bool> g_parallel{true};

// Minimum element counts before the OpenMP lane is worth the fork/join.
constexpr std::size_t kMapGrain = 8192;
constexpr std::size_t kMatmulGrain = 16384;  // m*k*n

inline double apply_unary(Unary op, double x) {
    switch (op) {
        case Unary::Neg: return -x;
        case Unary::Sin: return std::sin(x);
        case Unary::Cos: return std::cos(x);
        case Unary::Tanh: return std::tanh(x);
        case Unary::Relu: return x > 0.0 ? x : 0.0;
        case Unary::Exp: return std::exp(x);
        case Unary::Log: return std::log(x);
        case Unary::Recip: return 1.0 / x;
    }
    return 0.0;
}

inline double apply_binary(Binary op, double a, double b) {
    switch (op) {
        case Binary::Add: return a + b;
        case Binary::Sub: return a - b;
        case Binary::Mul: return a * b;
    }
    return 0.0;
}

}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel(bool enabled) { g_parallel.store(enabled, std::memory_order_relaxed); }

// ---------------------------------------------------------------------------
// Serial reference lane
// ---------------------------------------------------------------------------

namespace serial {

void unary_map(Unary op, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = apply_unary(op, x[i]);
}

void scale(const double* x, double* y, std::size_t n, double c) {
    for (std::size_t i = 0; i < n; ++i) y[i] = c * x[i];
}

void binary_map(Binary op, const double* a, const double* b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = apply_binary(op, a[i], b[i]);
}

void binary_rowvec(Binary op, const double* a, const double* v, double* y, std::size_t m,
                   std::size_t n, bool vec_first) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = a + i * n;
        double* out = y + i * n;
        if (vec_first) {
            for (std::size_t j = 0; j < n; ++j) out[j] = apply_binary(op, v[j], row[j]);
        } else {
            for (std::size_t j = 0; j < n; ++j) out[j] = apply_binary(op, row[j], v[j]);
        }
    }
}

void matmul(const double* a, const double* b, double* y, std::size_t m, std::size_t k,
            std::size_t n) {
    std::memset(y, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        double* out = y + i * n;
        const double* lhs = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = lhs[p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) out[j] += aip * brow[j];
        }
    }
}

void transpose(const double* a, double* y, std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) y[j * m + i] = a[i * n + j];
}

void sum_rows(const double* a, double* y, std::size_t m, std::size_t n) {
    std::memset(y, 0, n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = a + i * n;
        for (std::size_t j = 0; j < n; ++j) y[j] += row[j];
    }
}

void sum_cols(const double* a, double* y, std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = a + i * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += row[j];
        y[i] = acc;
    }
}

void repeat_rows(const double* v, double* y, std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) std::memcpy(y + i * n, v, n * sizeof(double));
}

void repeat_cols(const double* v, double* y, std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* row = y + i * n;
        const double c = v[i];
        for (std::size_t j = 0; j < n; ++j) row[j] = c;
    }
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP lane. Parallelism is always over independent output elements or
// rows; per-element arithmetic order equals the serial lane, so both lanes
// produce bit-identical results for any thread count.
// ---------------------------------------------------------------------------

namespace omp {

void unary_map(Unary op, const double* x, double* y, std::size_t n) {
    const std::int64_t count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) y[i] = apply_unary(op, x[i]);
}

void scale(const double* x, double* y, std::size_t n, double c) {
    const std::int64_t count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) y[i] = c * x[i];
}

void binary_map(Binary op, const double* a, const double* b, double* y, std::size_t n) {
    const std::int64_t count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) y[i] = apply_binary(op, a[i], b[i]);
}

void binary_rowvec(Binary op, const double* a, const double* v, double* y, std::size_t m,
                   std::size_t n, bool vec_first) {
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* row = a + static_cast<std::size_t>(i) * n;
        double* out = y + static_cast<std::size_t>(i) * n;
        if (vec_first) {
            for (std::size_t j = 0; j < n; ++j) out[j] = apply_binary(op, v[j], row[j]);
        } else {
            for (std::size_t j = 0; j < n; ++j) out[j] = apply_binary(op, row[j], v[j]);
        }
    }
}

void matmul(const double* a, const double* b, double* y, std::size_t m, std::size_t k,
            std::size_t n) {
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i) {
        double* out = y + static_cast<std::size_t>(i) * n;
        std::memset(out, 0, n * sizeof(double));
        const double* lhs = a + static_cast<std::size_t>(i) * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = lhs[p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) out[j] += aip * brow[j];
        }
    }
}

void transpose(const double* a, double* y, std::size_t m, std::size_t n) {
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < n; ++j)
            y[j * m + static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i) * n + j];
}

void sum_rows(const double* a, double* y, std::size_t m, std::size_t n) {
    // Each thread owns a contiguous column slab and streams the rows through
    // it, so memory access stays row-major and every column still accumulates
    // i ascending, matching the serial lane bit-for-bit.
#pragma omp parallel
    {
        const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
        const std::size_t nt = static_cast<std::size_t>(omp_get_num_threads());
        const std::size_t j0 = n * tid / nt;
        const std::size_t j1 = n * (tid + 1) / nt;
        if (j1 > j0) {
            std::memset(y + j0, 0, (j1 - j0) * sizeof(double));
            for (std::size_t i = 0; i < m; ++i) {
                const double* row = a + i * n;
                for (std::size_t j = j0; j < j1; ++j) y[j] += row[j];
            }
        }
    }
}

void sum_cols(const double* a, double* y, std::size_t m, std::size_t n) {
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* row = a + static_cast<std::size_t>(i) * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += row[j];
        y[i] = acc;
    }
}

void repeat_rows(const double* v, double* y, std::size_t m, std::size_t n) {
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i)
        std::memcpy(y + static_cast<std::size_t>(i) * n, v, n * sizeof(double));
}

void repeat_cols(const double* v, double* y, std::size_t m, std::size_t n) {
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i) {
        double* row = y + static_cast<std::size_t>(i) * n;
        const double c = v[i];
        for (std::size_t j = 0; j < n; ++j) row[j] = c;
    }
}

}  // namespace omp

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

void unary_map(Unary op, const double* x, double* y, std::size_t n) {
    if (parallel_enabled() && n >= kMapGrain) {
        omp::unary_map(op, x, y, n);
    } else {
        serial::unary_map(op, x, y, n);
    }
}

void scale(const double* x, double* y, std::size_t n, double c) {
    if (parallel_enabled() && n >= kMapGrain) {
        omp::scale(x, y, n, c);
    } else {
        serial::scale(x, y, n, c);
    }
}

void binary_map(Binary op, const double* a, const double* b, double* y, std::size_t n) {
    if (parallel_enabled() && n >= kMapGrain) {
        omp::binary_map(op, a, b, y, n);
    } else {
        serial::binary_map(op, a, b, y, n);
    }
}

void binary_rowvec(Binary op, const double* a, const double* v, double* y, std::size_t m,
                   std::size_t n, bool vec_first) {
    if (parallel_enabled() && m * n >= kMapGrain && m > 1) {
        omp::binary_rowvec(op, a, v, y, m, n, vec_first);
    } else {
        serial::binary_rowvec(op, a, v, y, m, n, vec_first);
    }
}

void matmul(const double* a, const double* b, double* y, std::size_t m, std::size_t k,
            std::size_t n) {
    if (parallel_enabled() && m * k * n >= kMatmulGrain && m > 1) {
        omp::matmul(a, b, y, m, k, n);
    } else {
        serial::matmul(a, b, y, m, k, n);
    }
}

void transpose(const double* a, double* y, std::size_t m, std::size_t n) {
    if (parallel_enabled() && m * n >= kMapGrain && m > 1) {
        omp::transpose(a, y, m, n);
    } else {
        serial::transpose(a, y, m, n);
    }
}

void sum_rows(const double* a, double* y, std::size_t m, std::size_t n) {
    if (parallel_enabled() && m * n >= kMapGrain && n > 1) {
        omp::sum_rows(a, y, m, n);
    } else {
        serial::sum_rows(a, y, m, n);
    }
}

void sum_cols(const double* a, double* y, std::size_t m, std::size_t n) {
    if (parallel_enabled() && m * n >= kMapGrain && m > 1) {
        omp::sum_cols(a, y, m, n);
    } else {
        serial::sum_cols(a, y, m, n);
    }
}

void repeat_rows(const double* v, double* y, std::size_t m, std::size_t n) {
    if (parallel_enabled() && m * n >= kMapGrain && m > 1) {
        omp::repeat_rows(v, y, m, n);
    } else {
        serial::repeat_rows(v, y, m, n);
    }
}

void repeat_cols(const double* v, double* y, std::size_t m, std::size_t n) {
    if (parallel_enabled() && m * n >= kMapGrain && m > 1) {
        omp::repeat_cols(v, y, m, n);
    } else {
        serial::repeat_cols(v, y, m, n);
    }
}

double reduce_sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

}  // namespace metagrad::kernels
