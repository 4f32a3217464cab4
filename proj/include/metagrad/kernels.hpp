#pragma once

#include <cstddef>

namespace metagrad::kernels {

enum class Unary { Neg, Sin, Cos, Tanh, Relu, Exp, Log, Recip };
enum class Binary { Add, Sub, Mul };

// Global switch for the OpenMP lane. Kernels fall back to the serial lane
// below a per-kernel grain size regardless of this flag. Both lanes run the
// same per-element arithmetic in the same order, so results are bit-identical.
bool parallel_enabled();
void set_parallel(bool enabled);

// Serial reference lane.
namespace serial {
void unary_map(Unary op, const double* x, double* y, std::size_t n);
void scale(const double* x, double* y, std::size_t n, double c);
void binary_map(Binary op, const double* a, const double* b, double* y, std::size_t n);
// y[i,j] = a[i,j] op v[j]  (vec_first: v[j] op a[i,j])
void binary_rowvec(Binary op, const double* a, const double* v, double* y, std::size_t m,
                   std::size_t n, bool vec_first);
void matmul(const double* a, const double* b, double* y, std::size_t m, std::size_t k,
            std::size_t n);
void transpose(const double* a, double* y, std::size_t m, std::size_t n);
void sum_rows(const double* a, double* y, std::size_t m, std::size_t n);    // [m,n] -> [n]
void sum_cols(const double* a, double* y, std::size_t m, std::size_t n);    // [m,n] -> [m]
void repeat_rows(const double* v, double* y, std::size_t m, std::size_t n); // [n] -> [m,n]
void repeat_cols(const double* v, double* y, std::size_t m, std::size_t n); // [m] -> [m,n]
}  // namespace serial

// OpenMP lane; signatures mirror serial::.
namespace omp {
void unary_map(Unary op, const double* x, double* y, std::size_t n);
void scale(const double* x, double* y, std::size_t n, double c);
void binary_map(Binary op, const double* a, const double* b, double* y, std::size_t n);
void binary_rowvec(Binary op, const double* a, const double* v, double* y, std::size_t m,
                   std::size_t n, bool vec_first);
void matmul(const double* a, const double* b, double* y, std::size_t m, std::size_t k,
            std::size_t n);
void transpose(const double* a, double* y, std::size_t m, std::size_t n);
void sum_rows(const double* a, double* y, std::size_t m, std::size_t n);
void sum_cols(const double* a, double* y, std::size_t m, std::size_t n);
void repeat_rows(const double* v, double* y, std::size_t m, std::size_t n);
void repeat_cols(const double* v, double* y, std::size_t m, std::size_t n);
}  // namespace omp

// Dispatching entry points used by the op layer.
void unary_map(Unary op, const double* x, double* y, std::size_t n);
void scale(const double* x, double* y, std::size_t n, double c);
void binary_map(Binary op, const double* a, const double* b, double* y, std::size_t n);
void binary_rowvec(Binary op, const double* a, const double* v, double* y, std::size_t m,
                   std::size_t n, bool vec_first);
void matmul(const double* a, const double* b, double* y, std::size_t m, std::size_t k,
            std::size_t n);
void transpose(const double* a, double* y, std::size_t m, std::size_t n);
void sum_rows(const double* a, double* y, std::size_t m, std::size_t n);
void sum_cols(const double* a, double* y, std::size_t m, std::size_t n);
void repeat_rows(const double* v, double* y, std::size_t m, std::size_t n);
void repeat_cols(const double* v, double* y, std::size_t m, std::size_t n);

// Whole-tensor reductions are a single serial pass in both lanes so that the
// summation order never depends on thread count.
double reduce_sum(const double* x, std::size_t n);

}  // namespace metagrad::kernels
