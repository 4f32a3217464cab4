// Compares the serial reference lane against the OpenMP lane on the dense
// kernels and checks that both produce bit-identical results.

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <random>
#include <vector>

#include "metagrad/kernels.hpp"

using namespace metagrad::kernels;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> dis(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = dis(rng);
    return v;
}

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
    fn();  // warm up
    const auto start = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto end = Clock::now();
    return std::chrono::duration<double, std::milli>(end - start).count() / reps;
}

void report(const std::string& name, double serial_ms, double omp_ms, bool identical) {
    std::cout << std::left << std::setw(26) << name << std::right << std::fixed
              << std::setprecision(3) << std::setw(12) << serial_ms << std::setw(12) << omp_ms
              << std::setw(10) << std::setprecision(2) << serial_ms / omp_ms
              << (identical ? "   bit-identical" : "   MISMATCH") << "\n";
    if (!identical) std::exit(1);
}

}  // namespace

int main() {
    std::cout << "threads: " << omp_get_max_threads() << "\n";
    std::cout << std::left << std::setw(26) << "kernel" << std::right << std::setw(12)
              << "serial ms" << std::setw(12) << "omp ms" << std::setw(10) << "speedup"
              << "\n";

    std::mt19937_64 rng(1);

    for (std::size_t n : {128, 256, 384}) {
        auto a = random_values(rng, n * n);
        auto b = random_values(rng, n * n);
        std::vector<double> ys(n * n), yo(n * n);
        const double ts = time_ms([&] { serial::matmul(a.data(), b.data(), ys.data(), n, n, n); }, 3);
        const double to = time_ms([&] { omp::matmul(a.data(), b.data(), yo.data(), n, n, n); }, 3);
        report("matmul " + std::to_string(n) + "^3", ts, to, ys == yo);
    }

    {
        const std::size_t n = 4'000'000;
        auto x = random_values(rng, n);
        std::vector<double> ys(n), yo(n);
        const double ts = time_ms([&] { serial::unary_map(Unary::Sin, x.data(), ys.data(), n); }, 3);
        const double to = time_ms([&] { omp::unary_map(Unary::Sin, x.data(), yo.data(), n); }, 3);
        report("sin map 4e6", ts, to, ys == yo);
    }

    {
        const std::size_t m = 2048, n = 2048;
        auto a = random_values(rng, m * n);
        std::vector<double> ys(n), yo(n);
        const double ts = time_ms([&] { serial::sum_rows(a.data(), ys.data(), m, n); }, 5);
        const double to = time_ms([&] { omp::sum_rows(a.data(), yo.data(), m, n); }, 5);
        report("sum_rows 2048x2048", ts, to, ys == yo);
    }

    {
        const std::size_t m = 3000, n = 3000;
        auto a = random_values(rng, m * n);
        auto v = random_values(rng, n);
        std::vector<double> ys(m * n), yo(m * n);
        const double ts =
            time_ms([&] { serial::binary_rowvec(Binary::Add, a.data(), v.data(), ys.data(), m, n, false); }, 3);
        const double to =
            time_ms([&] { omp::binary_rowvec(Binary::Add, a.data(), v.data(), yo.data(), m, n, false); }, 3);
        report("bias add 3000x3000", ts, to, ys == yo);
    }

    return 0;
}
