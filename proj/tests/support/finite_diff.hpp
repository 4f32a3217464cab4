#pragma once

// Central finite-difference oracle. Evaluates a scalar pipeline as a black box
// over flat parameter vectors; deliberately independent of the reverse-mode
// engine it is used to check.

#include <cmath>
#include <functional>
#include <vector>

namespace testsupport {

// f consumes one flat value vector per input and returns the scalar output.
using FlatFn = std::function<double(const std::vector<std::vector<double>>&)>;

inline std::vector<std::vector<double>> finite_diff(const FlatFn& f,
                                                    std::vector<std::vector<double>> x,
                                                    double step = 1e-5) {
    std::vector<std::vector<double>> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i].resize(x[i].size());
        for (std::size_t j = 0; j < x[i].size(); ++j) {
            const double saved = x[i][j];
            x[i][j] = saved + step;
            const double hi = f(x);
            x[i][j] = saved - step;
            const double lo = f(x);
            x[i][j] = saved;
            out[i][j] = (hi - lo) / (2.0 * step);
        }
    }
    return out;
}

inline bool close(double a, double b, double atol, double rtol) {
    return std::abs(a - b) <= atol + rtol * std::abs(b);
}

}  // namespace testsupport
