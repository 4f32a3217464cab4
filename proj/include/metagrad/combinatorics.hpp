#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace metagrad::tasks {

// C(n, k), saturating at uint64 max. Comparisons against ranks stay correct
// under saturation because ranks are themselves uint64.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

// Lexicographically ordered k-combinations of {0..n-1} as strictly increasing
// tuples; unrank/rank are mutual inverses over [0, C(n, k)).
std::vector<std::size_t> unrank_combination(std::uint64_t rank, std::size_t n, std::size_t k);
std::uint64_t rank_combination(std::span<const std::size_t> combination, std::size_t n);

}  // namespace metagrad::tasks
