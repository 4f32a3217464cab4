#include "metagrad/combinatorics.hpp"

#include <limits>
#include <sstream>

#include "metagrad/error.hpp"

namespace metagrad::tasks {

namespace {
constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;  // exact at every step for binomials
        if (acc > kSaturated) return kSaturated;
    }
    return static_cast<std::uint64_t>(acc);
}

std::vector<std::size_t> unrank_combination(std::uint64_t rank, std::size_t n, std::size_t k) {
    if (rank >= binomial(n, k)) {
        std::ostringstream oss;
        oss << "unrank_combination: rank " << rank << " out of range for C(" << n << ", " << k
            << ")";
        throw ContractError(oss.str());
    }
    std::vector<std::size_t> out;
    out.reserve(k);
    std::size_t next = 0;
    for (std::size_t slot = 0; slot < k; ++slot) {
        // Choose the smallest candidate c such that the block of combinations
        // starting with c covers the remaining rank.
        for (std::size_t c = next;; ++c) {
            const std::uint64_t block = binomial(n - 1 - c, k - 1 - slot);
            if (rank < block) {
                out.push_back(c);
                next = c + 1;
                break;
            }
            rank -= block;
        }
    }
    return out;
}

std::uint64_t rank_combination(std::span<const std::size_t> combination, std::size_t n) {
    const std::size_t k = combination.size();
    std::uint64_t rank = 0;
    std::size_t prev = 0;
    for (std::size_t slot = 0; slot < k; ++slot) {
        const std::size_t c = combination[slot];
        if (c >= n || (slot > 0 && c < prev)) {
            throw ContractError("rank_combination: tuple is not strictly increasing within [0, n)");
        }
        for (std::size_t skipped = (slot == 0 ? 0 : prev); skipped < c; ++skipped) {
            rank += binomial(n - 1 - skipped, k - 1 - slot);
        }
        prev = c + 1;
    }
    return rank;
}

}  // namespace metagrad::tasks
