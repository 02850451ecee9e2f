#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "qgt/bit_matrix.hpp"
#include "qgt/error.hpp"
#include "qgt/item_set.hpp"
#include "qgt/splitmix.hpp"

namespace qgt {

using Outcome = std::vector<std::int64_t>;

/// A planted QGT problem: outcome = matrix * indicator(defectives).
struct Instance {
    BitMatrix matrix;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t m = 0;
    ItemSet defectives;
    Outcome outcome;
    std::uint64_t seed = 0;

    friend bool operator==(const Instance&, const Instance&) = default;
};

/// y_j = sum over i in items of A[j][i].
inline Outcome outcome(const BitMatrix& a, const ItemSet& items) {
    detail::require(items.bound() <= a.cols(), ErrorCode::IndexOutOfRange, "outcome: item index >= cols");
    if (items.empty()) return Outcome(a.rows(), 0);
    return a.masked_row_counts(a.column_mask(items));
}

/// Fills rows * cols fair bits from the stream, row-major, bit t taken from word t / 64 at
/// position t % 64.
inline BitMatrix random_bit_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng) {
    BitMatrix a(rows, cols);
    const std::size_t total = rows * cols;
    // One spare word so the two-word window below never reads past the end.
    std::vector<std::uint64_t> stream((total + 63) / 64 + 1, 0);
    for (std::size_t w = 0; w + 1 < stream.size(); ++w) stream[w] = rng.next();
    for (std::size_t j = 0; j < rows; ++j) {
        auto row = a.row_words(j);
        for (std::size_t w = 0; w < row.size(); ++w) {
            const std::size_t offset = j * cols + w * 64;
            const std::size_t q = offset / 64;
            const std::size_t r = offset % 64;
            row[w] = r == 0 ? stream[q] : (stream[q] >> r) | (stream[q + 1] << (64 - r));
        }
        row[row.size() - 1] &= a.tail_mask();
    }
    return a;
}

/// Partial Fisher-Yates over [0, n): first k positions of the shuffled permutation, sorted.
inline ItemSet random_subset(std::size_t n, std::size_t k, SplitMix64& rng) {
    detail::require(k <= n, ErrorCode::InvalidParams, "random_subset: k > n");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n - i));
        std::swap(perm[i], perm[j]);
    }
    perm.resize(k);
    return ItemSet::from_unsorted(std::move(perm));
}

/// Deterministic instance from (n, k, m, seed). The matrix consumes the first ceil(m*n/64)
/// stream words; the defective draw continues on the same stream.
inline Instance generate_instance(std::size_t n, std::size_t k, std::size_t m, std::uint64_t seed) {
    detail::require(k > 0 && k < n, ErrorCode::InvalidParams, "generate_instance: need 0 < k < n");
    detail::require(m >= 1, ErrorCode::InvalidParams, "generate_instance: need m >= 1");
    SplitMix64 rng(seed);
    Instance inst;
    inst.matrix = random_bit_matrix(m, n, rng);
    inst.defectives = random_subset(n, k, rng);
    inst.outcome = outcome(inst.matrix, inst.defectives);
    inst.n = n;
    inst.k = k;
    inst.m = m;
    inst.seed = seed;
    return inst;
}

/// Checks the structural invariants of a (possibly deserialized) instance.
inline void validate(const Instance& inst) {
    using detail::require;
    require(inst.matrix.rows() == inst.m && inst.matrix.cols() == inst.n, ErrorCode::InvalidParams,
            "instance: matrix shape does not match (m, n)");
    require(inst.k > 0 && inst.k < inst.n, ErrorCode::InvalidParams, "instance: need 0 < k < n");
    require(inst.defectives.size() == inst.k, ErrorCode::InvalidParams, "instance: |defectives| != k");
    require(inst.defectives.bound() <= inst.n, ErrorCode::IndexOutOfRange, "instance: defective index >= n");
    require(inst.outcome == outcome(inst.matrix, inst.defectives), ErrorCode::InvalidParams,
            "instance: outcome != A x");
}

inline void require_outcome_range(std::span<const std::int64_t> y, std::size_t k) {
    for (std::int64_t v : y) {
        detail::require(v >= 0 && static_cast<std::uint64_t>(v) <= k, ErrorCode::OutcomeOutOfRange,
                        "outcome entry outside [0, k]");
    }
}

/// (1 - A, k - y): the complementary tests and their outcomes.
inline std::pair<BitMatrix, Outcome> complementary(const BitMatrix& a, std::span<const std::int64_t> y,
                                                   std::size_t k) {
    detail::require(y.size() == a.rows(), ErrorCode::InvalidParams, "complementary: len(y) != rows");
    require_outcome_range(y, k);
    Outcome ybar(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) ybar[j] = static_cast<std::int64_t>(k) - y[j];
    return {a.complement(), std::move(ybar)};
}

/// round(2 * mean(y)), ties to even. Plumbing estimator: E[y_j] = k/2 for fair tests.
inline std::size_t estimate_k(std::span<const std::int64_t> y) {
    detail::require(!y.empty(), ErrorCode::InvalidParams, "estimate_k: empty outcome");
    std::int64_t sum = 0;
    for (std::int64_t v : y) {
        detail::require(v >= 0, ErrorCode::OutcomeOutOfRange, "estimate_k: negative outcome");
        sum += v;
    }
    const auto len = static_cast<std::int64_t>(y.size());
    const std::int64_t num = 2 * sum;
    std::int64_t q = num / len;
    const std::int64_t twice_rem = 2 * (num % len);
    if (twice_rem > len || (twice_rem == len && (q % 2) == 1)) ++q;
    return static_cast<std::size_t>(q);
}

}  // namespace qgt
