#pragma once

// Fraction-free (Bareiss) forward elimination over the integers. Every intermediate entry is a
// minor of the input, so divisions by the previous pivot are exact. Columns without a pivot are
// skipped; they are zero in every row still being eliminated, so skipping them is the same as
// deleting them and the exactness argument carries over.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qgt/matrix.hpp"

namespace qgt::detail {

using BigInt = boost::multiprecision::cpp_int;

/// In-place Bareiss on a BigInt matrix; returns pivot columns.
inline std::vector<std::size_t> bareiss_big(Matrix<BigInt>& a) {
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    std::vector<std::size_t> pivots;
    BigInt prev = 1;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && a(piv, c) == 0) ++piv;
        if (piv == rows) continue;
        a.swap_rows(piv, r);
        for (std::size_t i = r + 1; i < rows; ++i) {
            for (std::size_t j = c + 1; j < cols; ++j) {
                a(i, j) = (a(r, c) * a(i, j) - a(i, c) * a(r, j)) / prev;
            }
            a(i, c) = 0;
        }
        prev = a(r, c);
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

/// Same elimination in int64 with 128-bit intermediates. Returns nullopt if any entry leaves
/// [-2^62, 2^62], in which case the caller reruns on BigInt.
inline std::optional<std::vector<std::size_t>> bareiss_i64(Matrix<std::int64_t>& a) {
    using wide = __int128;
    // Entries are kept within +-2^62 so the 128-bit cross products cannot overflow.
    constexpr wide hi = wide{1} << 62;
    constexpr wide lo = -hi;
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            if (a(i, j) < lo || a(i, j) > hi) return std::nullopt;
        }
    }
    std::vector<std::size_t> pivots;
    std::int64_t prev = 1;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && a(piv, c) == 0) ++piv;
        if (piv == rows) continue;
        a.swap_rows(piv, r);
        const wide pv = a(r, c);
        for (std::size_t i = r + 1; i < rows; ++i) {
            const wide f = a(i, c);
            for (std::size_t j = c + 1; j < cols; ++j) {
                const wide v = (pv * a(i, j) - f * a(r, j)) / prev;
                if (v < lo || v > hi) return std::nullopt;
                a(i, j) = static_cast<std::int64_t>(v);
            }
            a(i, c) = 0;
        }
        prev = a(r, c);
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

/// Rank over Q of an integer matrix, int64 fast path with BigInt fallback.
inline std::size_t rational_rank(const Matrix<std::int64_t>& m) {
    Matrix<std::int64_t> work = m;
    if (auto piv = bareiss_i64(work)) return piv->size();
    Matrix<BigInt> big(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) big(i, j) = m(i, j);
    }
    return bareiss_big(big).size();
}

}  // namespace qgt::detail
