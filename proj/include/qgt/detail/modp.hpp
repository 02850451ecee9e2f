#pragma once

// Row echelon / reduced row echelon kernels over GF(p).
//
// Two paths share one contract: `echelon_*` turns the matrix into row echelon form with unit
// pivots (rows 0..rank-1 are pivot rows, the rest are zero) and returns the ascending pivot
// columns. The pivot in each column is the first nonzero row at or below the current pivot row.
//
//  - p = 2^31 - 1: panel-blocked right-looking elimination. A panel of columns is factored
//    eagerly, the multipliers are recorded per row, and the trailing columns are then updated
//    one row at a time with a multi-term accumulate that folds the Mersenne reduction every
//    four products.
//  - any other prime: plain unblocked elimination with 128-bit products.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "qgt/matrix.hpp"

namespace qgt::detail {

inline constexpr std::uint64_t kM31 = (std::uint64_t{1} << 31) - 1;

constexpr std::uint64_t m31_fold(std::uint64_t x) noexcept { return (x & kM31) + (x >> 31); }

constexpr std::uint64_t m31_reduce(std::uint64_t x) noexcept {
    x = m31_fold(m31_fold(x));
    return x >= kM31 ? x - kM31 : x;
}

constexpr std::uint64_t m31_mul(std::uint64_t a, std::uint64_t b) noexcept { return m31_reduce(a * b); }

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}

inline std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t p) noexcept {
    std::uint64_t result = 1 % p;
    base %= p;
    while (exp != 0) {
        if (exp & 1U) result = mulmod(result, base, p);
        base = mulmod(base, base, p);
        exp >>= 1;
    }
    return result;
}

/// Inverse of a nonzero element by Fermat.
inline std::uint64_t invmod(std::uint64_t a, std::uint64_t p) noexcept { return powmod(a, p - 2, p); }

/// Product of two values below 2^32, written so the compiler can use 32x32->64 vector multiplies.
constexpr std::uint64_t mul32(std::uint64_t a, std::uint64_t b) noexcept {
    return static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) * static_cast<std::uint32_t>(b);
}

/// dst[c] = dst[c] + sum_t factors[t] * srcs[t][c] (mod 2^31-1) for c < len.
/// All inputs canonical (< p); dst canonical on exit.
inline void m31_accumulate(std::uint64_t* __restrict dst, const std::uint64_t* const* srcs,
                           const std::uint64_t* factors, std::size_t nterms, std::size_t len) {
    // After two folds a value is at most 2^31 + 3, and 2^31 + 3 + 4 (2^31 - 1)^2 < 2^64.
    std::size_t t = 0;
    for (; t + 4 <= nterms; t += 4) {
        const std::uint64_t* __restrict s0 = srcs[t];
        const std::uint64_t* __restrict s1 = srcs[t + 1];
        const std::uint64_t* __restrict s2 = srcs[t + 2];
        const std::uint64_t* __restrict s3 = srcs[t + 3];
        const std::uint64_t f0 = factors[t], f1 = factors[t + 1], f2 = factors[t + 2], f3 = factors[t + 3];
        for (std::size_t c = 0; c < len; ++c) {
            const std::uint64_t x = dst[c] + mul32(f0, s0[c]) + mul32(f1, s1[c]) + mul32(f2, s2[c]) + mul32(f3, s3[c]);
            dst[c] = m31_fold(m31_fold(x));
        }
    }
    for (; t < nterms; ++t) {
        const std::uint64_t* __restrict s = srcs[t];
        const std::uint64_t f = factors[t];
        for (std::size_t c = 0; c < len; ++c) dst[c] = m31_fold(m31_fold(dst[c] + mul32(f, s[c])));
    }
    for (std::size_t c = 0; c < len; ++c) dst[c] = dst[c] >= kM31 ? dst[c] - kM31 : dst[c];
}

inline std::vector<std::size_t> echelon_generic(Matrix<std::uint64_t>& a, std::uint64_t p) {
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && a(piv, c) == 0) ++piv;
        if (piv == rows) continue;
        a.swap_rows(piv, r);
        const std::uint64_t inv = invmod(a(r, c), p);
        for (std::size_t j = c; j < cols; ++j) a(r, j) = mulmod(a(r, j), inv, p);
        for (std::size_t i = r + 1; i < rows; ++i) {
            const std::uint64_t f = a(i, c);
            if (f == 0) continue;
            const std::uint64_t nf = p - f;
            for (std::size_t j = c; j < cols; ++j) {
                const std::uint64_t prod = mulmod(nf, a(r, j), p);
                const std::uint64_t sum = a(i, j) + prod;  // both < p < 2^63
                a(i, j) = sum >= p ? sum - p : sum;
            }
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

inline std::vector<std::size_t> echelon_m31(Matrix<std::uint64_t>& a, std::size_t panel = 16) {
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    std::vector<std::size_t> pivots;
    Matrix<std::uint64_t> mult(rows, panel, 0);  // mult(i, t): entry of row i eliminated by panel pivot t
    std::vector<std::uint64_t> inv(panel);
    std::vector<const std::uint64_t*> srcs(panel);
    std::vector<std::uint64_t> factors(panel);

    std::size_t r = 0;
    for (std::size_t c0 = 0; c0 < cols && r < rows; c0 += panel) {
        const std::size_t c1 = std::min(cols, c0 + panel);
        const std::size_t r0 = r;
        std::size_t nb = 0;

        // Factor the panel columns [c0, c1) only.
        for (std::size_t c = c0; c < c1 && r < rows; ++c) {
            std::size_t piv = r;
            while (piv < rows && a(piv, c) == 0) ++piv;
            if (piv == rows) continue;
            a.swap_rows(piv, r);
            mult.swap_rows(piv, r);
            const std::uint64_t iv = invmod(a(r, c), kM31);
            inv[nb] = iv;
            for (std::size_t j = c; j < c1; ++j) a(r, j) = m31_mul(a(r, j), iv);
            for (std::size_t i = r + 1; i < rows; ++i) {
                const std::uint64_t f = a(i, c);
                if (f == 0) continue;
                mult(i, nb) = f;
                const std::uint64_t nf = kM31 - f;
                for (std::size_t j = c; j < c1; ++j) a(i, j) = m31_reduce(a(i, j) + nf * a(r, j));
            }
            pivots.push_back(c);
            ++nb;
            ++r;
        }
        if (nb == 0) continue;

        const std::size_t len = cols - c1;
        if (len > 0) {
            // Pivot rows first, in order: each needs the finished trailing parts of earlier ones.
            for (std::size_t t = 0; t < nb; ++t) {
                const std::size_t row = r0 + t;
                std::size_t nterms = 0;
                for (std::size_t s = 0; s < t; ++s) {
                    const std::uint64_t f = mult(row, s);
                    if (f == 0) continue;
                    srcs[nterms] = &a(r0 + s, c1);
                    factors[nterms] = kM31 - f;
                    ++nterms;
                }
                std::uint64_t* dst = &a(row, c1);
                m31_accumulate(dst, srcs.data(), factors.data(), nterms, len);
                for (std::size_t j = 0; j < len; ++j) dst[j] = m31_mul(dst[j], inv[t]);
            }
            for (std::size_t i = r0 + nb; i < rows; ++i) {
                std::size_t nterms = 0;
                for (std::size_t s = 0; s < nb; ++s) {
                    const std::uint64_t f = mult(i, s);
                    if (f == 0) continue;
                    srcs[nterms] = &a(r0 + s, c1);
                    factors[nterms] = kM31 - f;
                    ++nterms;
                }
                if (nterms != 0) m31_accumulate(&a(i, c1), srcs.data(), factors.data(), nterms, len);
            }
        }
        for (std::size_t i = r0; i < rows; ++i) std::fill_n(&mult(i, 0), nb, 0);
    }
    return pivots;
}

inline std::vector<std::size_t> echelon_modp(Matrix<std::uint64_t>& a, std::uint64_t p) {
    return p == kM31 ? echelon_m31(a) : echelon_generic(a, p);
}

/// Row echelon form with unit pivots -> reduced row echelon form. Only non-pivot columns need
/// arithmetic (a back substitution per column); pivot columns become unit vectors.
inline void back_reduce_modp(Matrix<std::uint64_t>& a, const std::vector<std::size_t>& pivots, std::uint64_t p) {
    const std::size_t rank = pivots.size();
    const std::size_t cols = a.cols();
    if (rank == 0) return;
    std::vector<char> is_pivot(cols, 0);
    for (std::size_t c : pivots) is_pivot[c] = 1;
    std::vector<std::size_t> free;
    for (std::size_t c = 0; c < cols; ++c) {
        if (!is_pivot[c]) free.push_back(c);
    }
    const std::size_t q = free.size();

    // x(t, .) holds the non-pivot part of row t; solved bottom-up.
    Matrix<std::uint64_t> x(rank, q);
    for (std::size_t t = 0; t < rank; ++t) {
        for (std::size_t f = 0; f < q; ++f) x(t, f) = a(t, free[f]);
    }
    if (q > 0) {
        std::vector<const std::uint64_t*> srcs;
        std::vector<std::uint64_t> factors;
        for (std::size_t t = rank; t-- > 0;) {
            srcs.clear();
            factors.clear();
            for (std::size_t u = t + 1; u < rank; ++u) {
                const std::uint64_t f = a(t, pivots[u]);
                if (f == 0) continue;
                srcs.push_back(&x(u, 0));
                factors.push_back(p - f);
            }
            if (srcs.empty()) continue;
            if (p == kM31) {
                m31_accumulate(&x(t, 0), srcs.data(), factors.data(), srcs.size(), q);
            } else {
                for (std::size_t s = 0; s < srcs.size(); ++s) {
                    for (std::size_t f = 0; f < q; ++f) {
                        const std::uint64_t sum = x(t, f) + mulmod(factors[s], srcs[s][f], p);
                        x(t, f) = sum >= p ? sum - p : sum;
                    }
                }
            }
        }
    }
    for (std::size_t t = 0; t < rank; ++t) {
        for (std::size_t u = 0; u < rank; ++u) a(t, pivots[u]) = (u == t) ? 1 : 0;
        for (std::size_t f = 0; f < q; ++f) a(t, free[f]) = x(t, f);
    }
}

}  // namespace qgt::detail
