#pragma once

// Exact linear algebra: RREF, rank, pinned solving and integer verification over GF(p) or Q.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qgt/bit_matrix.hpp"
#include "qgt/detail/bareiss.hpp"
#include "qgt/detail/modp.hpp"
#include "qgt/error.hpp"
#include "qgt/matrix.hpp"

namespace qgt {

using BigInt = detail::BigInt;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr std::uint64_t kDefaultPrime = 2147483647;  // 2^31 - 1
inline constexpr std::size_t kDefaultExactCap = 64;

struct ModP {
    std::uint64_t prime = kDefaultPrime;
    friend bool operator==(const ModP&, const ModP&) = default;
};

struct ExactRational {
    std::size_t cap = kDefaultExactCap;  // max(rows, cols) allowed
    friend bool operator==(const ExactRational&, const ExactRational&) = default;
};

using FieldMode = std::variant<ModP, ExactRational>;

/// Deterministic Miller-Rabin for 64-bit inputs.
inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1U) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = detail::powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = detail::mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

inline void validate_mode(const FieldMode& mode, std::size_t rows, std::size_t cols) {
    if (const auto* mp = std::get_if<ModP>(&mode)) {
        detail::require(mp->prime > 2 && is_prime(mp->prime), ErrorCode::InvalidParams,
                        "ModP: modulus must be a prime > 2");
    } else {
        const auto& ex = std::get<ExactRational>(mode);
        detail::require(std::max(rows, cols) <= ex.cap, ErrorCode::ExactCapExceeded,
                        "ExactRational: dimension exceeds the exact-mode cap");
    }
}

/// Reduced row echelon form of [M | v] with pivot/free bookkeeping for the M columns.
template <class T>
struct RrefResult {
    Matrix<T> reduced;  // rows(M) x cols(M)
    std::vector<T> rhs;
    std::vector<std::size_t> pivot_cols;
    std::vector<std::size_t> free_cols;
    bool consistent = true;
    FieldMode mode;

    std::size_t rank() const noexcept { return pivot_cols.size(); }
};

using ModpRref = RrefResult<std::uint64_t>;
using RationalRref = RrefResult<Rational>;
using AnyRref = std::variant<ModpRref, RationalRref>;

namespace detail {

inline std::uint64_t to_field(std::int64_t x, std::uint64_t p) {
    const __int128 r = static_cast<__int128>(x) % static_cast<__int128>(p);
    return static_cast<std::uint64_t>(r < 0 ? r + p : r);
}

inline std::int64_t entry(const IntMatrix& m, std::size_t i, std::size_t j) { return m(i, j); }
inline std::int64_t entry(const BitMatrix& m, std::size_t i, std::size_t j) { return m.get(i, j) ? 1 : 0; }

/// Augmented field matrix [M | v]; `with_rhs` false drops the extra column.
template <class Source>
Matrix<std::uint64_t> field_matrix(const Source& m, std::span<const std::int64_t> v, std::uint64_t p,
                                   bool with_rhs) {
    const std::size_t cols = m.cols() + (with_rhs ? 1 : 0);
    Matrix<std::uint64_t> a(m.rows(), cols, 0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if constexpr (std::is_same_v<Source, BitMatrix>) {
            const auto words = m.row_words(i);
            for (std::size_t w = 0; w < words.size(); ++w) {
                std::uint64_t bits = words[w];
                while (bits != 0) {
                    a(i, w * 64 + static_cast<std::size_t>(std::countr_zero(bits))) = 1;
                    bits &= bits - 1;
                }
            }
        } else {
            for (std::size_t j = 0; j < m.cols(); ++j) a(i, j) = to_field(m(i, j), p);
        }
        if (with_rhs) a(i, m.cols()) = to_field(v[i], p);
    }
    return a;
}

template <class Source>
Matrix<BigInt> big_matrix(const Source& m, std::span<const std::int64_t> v, bool with_rhs) {
    const std::size_t cols = m.cols() + (with_rhs ? 1 : 0);
    Matrix<BigInt> a(m.rows(), cols);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) a(i, j) = entry(m, i, j);
        if (with_rhs) a(i, m.cols()) = v[i];
    }
    return a;
}

template <class T>
void split_augmented(RrefResult<T>& out, const Matrix<T>& aug, const std::vector<std::size_t>& pivots,
                     std::size_t ncols) {
    out.reduced = Matrix<T>(aug.rows(), ncols);
    out.rhs.assign(aug.rows(), T{0});
    for (std::size_t i = 0; i < aug.rows(); ++i) {
        for (std::size_t j = 0; j < ncols; ++j) out.reduced(i, j) = aug(i, j);
        out.rhs[i] = aug(i, ncols);
    }
    std::vector<char> is_pivot(ncols, 0);
    for (std::size_t c : pivots) {
        if (c < ncols) {
            out.pivot_cols.push_back(c);
            is_pivot[c] = 1;
        } else {
            out.consistent = false;  // pivot in the rhs column: a (0 ... 0 | 1) row
        }
    }
    for (std::size_t c = 0; c < ncols; ++c) {
        if (!is_pivot[c]) out.free_cols.push_back(c);
    }
}

template <class Source>
ModpRref rref_modp(const Source& m, std::span<const std::int64_t> v, std::uint64_t p) {
    Matrix<std::uint64_t> aug = field_matrix(m, v, p, true);
    const auto pivots = echelon_modp(aug, p);
    back_reduce_modp(aug, pivots, p);
    ModpRref out;
    out.mode = ModP{p};
    split_augmented(out, aug, pivots, m.cols());
    return out;
}

template <class Source>
RationalRref rref_rational(const Source& m, std::span<const std::int64_t> v, const ExactRational& mode) {
    Matrix<BigInt> big = big_matrix(m, v, true);
    const auto pivots = bareiss_big(big);
    const std::size_t rank = pivots.size();
    Matrix<Rational> aug(big.rows(), big.cols(), Rational(0));
    for (std::size_t t = 0; t < rank; ++t) {
        // Boost 1.74 rejects a negative denominator in the two-argument constructor.
        const BigInt& pv = big(t, pivots[t]);
        const bool flip = pv < 0;
        const BigInt den = flip ? BigInt(-pv) : pv;
        for (std::size_t j = 0; j < big.cols(); ++j) aug(t, j) = Rational(flip ? BigInt(-big(t, j)) : big(t, j), den);
    }
    for (std::size_t t = rank; t-- > 0;) {
        for (std::size_t u = 0; u < t; ++u) {
            const Rational f = aug(u, pivots[t]);
            if (f == 0) continue;
            for (std::size_t j = pivots[t]; j < aug.cols(); ++j) aug(u, j) -= f * aug(t, j);
        }
    }
    RationalRref out;
    out.mode = mode;
    split_augmented(out, aug, pivots, m.cols());
    return out;
}

template <class Source>
void check_shapes(const Source& m, std::span<const std::int64_t> v) {
    require(v.size() == m.rows(), ErrorCode::InvalidParams, "rref: len(v) != rows(M)");
}

template <class Source>
AnyRref rref_any(const Source& m, std::span<const std::int64_t> v, const FieldMode& mode) {
    check_shapes(m, v);
    validate_mode(mode, m.rows(), m.cols());
    if (const auto* mp = std::get_if<ModP>(&mode)) return rref_modp(m, v, mp->prime);
    return rref_rational(m, v, std::get<ExactRational>(mode));
}

template <class Source>
std::size_t rank_any(const Source& m, const FieldMode& mode) {
    validate_mode(mode, m.rows(), m.cols());
    if (const auto* mp = std::get_if<ModP>(&mode)) {
        Matrix<std::uint64_t> a = field_matrix(m, {}, mp->prime, false);
        return echelon_modp(a, mp->prime).size();
    }
    if constexpr (std::is_same_v<Source, BitMatrix>) {
        return rational_rank(to_int_matrix(m));
    } else {
        return rational_rank(m);
    }
}

}  // namespace detail

/// Unique RREF of [M | v]. The pivot in each column is the first nonzero row, scanning down.
inline AnyRref rref(const IntMatrix& m, std::span<const std::int64_t> v, const FieldMode& mode = ModP{}) {
    return detail::rref_any(m, v, mode);
}

inline AnyRref rref(const BitMatrix& m, std::span<const std::int64_t> v, const FieldMode& mode = ModP{}) {
    return detail::rref_any(m, v, mode);
}

/// Mod-p rank never exceeds the rational rank; for random 0/1 matrices they agree with high
/// probability.
inline std::size_t rank(const IntMatrix& m, const FieldMode& mode = ModP{}) { return detail::rank_any(m, mode); }
inline std::size_t rank(const BitMatrix& m, const FieldMode& mode = ModP{}) { return detail::rank_any(m, mode); }

namespace detail {

struct ModpOps {
    std::uint64_t p;
    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return a >= b ? a - b : a + (p - b); }
    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const { return mulmod(a, b, p); }
};

struct RationalOps {
    Rational sub(const Rational& a, const Rational& b) const { return a - b; }
    Rational mul(const Rational& a, const Rational& b) const { return a * b; }
};

inline ModpOps ops_for(const ModpRref& r) { return {std::get<ModP>(r.mode).prime}; }
inline RationalOps ops_for(const RationalRref&) { return {}; }

}  // namespace detail

/// The unique solution of the reduced system once every free column is pinned.
template <class T>
std::vector<T> solve_pinned(const RrefResult<T>& r, const std::map<std::size_t, T>& pin) {
    detail::require(r.consistent, ErrorCode::Inconsistent, "solve_pinned: inconsistent system");
    for (std::size_t f : r.free_cols) {
        detail::require(pin.count(f) == 1, ErrorCode::MissingPin, "solve_pinned: free column without a pin");
    }
    detail::require(pin.size() == r.free_cols.size(), ErrorCode::InvalidParams,
                    "solve_pinned: pin on a non-free column");
    const auto ops = detail::ops_for(r);
    std::vector<T> z(r.reduced.cols(), T{0});
    for (const auto& [col, value] : pin) z[col] = value;
    for (std::size_t q = 0; q < r.pivot_cols.size(); ++q) {
        T acc = r.rhs[q];
        for (std::size_t f : r.free_cols) {
            if (r.reduced(q, f) != 0) acc = ops.sub(acc, ops.mul(r.reduced(q, f), pin.at(f)));
        }
        z[r.pivot_cols[q]] = acc;
    }
    return z;
}

/// Mz == v over the integers, with arbitrary-precision accumulation.
inline bool verify_integer(const IntMatrix& m, std::span<const std::int64_t> z, std::span<const std::int64_t> v) {
    detail::require(z.size() == m.cols() && v.size() == m.rows(), ErrorCode::InvalidParams,
                    "verify_integer: dimension mismatch");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        BigInt acc = 0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (m(i, j) != 0 && z[j] != 0) acc += BigInt(m(i, j)) * z[j];
        }
        if (acc != v[i]) return false;
    }
    return true;
}

/// Binary-matrix overload; |sum| < 2^63 * cols fits easily in 128 bits.
inline bool verify_integer(const BitMatrix& m, std::span<const std::int64_t> z, std::span<const std::int64_t> v) {
    detail::require(z.size() == m.cols() && v.size() == m.rows(), ErrorCode::InvalidParams,
                    "verify_integer: dimension mismatch");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        __int128 acc = 0;
        const auto words = m.row_words(i);
        for (std::size_t w = 0; w < words.size(); ++w) {
            std::uint64_t bits = words[w];
            while (bits != 0) {
                acc += z[w * 64 + static_cast<std::size_t>(std::countr_zero(bits))];
                bits &= bits - 1;
            }
        }
        if (acc != v[i]) return false;
    }
    return true;
}

}  // namespace qgt
