#pragma once

// Closed-form thresholds and binomial inequalities, with exact big-integer reference values for
// domination checks. Natural logarithms throughout.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

#include <boost/multiprecision/cpp_int.hpp>

#include "qgt/error.hpp"

namespace qgt {

using BigInt = boost::multiprecision::cpp_int;

struct ThresholdParams {
    double n = 0;
    double k = 0;

    /// ln k / ln n.
    double theta() const { return std::log(k) / std::log(n); }
};

namespace detail {

inline void require_params(const ThresholdParams& p) {
    require(p.k > 1 && p.k < p.n, ErrorCode::DomainError, "threshold params: need 1 < k < n");
}

}  // namespace detail

/// beta = (theta - 1 + sqrt(theta (1 - theta))) / (2 theta - 1), and 1/2 at theta = 1/2.
inline double beta(double theta) {
    detail::require(theta > 0.0 && theta < 1.0, ErrorCode::DomainError, "beta: theta must be in (0, 1)");
    if (std::abs(theta - 0.5) < 1e-12) return 0.5;
    return (theta - 1.0 + std::sqrt(theta * (1.0 - theta))) / (2.0 * theta - 1.0);
}

/// k beta^-2 ln(n/k): the top-m test count.
inline double m_threshold(const ThresholdParams& p) {
    detail::require_params(p);
    const double b = beta(p.theta());
    return p.k / (b * b) * std::log(p.n / p.k);
}

/// 2k ln(n/k) / ln k.
inline double info_lower_bound(const ThresholdParams& p) {
    detail::require_params(p);
    return 2.0 * p.k * std::log(p.n / p.k) / std::log(p.k);
}

/// Leading order only; coincides with the lower bound.
inline double info_threshold(const ThresholdParams& p) { return info_lower_bound(p); }

inline BigInt binom_exact(std::uint64_t n, std::uint64_t m) {
    if (m > n) return 0;
    if (m > n - m) m = n - m;
    BigInt c = 1;
    for (std::uint64_t i = 1; i <= m; ++i) {
        c *= n - m + i;
        c /= i;
    }
    return c;
}

/// ln C(n, m) through lgamma.
inline double log_binom(double n, double m) {
    return std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0);
}

/// M ln(eN/M); 0 at M = 0.
inline double log_stirling_binom_bound(std::uint64_t n, std::uint64_t m) {
    detail::require(m <= n, ErrorCode::DomainError, "stirling_binom_bound: need M <= N");
    if (m == 0) return 0.0;
    const double md = static_cast<double>(m);
    return md * (1.0 + std::log(static_cast<double>(n) / md));
}

/// (eN/M)^M.
inline double stirling_binom_bound(std::uint64_t n, std::uint64_t m) { return std::exp(log_stirling_binom_bound(n, m)); }

/// e / (pi sqrt(2N)), bounding Pr[X = Y] for independent X, Y ~ B(N, 1/2).
inline double collision_bound(std::uint64_t n) {
    detail::require(n >= 1, ErrorCode::DomainError, "collision_bound: need N >= 1");
    return std::numbers::e / (std::numbers::pi * std::sqrt(2.0 * static_cast<double>(n)));
}

/// (e / 2 pi) sqrt(N / (N^2/4 - t^2)) exp(-2t^2/N), bounding Pr[X = N/2 + t].
inline double point_mass_bound(std::uint64_t n, std::uint64_t t) {
    detail::require(n >= 1 && 2 * t < n, ErrorCode::DomainError, "point_mass_bound: need t < N/2");
    const double nd = static_cast<double>(n);
    const double td = static_cast<double>(t);
    return std::numbers::e / (2.0 * std::numbers::pi) * std::sqrt(nd / (nd * nd / 4.0 - td * td)) *
           std::exp(-2.0 * td * td / nd);
}

/// Calibrated against exact upper tails on N in [64, 512], t in [sqrt N, N/4].
inline constexpr double kDefaultTailConstant = 0.5;

/// c_tail (sqrt N / t) exp(-2t^2/N), bounding Pr[X > N/2 + t].
inline double tail_bound(std::uint64_t n, std::uint64_t t, double c_tail = kDefaultTailConstant) {
    detail::require(t * t >= n && 2 * t <= n && t > 0, ErrorCode::DomainError,
                    "tail_bound: need sqrt(N) <= t <= N/2");
    const double nd = static_cast<double>(n);
    const double td = static_cast<double>(t);
    return c_tail * std::sqrt(nd) / td * std::exp(-2.0 * td * td / nd);
}

/// C(l, k2-k1-1) 2^((k2-1-m1)(l-(k2-k1)+1)), bounding Pr[dim(V + span U) < k2] for dim V = k1
/// and l uniform vectors in {0,1}^m1. Returns 1 when l < k2 - k1 and 0 when k2 = k1.
inline double f2_rank_bound(std::int64_t m1, std::int64_t k1, std::int64_t k2, std::int64_t l) {
    detail::require(0 <= k1 && k1 <= k2 && k2 <= m1 && l >= 0, ErrorCode::DomainError,
                    "f2_rank_bound: need 0 <= k1 <= k2 <= m1");
    const std::int64_t gap = k2 - k1;
    if (l < gap) return 1.0;
    if (gap == 0) return 0.0;
    const double choose = std::exp(log_binom(static_cast<double>(l), static_cast<double>(gap - 1)));
    const std::int64_t exponent = (k2 - 1 - m1) * (l - gap + 1);
    return std::ldexp(std::round(choose), static_cast<int>(exponent));
}

/// 2^(t - M): a uniform vector of {0,1}^M lies in a fixed t-dimensional subspace.
inline double single_vector_bound(std::int64_t big_m, std::int64_t t) {
    return std::ldexp(1.0, static_cast<int>(t - big_m));
}

struct UnionTerm {
    double log_value = 0;       // ln(C(k,l) C(n,l) collision_bound(l)^m)
    double log_simplified = 0;  // ln((e^2 k n / l^2)^l collision_bound(l)^m)
    double value() const { return std::exp(log_value); }
    double simplified() const { return std::exp(log_simplified); }
};

/// Union-bound term for weight-k vectors at Hamming distance 2l from the planted one.
inline UnionTerm l_far_union_term(std::uint64_t n, std::uint64_t k, std::uint64_t l, std::uint64_t m) {
    detail::require(1 <= l && l <= k && k <= n, ErrorCode::DomainError, "l_far_union_term: need 1 <= l <= k <= n");
    const double nd = static_cast<double>(n), kd = static_cast<double>(k), ld = static_cast<double>(l);
    const double per_test = static_cast<double>(m) * std::log(collision_bound(l));
    UnionTerm out;
    out.log_value = log_binom(kd, ld) + log_binom(nd, ld) + per_test;
    out.log_simplified = ld * (2.0 + std::log(kd * nd / (ld * ld))) + per_test;
    return out;
}

/// Exact test of num / 2^shift <= bound, treating the double as the dyadic rational it is.
inline bool dyadic_le(const BigInt& num, std::uint64_t shift, double bound) {
    if (std::isnan(bound)) return false;
    if (std::isinf(bound)) return bound > 0;
    int e = 0;
    const double frac = std::frexp(bound, &e);  // bound = frac 2^e, frac in [0.5, 1)
    const auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
    // num <= mant 2^(e - 53 + shift)
    const std::int64_t s = static_cast<std::int64_t>(e) - 53 + static_cast<std::int64_t>(shift);
    if (s >= 0) return num <= (BigInt(mant) << static_cast<unsigned>(s));
    return (num << static_cast<unsigned>(-s)) <= BigInt(mant);
}

/// Numerator of Pr[X = a] for X ~ B(N, 1/2); the denominator is 2^N.
inline BigInt exact_point_mass(std::uint64_t n, std::uint64_t a) { return binom_exact(n, a); }

/// Numerator of Pr[X > N/2 + t] (strict); the denominator is 2^N.
inline BigInt exact_upper_tail(std::uint64_t n, std::uint64_t t) {
    BigInt sum = 0;
    BigInt c = 1;  // C(n, a) built up from a = 0
    for (std::uint64_t a = 0; a <= n; ++a) {
        if (a > 0) {
            c *= n - a + 1;
            c /= a;
        }
        if (2 * a > n + 2 * t) sum += c;
    }
    return sum;
}

}  // namespace qgt
