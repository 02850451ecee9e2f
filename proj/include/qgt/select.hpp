#pragma once

// Item scores and Subset Select algorithms. Scores are exact ratios; all orderings break ties by
// the smaller item index.

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <variant>
#include <vector>

#include "qgt/bit_matrix.hpp"
#include "qgt/error.hpp"
#include "qgt/item_set.hpp"
#include "qgt/model.hpp"

namespace qgt {

/// num / den with den > 0. Comparison is exact (128-bit cross multiplication).
struct Score {
    std::int64_t num = 0;
    std::int64_t den = 1;

    friend bool operator==(Score a, Score b) noexcept {
        return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
    }
    friend std::strong_ordering operator<=>(Score a, Score b) noexcept {
        const __int128 lhs = static_cast<__int128>(a.num) * b.den;
        const __int128 rhs = static_cast<__int128>(b.num) * a.den;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }
};

using ScoreVector = std::vector<Score>;

/// Sum over tests of the outcome on the item's side of the test:
/// psi_i = sum_j A_ji y_j + (1 - A_ji)(k - y_j), evaluated as 2<A_i, y> - sum(y) + k (m - |A_i|).
inline ScoreVector psi_scores(const BitMatrix& a, std::span<const std::int64_t> y, std::size_t k) {
    detail::require(y.size() == a.rows(), ErrorCode::InvalidParams, "psi_scores: len(y) != rows");
    require_outcome_range(y, k);
    const auto dot = a.column_dot(y);
    const auto weight = a.column_weights();
    const std::int64_t sum_y = std::accumulate(y.begin(), y.end(), std::int64_t{0});
    const auto kk = static_cast<std::int64_t>(k);
    const auto m = static_cast<std::int64_t>(a.rows());
    ScoreVector out(a.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) out[i] = {2 * dot[i] - sum_y + kk * (m - weight[i]), 1};
    return out;
}

namespace detail {

inline ScoreVector normalized_scores(const std::vector<std::int64_t>& dot, const std::vector<std::int64_t>& weight) {
    ScoreVector out(dot.size());
    for (std::size_t i = 0; i < dot.size(); ++i) out[i] = weight[i] == 0 ? Score{0, 1} : Score{dot[i], weight[i]};
    return out;
}

}  // namespace detail

/// phi_i = <A_i, y> / |A_i|; all-zero columns score 0.
inline ScoreVector phi_basic_scores(const BitMatrix& a, std::span<const std::int64_t> y) {
    detail::require(y.size() == a.rows(), ErrorCode::InvalidParams, "phi_basic_scores: len(y) != rows");
    return detail::normalized_scores(a.column_dot(y), a.column_weights());
}

/// <A_i, y - A 1_S> / |A_i|.
inline ScoreVector residual_scores(const BitMatrix& a, std::span<const std::int64_t> y, const ItemSet& s) {
    detail::require(y.size() == a.rows(), ErrorCode::InvalidParams, "residual_scores: len(y) != rows");
    const Outcome covered = outcome(a, s);
    std::vector<std::int64_t> residual(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) residual[j] = y[j] - covered[j];
    return detail::normalized_scores(a.column_dot(residual), a.column_weights());
}

/// The t best items outside `exclude` (higher score first, then smaller index).
inline ItemSet top_t(const ScoreVector& scores, std::size_t t, const ItemSet& exclude = {}) {
    std::vector<std::size_t> candidates;
    candidates.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!exclude.contains(i)) candidates.push_back(i);
    }
    detail::require(t <= candidates.size(), ErrorCode::NotEnoughItems, "top_t: t exceeds available items");
    const auto better = [&](std::size_t x, std::size_t y) {
        const auto c = scores[x] <=> scores[y];
        return c != 0 ? c > 0 : x < y;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(t), candidates.end(),
                      better);
    candidates.resize(t);
    return ItemSet::from_unsorted(std::move(candidates));
}

struct TopK {};
struct Top2K {};
struct TopM {};
struct TopT {
    std::size_t t = 0;
};
using SelectionRule = std::variant<TopK, Top2K, TopM, TopT>;

/// Output size of a rule on an m x n instance with k defectives.
inline std::size_t resolve(const SelectionRule& rule, std::size_t n, std::size_t k, std::size_t m) {
    struct Visitor {
        std::size_t n, k, m;
        std::size_t operator()(TopK) const { return k; }
        std::size_t operator()(Top2K) const { return std::min(2 * k, n); }
        std::size_t operator()(TopM) const { return std::min(m, n); }
        std::size_t operator()(TopT r) const { return r.t; }
    };
    return std::visit(Visitor{n, k, m}, rule);
}

/// Top items by psi score.
inline ItemSet threshold_select(const BitMatrix& a, std::span<const std::int64_t> y, std::size_t k,
                                const SelectionRule& rule) {
    return top_t(psi_scores(a, y, k), resolve(rule, a.cols(), k, a.rows()));
}

/// k rounds of: add the item outside S with the best residual score. Residual correlations are
/// maintained incrementally through column popcounts.
inline ItemSet iterative_thresholding(const BitMatrix& a, std::span<const std::int64_t> y, std::size_t k) {
    detail::require(y.size() == a.rows(), ErrorCode::InvalidParams, "iterative_thresholding: len(y) != rows");
    detail::require(k <= a.cols(), ErrorCode::NotEnoughItems, "iterative_thresholding: k > n");
    if (k == 0) return {};
    const std::size_t n = a.cols();
    const BitMatrix cols = a.transposed();
    const auto weight = a.column_weights();
    std::vector<std::int64_t> dot = a.column_dot(y);
    std::vector<char> chosen(n, 0);
    std::vector<std::size_t> picked;
    picked.reserve(k);
    for (std::size_t round = 0; round < k; ++round) {
        std::size_t best = n;
        Score best_score;
        for (std::size_t i = 0; i < n; ++i) {
            if (chosen[i]) continue;
            const Score s = weight[i] == 0 ? Score{0, 1} : Score{dot[i], weight[i]};
            if (best == n || s > best_score) {
                best = i;
                best_score = s;
            }
        }
        chosen[best] = 1;
        picked.push_back(best);
        if (round + 1 == k) break;
        const auto sel = cols.row_words(best);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ci = cols.row_words(i);
            std::int64_t overlap = 0;
            for (std::size_t w = 0; w < ci.size(); ++w) overlap += std::popcount(ci[w] & sel[w]);
            dot[i] -= overlap;
        }
    }
    return ItemSet::from_unsorted(std::move(picked));
}

/// Subset Select algorithm handle: (A, y, k) -> S.
using SubsetSelector = std::function<ItemSet(const BitMatrix&, std::span<const std::int64_t>, std::size_t)>;

/// Pads the base answer S' to size m with the best residual-score items outside S'.
/// The pad has m - |S'| items, which is m - k whenever the base returns k items.
inline ItemSet then_thresholding(const SubsetSelector& base, const BitMatrix& a, std::span<const std::int64_t> y,
                                 std::size_t k) {
    const std::size_t m = a.rows();
    detail::require(m >= k, ErrorCode::InvalidParams, "then_thresholding: need m >= k");
    const ItemSet dagger = base(a, y, k);
    detail::require(dagger.size() <= k, ErrorCode::BaseOutputTooLarge, "then_thresholding: base returned > k items");
    const std::size_t pad = std::min(m - dagger.size(), a.cols() - dagger.size());
    return dagger.united(top_t(residual_scores(a, y, dagger), pad, dagger));
}

/// m - ceil(c' sqrt(m ln n)), floored at 1.
inline std::size_t split_rows_m1(std::size_t m, std::size_t n, double c_prime) {
    const double cut = std::ceil(c_prime * std::sqrt(static_cast<double>(m) * std::log(static_cast<double>(n))));
    const double m1 = static_cast<double>(m) - cut;
    return m1 < 1.0 ? std::size_t{1} : static_cast<std::size_t>(m1);
}

/// Runs the base algorithm on the first m1 tests only.
inline ItemSet split_rows(const SubsetSelector& base, const BitMatrix& a, std::span<const std::int64_t> y,
                          std::size_t k, double c_prime) {
    detail::require(y.size() == a.rows(), ErrorCode::InvalidParams, "split_rows: len(y) != rows");
    detail::require(c_prime >= 0.0, ErrorCode::InvalidParams, "split_rows: c_prime must be >= 0");
    const std::size_t m1 = split_rows_m1(a.rows(), a.cols(), c_prime);
    detail::require(m1 >= k, ErrorCode::DegenerateSplit, "split_rows: m1 < k");
    if (m1 == a.rows()) return base(a, y, k);
    return base(a.first_rows(m1), y.first(m1), k);
}

inline SubsetSelector make_threshold_selector(SelectionRule rule) {
    return [rule](const BitMatrix& a, std::span<const std::int64_t> y, std::size_t k) {
        return threshold_select(a, y, k, rule);
    };
}

inline SubsetSelector make_iterative_selector() {
    return [](const BitMatrix& a, std::span<const std::int64_t> y, std::size_t k) {
        return iterative_thresholding(a, y, k);
    };
}

inline SubsetSelector make_then_thresholding_selector(SubsetSelector base) {
    return [base = std::move(base)](const BitMatrix& a, std::span<const std::int64_t> y, std::size_t k) {
        return then_thresholding(base, a, y, k);
    };
}

inline SubsetSelector make_split_rows_selector(SubsetSelector base, double c_prime) {
    return [base = std::move(base), c_prime](const BitMatrix& a, std::span<const std::int64_t> y, std::size_t k) {
        return split_rows(base, a, y, k, c_prime);
    };
}

}  // namespace qgt
