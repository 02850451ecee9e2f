#pragma once

// Recovery of the defective set from a candidate subset S: reduce A|_S z = y, then enumerate
// binary assignments to the free columns in counter order until a weight-k 0/1 solution passes
// exact integer verification.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qgt/bit_matrix.hpp"
#include "qgt/error.hpp"
#include "qgt/exactla.hpp"
#include "qgt/item_set.hpp"
#include "qgt/model.hpp"
#include "qgt/select.hpp"

namespace qgt {

struct RecoveryConfig {
    std::size_t free_var_budget = 20;
    FieldMode field_mode = ModP{};
};

enum class RecoveryStatus { Recovered, NoBinarySolution, FreeVariableBudgetExceeded };

inline const char* to_string(RecoveryStatus s) noexcept {
    switch (s) {
        case RecoveryStatus::Recovered: return "Recovered";
        case RecoveryStatus::NoBinarySolution: return "NoBinarySolution";
        case RecoveryStatus::FreeVariableBudgetExceeded: return "FreeVariableBudgetExceeded";
    }
    return "unknown";
}

struct RecoveryReport {
    RecoveryStatus status = RecoveryStatus::NoBinarySolution;
    std::optional<ItemSet> solution;
    std::size_t free_var_count = 0;
    std::size_t rank_deficit = 0;  // |S| - rank(A|_S)
    std::uint64_t enumerated = 0;  // pin assignments tried
    bool consistent = true;
    std::vector<std::string> warnings;

    // Filled by solve_qgt.
    ItemSet subset;
    bool contains_defectives = false;
    bool correct = false;
};

namespace detail {

/// Tries pins in counter order; bit b of the counter pins free_cols[b]. Each candidate is built
/// pivot row by pivot row and dropped as soon as an entry leaves {0, 1}.
template <class T>
void enumerate_pins(const RrefResult<T>& r, const BitMatrix& sub, std::span<const std::int64_t> y, std::size_t k,
                    RecoveryReport& report) {
    const auto ops = ops_for(r);
    const std::size_t nf = r.free_cols.size();
    const std::size_t rank = r.rank();
    // Nonzero free coefficients of each pivot row, as (bit, value).
    std::vector<std::vector<std::pair<std::size_t, T>>> coef(rank);
    for (std::size_t q = 0; q < rank; ++q) {
        for (std::size_t b = 0; b < nf; ++b) {
            if (r.reduced(q, r.free_cols[b]) != 0) coef[q].emplace_back(b, r.reduced(q, r.free_cols[b]));
        }
    }
    const T zero{0};
    const T one{1};
    std::vector<std::int64_t> z(sub.cols(), 0);
    const std::uint64_t total = std::uint64_t{1} << nf;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        ++report.enumerated;
        std::size_t weight = static_cast<std::size_t>(std::popcount(mask));
        if (weight > k) continue;
        bool ok = true;
        for (std::size_t q = 0; q < rank && ok; ++q) {
            T acc = r.rhs[q];
            for (const auto& [b, c] : coef[q]) {
                if ((mask >> b) & 1U) acc = ops.sub(acc, c);
            }
            if (acc == zero) {
                z[r.pivot_cols[q]] = 0;
            } else if (acc == one) {
                z[r.pivot_cols[q]] = 1;
                ok = ++weight <= k;
            } else {
                ok = false;
            }
        }
        if (!ok || weight != k) continue;
        for (std::size_t b = 0; b < nf; ++b) z[r.free_cols[b]] = static_cast<std::int64_t>((mask >> b) & 1U);
        if (!verify_integer(sub, z, y)) continue;
        std::vector<std::size_t> local;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (z[i] == 1) local.push_back(i);
        }
        report.status = RecoveryStatus::Recovered;
        report.solution = ItemSet(std::move(local));
        return;
    }
}

}  // namespace detail

/// Finds a weight-k binary z on S with A|_S z = y. Failures are reported through the status.
inline RecoveryReport recover_from_submatrix(const BitMatrix& a, std::span<const std::int64_t> y, std::size_t k,
                                             const ItemSet& s, const RecoveryConfig& cfg = {}) {
    detail::require(!s.empty(), ErrorCode::InvalidParams, "recover_from_submatrix: empty S");
    detail::require(y.size() == a.rows(), ErrorCode::InvalidParams, "recover_from_submatrix: len(y) != rows");
    detail::require(s.bound() <= a.cols(), ErrorCode::IndexOutOfRange, "recover_from_submatrix: S index >= n");
    RecoveryReport report;
    if (s.size() > a.rows()) report.warnings.emplace_back("|S| exceeds the number of tests");

    const BitMatrix sub = a.select_columns(s);
    const AnyRref any = rref(sub, y, cfg.field_mode);
    std::visit(
        [&](const auto& r) {
            report.free_var_count = r.free_cols.size();
            report.rank_deficit = s.size() - r.rank();
            report.consistent = r.consistent;
            if (!r.consistent) return;
            if (r.free_cols.size() > cfg.free_var_budget || r.free_cols.size() >= 64) {
                report.status = RecoveryStatus::FreeVariableBudgetExceeded;
                return;
            }
            detail::enumerate_pins(r, sub, y, k, report);
        },
        any);
    if (report.solution) {
        std::vector<std::size_t> global;
        global.reserve(report.solution->size());
        for (std::size_t local : *report.solution) global.push_back(s[local]);
        report.solution = ItemSet(std::move(global));
    }
    return report;
}

/// Subset Select followed by recovery, scored against the planted defectives.
inline RecoveryReport solve_qgt(const Instance& inst, const SubsetSelector& subset_alg,
                                const RecoveryConfig& cfg = {}) {
    ItemSet s = subset_alg(inst.matrix, inst.outcome, inst.k);
    RecoveryReport report = recover_from_submatrix(inst.matrix, inst.outcome, inst.k, s, cfg);
    report.contains_defectives = s.includes(inst.defectives);
    report.correct = report.solution && *report.solution == inst.defectives;
    report.subset = std::move(s);
    return report;
}

namespace detail {

/// C(n, k), saturating at the uint64 maximum.
inline std::uint64_t binom_saturating(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
        if (c > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(c);
}

}  // namespace detail

inline constexpr std::uint64_t kBruteForceLimit = 10'000'000;

/// Every weight-k set T with outcome(A, T) = y, in lexicographic order.
inline std::vector<ItemSet> brute_force_qgt(const BitMatrix& a, std::span<const std::int64_t> y, std::size_t k) {
    detail::require(y.size() == a.rows(), ErrorCode::InvalidParams, "brute_force_qgt: len(y) != rows");
    detail::require(detail::binom_saturating(a.cols(), k) <= kBruteForceLimit, ErrorCode::TooLarge,
                    "brute_force_qgt: C(n, k) exceeds 1e7");
    std::vector<ItemSet> found;
    for (std::int64_t v : y) {
        if (v < 0 || v > static_cast<std::int64_t>(k)) return found;
    }
    const std::size_t n = a.cols();
    const std::size_t m = a.rows();
    const BitMatrix cols = a.transposed();
    std::vector<std::int64_t> remaining(y.begin(), y.end());
    std::vector<std::size_t> chosen;

    // Depth-first over increasing indices; a branch dies once some test is overfilled or can no
    // longer be filled by the picks left.
    auto dfs = [&](auto&& self, std::size_t start) -> void {
        const auto left = static_cast<std::int64_t>(k - chosen.size());
        for (std::size_t j = 0; j < m; ++j) {
            if (remaining[j] < 0 || remaining[j] > left) return;
        }
        if (left == 0) {
            found.emplace_back(chosen);
            return;
        }
        for (std::size_t i = start; i + static_cast<std::size_t>(left) <= n; ++i) {
            for (std::size_t j = 0; j < m; ++j) remaining[j] -= cols.get(i, j) ? 1 : 0;
            chosen.push_back(i);
            self(self, i + 1);
            chosen.pop_back();
            for (std::size_t j = 0; j < m; ++j) remaining[j] += cols.get(i, j) ? 1 : 0;
        }
    };
    dfs(dfs, 0);
    return found;
}

}  // namespace qgt
