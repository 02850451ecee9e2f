#pragma once

// Experiment runner: seeded trials, m-sweeps with worker threads, aggregation, CSV output, and the
// Monte Carlo / exact-arithmetic validators.
//
// Per-trial seeds are derived by chaining, so a trial's instance depends only on its coordinates
// and never on scheduling:
//   h = SplitMix64(master_seed).next()
//   h = mix64(h ^ fnv1a64(algorithm_id)); h = mix64(h ^ m); h = mix64(h ^ trial_idx)

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qgt/bounds.hpp"
#include "qgt/error.hpp"
#include "qgt/exactla.hpp"
#include "qgt/model.hpp"
#include "qgt/recover.hpp"
#include "qgt/select.hpp"
#include "qgt/splitmix.hpp"

namespace qgt {

// ---------------------------------------------------------------------------------------------
// Algorithms

/// A named Subset Select algorithm; split_rows wraps a plain base algorithm.
struct AlgorithmSpec {
    std::string base;  // k_thresh, two_k_thresh, m_thresh, iterative, iterative_then_thresh, k_thresh_then_thresh
    bool split = false;
    double c_prime = 1.0;

    /// Canonical id, e.g. "m_thresh" or "split_rows(m_thresh,1.5)". Feeds seed derivation.
    std::string id() const {
        if (!split) return base;
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, c_prime);
        return "split_rows(" + base + "," + std::string(buf, res.ptr) + ")";
    }

    /// True when the algorithm pads a QGT answer to m items and so needs m >= k.
    bool pads_to_m() const { return base == "iterative_then_thresh" || base == "k_thresh_then_thresh"; }

    friend bool operator==(const AlgorithmSpec&, const AlgorithmSpec&) = default;
};

inline constexpr std::string_view kAlgorithmNames[] = {"k_thresh",  "two_k_thresh",          "m_thresh",
                                                       "iterative", "iterative_then_thresh", "k_thresh_then_thresh"};

inline bool is_algorithm_name(std::string_view name) {
    return std::find(std::begin(kAlgorithmNames), std::end(kAlgorithmNames), name) != std::end(kAlgorithmNames);
}

namespace detail {

inline SubsetSelector base_selector(const std::string& name) {
    if (name == "k_thresh") return make_threshold_selector(TopK{});
    if (name == "two_k_thresh") return make_threshold_selector(Top2K{});
    if (name == "m_thresh") return make_threshold_selector(TopM{});
    if (name == "iterative") return make_iterative_selector();
    if (name == "iterative_then_thresh") return make_then_thresholding_selector(make_iterative_selector());
    if (name == "k_thresh_then_thresh") return make_then_thresholding_selector(make_threshold_selector(TopK{}));
    throw Error(ErrorCode::InvalidSpec, "unknown algorithm: " + name);
}

}  // namespace detail

inline SubsetSelector make_selector(const AlgorithmSpec& alg) {
    SubsetSelector base = detail::base_selector(alg.base);
    return alg.split ? make_split_rows_selector(std::move(base), alg.c_prime) : base;
}

/// Accepts a plain name or the canonical "split_rows(base,c)" form.
inline AlgorithmSpec parse_algorithm_id(std::string_view text) {
    AlgorithmSpec alg;
    constexpr std::string_view prefix = "split_rows(";
    if (text.substr(0, prefix.size()) == prefix && !text.empty() && text.back() == ')') {
        const std::string_view inner = text.substr(prefix.size(), text.size() - prefix.size() - 1);
        const auto comma = inner.find(',');
        detail::require(comma != std::string_view::npos, ErrorCode::InvalidSpec, "split_rows: expected (base,c_prime)");
        alg.base = std::string(inner.substr(0, comma));
        const std::string_view num = inner.substr(comma + 1);
        const auto res = std::from_chars(num.data(), num.data() + num.size(), alg.c_prime);
        detail::require(res.ec == std::errc{} && res.ptr == num.data() + num.size(), ErrorCode::InvalidSpec,
                        "split_rows: bad c_prime");
        alg.split = true;
    } else {
        alg.base = std::string(text);
    }
    detail::require(is_algorithm_name(alg.base), ErrorCode::InvalidSpec, "unknown algorithm: " + alg.base);
    detail::require(!alg.split || (std::isfinite(alg.c_prime) && alg.c_prime >= 0.0), ErrorCode::InvalidSpec,
                    "split_rows: c_prime must be a finite value >= 0");
    return alg;
}

// ---------------------------------------------------------------------------------------------
// Experiment specification

struct ExperimentSpec {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::size_t> m_grid;
    std::vector<AlgorithmSpec> algorithms;
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;
    RecoveryConfig recovery;
    bool run_recovery = true;
};

inline void validate(const ExperimentSpec& spec) {
    using detail::require;
    constexpr auto bad = ErrorCode::InvalidSpec;
    require(spec.k > 0 && spec.k < spec.n, bad, "spec: need 0 < k < n");
    require(!spec.m_grid.empty(), bad, "spec: m_grid is empty");
    require(spec.m_grid.front() >= 1, bad, "spec: m must be >= 1");
    require(std::adjacent_find(spec.m_grid.begin(), spec.m_grid.end(), std::greater_equal<>()) == spec.m_grid.end(),
            bad, "spec: m_grid must be strictly ascending");
    require(!spec.algorithms.empty(), bad, "spec: no algorithms");
    require(spec.trials >= 1, bad, "spec: trials must be >= 1");
    for (const auto& alg : spec.algorithms) {
        require(is_algorithm_name(alg.base), bad, "spec: unknown algorithm " + alg.base);
        for (std::size_t m : spec.m_grid) {
            if (alg.pads_to_m()) require(m >= spec.k, bad, "spec: " + alg.id() + " needs m >= k");
            if (alg.split) {
                const std::size_t m1 = split_rows_m1(m, spec.n, alg.c_prime);
                require(m1 >= spec.k, bad, "spec: " + alg.id() + " leaves fewer than k rows at m = " + std::to_string(m));
            }
        }
    }
    if (const auto* mp = std::get_if<ModP>(&spec.recovery.field_mode)) {
        require(mp->prime > 2 && is_prime(mp->prime), bad, "spec: recovery prime must be a prime > 2");
    }
}

namespace detail {

inline AlgorithmSpec algorithm_from_json(const nlohmann::json& j) {
    if (j.is_string()) return parse_algorithm_id(j.get<std::string>());
    require(j.is_object() && j.size() == 1 && j.contains("split_rows"), ErrorCode::InvalidSpec,
            "spec: algorithm must be a name or {\"split_rows\": {...}}");
    const auto& body = j.at("split_rows");
    AlgorithmSpec alg;
    alg.base = body.at("base").get<std::string>();
    alg.split = true;
    alg.c_prime = body.value("c_prime", 1.0);
    require(is_algorithm_name(alg.base), ErrorCode::InvalidSpec, "spec: unknown split_rows base " + alg.base);
    require(std::isfinite(alg.c_prime) && alg.c_prime >= 0.0, ErrorCode::InvalidSpec, "spec: bad c_prime");
    return alg;
}

inline FieldMode field_mode_from_json(const nlohmann::json& r) {
    const std::string field = r.value("field", std::string("modp"));
    if (field == "modp") return ModP{r.value("prime", kDefaultPrime)};
    if (field == "rational") return ExactRational{r.value("exact_cap", kDefaultExactCap)};
    throw Error(ErrorCode::InvalidSpec, "spec: recovery.field must be \"modp\" or \"rational\"");
}

}  // namespace detail

/// JSON mirror of ExperimentSpec:
/// {"n", "k", "m_grid", "algorithms", "trials", "master_seed", "run_recovery",
///  "recovery": {"free_var_budget", "field": "modp"|"rational", "prime", "exact_cap"}}
inline ExperimentSpec spec_from_json(const nlohmann::json& j) {
    ExperimentSpec spec;
    try {
        spec.n = j.at("n").get<std::size_t>();
        spec.k = j.at("k").get<std::size_t>();
        spec.m_grid = j.at("m_grid").get<std::vector<std::size_t>>();
        for (const auto& a : j.at("algorithms")) spec.algorithms.push_back(detail::algorithm_from_json(a));
        spec.trials = j.value("trials", std::size_t{1});
        spec.master_seed = j.value("master_seed", std::uint64_t{0});
        spec.run_recovery = j.value("run_recovery", true);
        if (j.contains("recovery")) {
            const auto& r = j.at("recovery");
            spec.recovery.free_var_budget = r.value("free_var_budget", std::size_t{20});
            spec.recovery.field_mode = detail::field_mode_from_json(r);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("spec: ") + e.what());
    }
    validate(spec);
    return spec;
}

// ---------------------------------------------------------------------------------------------
// Trials

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view algorithm_id, std::uint64_t m,
                                 std::uint64_t trial) {
    std::uint64_t h = SplitMix64(master).next();
    h = mix64(h ^ fnv1a64(algorithm_id));
    h = mix64(h ^ m);
    h = mix64(h ^ trial);
    return h;
}

struct TrialRecord {
    std::string algorithm;
    std::size_t n = 0, k = 0, m = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t subset_size = 0;
    bool contains_defectives = false;
    std::size_t rank_deficit = 0;
    std::size_t free_vars = 0;
    bool recovered = false;
    std::string status;  // recovery status, or "skipped"
    std::int64_t wall_time_us = 0;

    /// Equality on everything but the timing column.
    bool same_outcome(const TrialRecord& o) const {
        return algorithm == o.algorithm && n == o.n && k == o.k && m == o.m && trial == o.trial && seed == o.seed &&
               subset_size == o.subset_size && contains_defectives == o.contains_defectives &&
               rank_deficit == o.rank_deficit && free_vars == o.free_vars && recovered == o.recovered &&
               status == o.status;
    }
};

inline TrialRecord run_trial(const ExperimentSpec& spec, const AlgorithmSpec& alg, std::size_t m,
                             std::size_t trial_idx) {
    detail::require(trial_idx < spec.trials, ErrorCode::InvalidParams, "run_trial: trial index out of range");
    const auto start = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.algorithm = alg.id();
    rec.n = spec.n;
    rec.k = spec.k;
    rec.m = m;
    rec.trial = trial_idx;
    rec.seed = derive_seed(spec.master_seed, rec.algorithm, m, trial_idx);

    const Instance inst = generate_instance(spec.n, spec.k, m, rec.seed);
    const ItemSet s = make_selector(alg)(inst.matrix, inst.outcome, inst.k);
    rec.subset_size = s.size();
    rec.contains_defectives = s.includes(inst.defectives);
    if (spec.run_recovery && !s.empty()) {
        const RecoveryReport r = recover_from_submatrix(inst.matrix, inst.outcome, inst.k, s, spec.recovery);
        rec.rank_deficit = r.rank_deficit;
        rec.free_vars = r.free_var_count;
        rec.recovered = r.solution && *r.solution == inst.defectives;
        rec.status = to_string(r.status);
    } else {
        rec.rank_deficit = s.empty() ? 0 : s.size() - rank(inst.matrix.select_columns(s), spec.recovery.field_mode);
        rec.free_vars = rec.rank_deficit;
        rec.status = "skipped";
    }
    rec.wall_time_us = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start)
                           .count();
    return rec;
}

/// Runs every (algorithm, m, trial) task; records come back in that order whatever the worker count.
inline std::vector<TrialRecord> run_trials(const ExperimentSpec& spec, std::size_t workers = 1) {
    validate(spec);
    struct Task {
        std::size_t alg, m, trial;
    };
    std::vector<Task> tasks;
    for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
        for (std::size_t m : spec.m_grid) {
            for (std::size_t t = 0; t < spec.trials; ++t) tasks.push_back({a, m, t});
        }
    }
    std::vector<TrialRecord> out(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                out[i] = run_trial(spec, spec.algorithms[tasks[i].alg], tasks[i].m, tasks[i].trial);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = tasks.size();
            }
        }
    };
    workers = std::max<std::size_t>(1, std::min(workers, tasks.size()));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Aggregation

struct Interval {
    double lo = 0, hi = 0;
    double halfwidth() const { return (hi - lo) / 2; }
};

/// Wilson score interval; z = 1.96 gives 95%.
inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054) {
    if (trials == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct SweepRow {
    std::string algorithm;
    std::size_t n = 0, k = 0, m = 0, trials = 0;
    double subset_success_rate = 0;
    double subset_ci_halfwidth = 0;
    std::optional<double> full_recovery_rate;  // absent when recovery was not run
    double mean_rank_deficit = 0;
    std::size_t max_rank_deficit = 0;
    double mean_free_vars = 0;
    std::uint64_t master_seed = 0;
};

inline std::vector<SweepRow> aggregate(const ExperimentSpec& spec, const std::vector<TrialRecord>& records) {
    std::vector<SweepRow> rows;
    for (const auto& alg : spec.algorithms) {
        const std::string id = alg.id();
        for (std::size_t m : spec.m_grid) {
            SweepRow row;
            row.algorithm = id;
            row.n = spec.n;
            row.k = spec.k;
            row.m = m;
            row.master_seed = spec.master_seed;
            std::size_t hits = 0, recovered = 0, deficit_sum = 0, free_sum = 0;
            for (const auto& r : records) {
                if (r.algorithm != id || r.m != m) continue;
                ++row.trials;
                hits += r.contains_defectives ? 1 : 0;
                recovered += r.recovered ? 1 : 0;
                deficit_sum += r.rank_deficit;
                free_sum += r.free_vars;
                row.max_rank_deficit = std::max(row.max_rank_deficit, r.rank_deficit);
            }
            if (row.trials > 0) {
                const double t = static_cast<double>(row.trials);
                row.subset_success_rate = static_cast<double>(hits) / t;
                row.subset_ci_halfwidth = wilson_interval(hits, row.trials).halfwidth();
                if (spec.run_recovery) row.full_recovery_rate = static_cast<double>(recovered) / t;
                row.mean_rank_deficit = static_cast<double>(deficit_sum) / t;
                row.mean_free_vars = static_cast<double>(free_sum) / t;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline std::vector<SweepRow> sweep(const ExperimentSpec& spec, std::size_t workers = 1,
                                   std::vector<TrialRecord>* records = nullptr) {
    auto recs = run_trials(spec, workers);
    auto rows = aggregate(spec, recs);
    if (records != nullptr) *records = std::move(recs);
    return rows;
}

/// Smallest grid m whose rate reaches `level` (0.9 reads "almost all instances").
inline std::optional<std::size_t> empirical_threshold(const std::vector<SweepRow>& rows, std::string_view algorithm,
                                                      bool use_recovery = false, double level = 0.9) {
    for (const auto& r : rows) {
        if (r.algorithm != algorithm) continue;
        const double rate = use_recovery ? r.full_recovery_rate.value_or(0.0) : r.subset_success_rate;
        if (rate >= level) return r.m;
    }
    return std::nullopt;
}

namespace detail {

inline std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace detail

inline constexpr std::string_view kSweepCsvHeader =
    "algorithm,n,k,m,trials,subset_success_rate,subset_ci_halfwidth,full_recovery_rate,mean_rank_deficit,"
    "max_rank_deficit,mean_free_vars,master_seed";

/// Algorithm ids may contain commas (split_rows), so that column is always quoted.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << kSweepCsvHeader << '\n';
    for (const auto& r : rows) {
        os << '"' << r.algorithm << "\"," << r.n << ',' << r.k << ',' << r.m << ',' << r.trials << ','
           << detail::fixed(r.subset_success_rate) << ',' << detail::fixed(r.subset_ci_halfwidth) << ','
           << (r.full_recovery_rate ? detail::fixed(*r.full_recovery_rate) : std::string()) << ','
           << detail::fixed(r.mean_rank_deficit) << ',' << r.max_rank_deficit << ',' << detail::fixed(r.mean_free_vars)
           << ',' << r.master_seed << '\n';
    }
}

inline constexpr std::string_view kTrialCsvHeader =
    "algorithm,n,k,m,trial,seed,subset_size,contains_D,rank_deficit,free_vars,recovered,status,wall_time_us";

inline void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    os << kTrialCsvHeader << '\n';
    for (const auto& r : records) {
        os << '"' << r.algorithm << "\"," << r.n << ',' << r.k << ',' << r.m << ',' << r.trial << ',' << r.seed << ','
           << r.subset_size << ',' << (r.contains_defectives ? 1 : 0) << ',' << r.rank_deficit << ',' << r.free_vars
           << ',' << (r.recovered ? 1 : 0) << ',' << r.status << ',' << r.wall_time_us << '\n';
    }
}

// ---------------------------------------------------------------------------------------------
// Monte Carlo validators

struct FractionEstimate {
    std::size_t hits = 0;
    std::size_t trials = 0;
    double fraction() const { return trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials); }
    /// Binomial standard error of the fraction.
    double std_error() const {
        if (trials == 0) return 0.0;
        const double p = fraction();
        return std::sqrt(p * (1 - p) / static_cast<double>(trials));
    }
};

namespace detail {

inline FieldMode rank_mode_for(std::size_t dim, std::size_t exact_cap) {
    return dim <= exact_cap ? FieldMode{ExactRational{exact_cap}} : FieldMode{ModP{}};
}

}  // namespace detail

/// Fraction of m x m Bernoulli(1/2) matrices with rank < m. Ranks are exact over Q when m is within
/// the exact cap. Exhaustive mode walks all 2^(m^2) matrices (m <= 4).
inline FractionEstimate mc_singularity(std::size_t m, std::size_t trials, std::uint64_t seed, bool exhaustive,
                                       std::size_t exact_cap = kDefaultExactCap) {
    detail::require(m >= 1, ErrorCode::InvalidParams, "mc_singularity: m must be >= 1");
    const FieldMode mode = detail::rank_mode_for(m, exact_cap);
    FractionEstimate est;
    if (exhaustive) {
        detail::require(m <= 4, ErrorCode::InvalidParams, "mc_singularity: exhaustive mode needs m <= 4");
        const std::uint64_t total = std::uint64_t{1} << (m * m);
        for (std::uint64_t code = 0; code < total; ++code) {
            BitMatrix a(m, m);
            for (std::size_t t = 0; t < m * m; ++t) a.set(t / m, t % m, (code >> t) & 1U);
            est.hits += rank(a, mode) < m ? 1 : 0;
        }
        est.trials = total;
        return est;
    }
    SplitMix64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const BitMatrix a = random_bit_matrix(m, m, rng);
        est.hits += rank(a, mode) < m ? 1 : 0;
    }
    est.trials = trials;
    return est;
}

struct RankLemmaResult {
    FractionEstimate estimate;
    double bound = 0;
};

/// V = span(e_1..e_k1) in R^m1 plus l uniform binary vectors U; estimates Pr[dim(V + span U) < k2].
inline RankLemmaResult mc_rank_lemma(std::size_t m1, std::size_t k1, std::size_t l, std::size_t k2,
                                     std::size_t trials, std::uint64_t seed,
                                     std::size_t exact_cap = kDefaultExactCap) {
    detail::require(k1 <= k2 && k2 <= m1 && m1 >= 1, ErrorCode::InvalidParams,
                    "mc_rank_lemma: need k1 <= k2 <= m1");
    RankLemmaResult out;
    out.bound = f2_rank_bound(static_cast<std::int64_t>(m1), static_cast<std::int64_t>(k1),
                              static_cast<std::int64_t>(k2), static_cast<std::int64_t>(l));
    const std::size_t rows = k1 + l;
    const FieldMode mode = detail::rank_mode_for(std::max(rows, m1), exact_cap);
    SplitMix64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        std::size_t dim = k1;
        if (l > 0) {
            const BitMatrix u = random_bit_matrix(l, m1, rng);
            IntMatrix stacked(rows, m1, 0);
            for (std::size_t i = 0; i < k1; ++i) stacked(i, i) = 1;
            for (std::size_t i = 0; i < l; ++i) {
                for (std::size_t j = 0; j < m1; ++j) stacked(k1 + i, j) = u.get(i, j) ? 1 : 0;
            }
            dim = rank(stacked, mode);
        }
        out.estimate.hits += dim < k2 ? 1 : 0;
    }
    out.estimate.trials = trials;
    return out;
}

struct MomentSummary {
    std::size_t count = 0;
    double mean = 0;
    double variance = 0;       // pooled sample variance of individual scores
    double expected_mean = 0;
    double expected_variance = 0;
    double std_error = 0;      // of the mean; from per-instance means when there are >= 2 instances
    double z = 0;              // (mean - expected_mean) / std_error
};

struct ScoreDistribution {
    MomentSummary defective;
    MomentSummary non_defective;
};

namespace detail {

struct MomentAccumulator {
    std::size_t count = 0;
    double sum = 0, sum_sq = 0;
    std::vector<double> instance_means;

    MomentSummary finish(double expected_mean, double expected_variance) const {
        MomentSummary s;
        s.count = count;
        s.expected_mean = expected_mean;
        s.expected_variance = expected_variance;
        if (count == 0) return s;
        const double c = static_cast<double>(count);
        s.mean = sum / c;
        s.variance = count > 1 ? (sum_sq - c * s.mean * s.mean) / (c - 1) : 0.0;
        const std::size_t g = instance_means.size();
        if (g >= 2) {
            // Scores within one instance share y and are correlated; treat instances as clusters.
            double mm = 0, ss = 0;
            for (double v : instance_means) mm += v;
            mm /= static_cast<double>(g);
            for (double v : instance_means) ss += (v - mm) * (v - mm);
            s.std_error = std::sqrt(ss / static_cast<double>(g - 1) / static_cast<double>(g));
        } else {
            s.std_error = std::sqrt(s.variance / c);
        }
        s.z = s.std_error > 0 ? (s.mean - expected_mean) / s.std_error : 0.0;
        return s;
    }
};

}  // namespace detail

/// Moments of psi over `trials` fresh instances. Non-defective scores are Bin(mk, 1/2);
/// defective scores are m + Bin(m(k-1), 1/2).
inline ScoreDistribution mc_score_distribution(std::size_t n, std::size_t k, std::size_t m, std::size_t trials,
                                               std::uint64_t seed) {
    detail::MomentAccumulator def, non;
    for (std::size_t t = 0; t < trials; ++t) {
        const Instance inst = generate_instance(n, k, m, derive_seed(seed, "scores", m, t));
        const auto psi = psi_scores(inst.matrix, inst.outcome, k);
        double dsum = 0, nsum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = static_cast<double>(psi[i].num);
            auto& acc = inst.defectives.contains(i) ? def : non;
            acc.sum += v;
            acc.sum_sq += v * v;
            ++acc.count;
            (inst.defectives.contains(i) ? dsum : nsum) += v;
        }
        def.instance_means.push_back(dsum / static_cast<double>(k));
        non.instance_means.push_back(nsum / static_cast<double>(n - k));
    }
    const double md = static_cast<double>(m), kd = static_cast<double>(k);
    return {def.finish(md * (kd + 1) / 2, md * (kd - 1) / 4), non.finish(md * kd / 2, md * kd / 4)};
}

// ---------------------------------------------------------------------------------------------
// Exact bound verification

struct BoundsCheckSpec {
    std::uint64_t collision_max = 512;          // N in [2, collision_max]
    std::vector<std::uint64_t> point_mass_ns = {64, 128, 192, 256, 320, 384, 448, 512};
    std::uint64_t stirling_max = 512;           // all M <= N <= stirling_max
    std::uint64_t tail_min = 64, tail_max = 512;  // t in [ceil(sqrt N), floor(N/4)]
    double c_tail = kDefaultTailConstant;
};

struct BoundCheck {
    std::string name;
    std::size_t checked = 0;
    std::size_t violations = 0;
    std::string first_violation;
};

struct BoundsReport {
    std::vector<BoundCheck> checks;
    bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.violations == 0; });
    }
};

namespace detail {

inline void record(BoundCheck& c, bool holds, const std::string& where) {
    ++c.checked;
    if (holds) return;
    if (c.violations++ == 0) c.first_violation = where;
}

inline std::uint64_t ceil_sqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r < n) ++r;
    while (r > 0 && (r - 1) * (r - 1) >= n) --r;
    return r;
}

/// C(N, a) for a = 0..N.
inline std::vector<BigInt> binomial_row(std::uint64_t n) {
    std::vector<BigInt> row(n + 1);
    row[0] = 1;
    for (std::uint64_t a = 1; a <= n; ++a) row[a] = row[a - 1] * (n - a + 1) / a;
    return row;
}

}  // namespace detail

/// Exact big-integer domination checks for the binomial inequalities.
inline BoundsReport verify_bounds(const BoundsCheckSpec& spec = {}) {
    BoundsReport rep;
    auto named = [](const char* name) {
        BoundCheck c;
        c.name = name;
        return c;
    };
    BoundCheck collision = named("collision"), point_mass = named("point_mass"), stirling = named("stirling"),
               tail = named("tail");

    for (std::uint64_t n = 2; n <= spec.collision_max; ++n) {
        detail::record(collision, dyadic_le(binom_exact(2 * n, n), 2 * n, collision_bound(n)), "N=" + std::to_string(n));
    }
    for (std::uint64_t n : spec.point_mass_ns) {
        const auto row = detail::binomial_row(n);
        for (std::uint64_t t = detail::ceil_sqrt(n); 4 * t <= n; ++t) {
            if (n % 2 != 0) continue;  // N/2 + t must be an integer
            detail::record(point_mass, dyadic_le(row[n / 2 + t], n, point_mass_bound(n, t)),
                           "N=" + std::to_string(n) + " t=" + std::to_string(t));
        }
    }
    for (std::uint64_t n = 1; n <= spec.stirling_max; ++n) {
        const auto row = detail::binomial_row(n);
        for (std::uint64_t m = 0; m <= n; ++m) {
            detail::record(stirling, dyadic_le(row[m], 0, stirling_binom_bound(n, m)),
                           "N=" + std::to_string(n) + " M=" + std::to_string(m));
        }
    }
    for (std::uint64_t n = spec.tail_min; n <= spec.tail_max; ++n) {
        const auto row = detail::binomial_row(n);
        // suffix[a] = sum of C(N, b) for b >= a
        std::vector<BigInt> suffix(n + 2, 0);
        for (std::uint64_t a = n + 1; a-- > 0;) suffix[a] = suffix[a + 1] + row[a];
        for (std::uint64_t t = detail::ceil_sqrt(n); 4 * t <= n; ++t) {
            const std::uint64_t first = (n + 2 * t) / 2 + 1;  // smallest a with 2a > N + 2t
            const BigInt& mass = first <= n ? suffix[first] : suffix[n + 1];
            detail::record(tail, dyadic_le(mass, n, tail_bound(n, t, spec.c_tail)),
                           "N=" + std::to_string(n) + " t=" + std::to_string(t));
        }
    }
    rep.checks = {collision, point_mass, stirling, tail};
    return rep;
}

}  // namespace qgt
