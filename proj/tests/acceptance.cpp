// Acceptance gate: one PASS/FAIL line per criterion; exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qgt/qgt.hpp"

using namespace qgt;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Verdict()>& body) {
    const auto start = Clock::now();
    Verdict o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double took = seconds_since(start);
    char timing[96];
    std::snprintf(timing, sizeof timing, "%.2fs (budget %.0fs)", took, budget_s);
    const bool pass = o.pass && took < budget_s;
    if (o.pass && !pass) o.detail += "; over time budget";
    failures += pass ? 0 : 1;
    std::printf("%s criterion %d: %s -- %s; %s\n", pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), timing);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// psi straight from the per-test definition, independent of the closed form.
std::vector<std::int64_t> psi_direct(const Instance& inst) {
    std::vector<std::int64_t> out(inst.n, 0);
    const auto k = static_cast<std::int64_t>(inst.k);
    for (std::size_t j = 0; j < inst.m; ++j) {
        for (std::size_t i = 0; i < inst.n; ++i) out[i] += inst.matrix.get(j, i) ? inst.outcome[j] : k - inst.outcome[j];
    }
    return out;
}

Verdict oracle_equivalence() {
    const SubsetSelector full = [](const BitMatrix& a, std::span<const std::int64_t>, std::size_t) {
        return ItemSet::range(a.cols());
    };
    int unique = 0, bad = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Instance inst = generate_instance(14, 3, 14, seed);
        const auto oracle = brute_force_qgt(inst.matrix, inst.outcome, 3);
        const auto r = solve_qgt(inst, full);
        bool ok = !oracle.empty() && r.status == RecoveryStatus::Recovered && r.solution->size() == 3 &&
                  outcome(inst.matrix, *r.solution) == inst.outcome;
        if (ok && oracle.size() == 1) {
            ++unique;
            ok = *r.solution == oracle.front();
        }
        bad += ok ? 0 : 1;
    }
    return {bad == 0, fmt("%d/200 mismatches, %d unique instances", bad, unique)};
}

Verdict psi_invariants() {
    constexpr std::size_t n = 200, k = 10, m = 100, trials = 100;
    constexpr std::uint64_t seed = 2024;
    int violations = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const Instance inst = generate_instance(n, k, m, derive_seed(seed, "scores", m, t));
        const auto psi = psi_scores(inst.matrix, inst.outcome, k);
        const auto direct = psi_direct(inst);
        for (std::size_t i = 0; i < n; ++i) {
            const std::int64_t v = psi[i].num;
            if (psi[i].den != 1 || v != direct[i]) ++violations;
            if (v < 0 || v > static_cast<std::int64_t>(m * k)) ++violations;
            if (inst.defectives.contains(i) && v < static_cast<std::int64_t>(m)) ++violations;
        }
    }
    // Same instances: mc_score_distribution derives its seeds identically.
    const auto d = mc_score_distribution(n, k, m, trials, seed);
    const bool moments = std::abs(d.defective.z) <= 4 && std::abs(d.non_defective.z) <= 4;
    return {violations == 0 && moments,
            fmt("%d invariant violations; defective mean %.3f (z %.2f), non-defective mean %.3f (z %.2f)", violations,
                d.defective.mean, d.defective.z, d.non_defective.mean, d.non_defective.z)};
}

Verdict bound_domination() {
    const BoundsReport rep = verify_bounds();
    std::string detail;
    for (const auto& c : rep.checks) {
        detail += fmt("%s %zu/%zu ok; ", c.name.c_str(), c.checked - c.violations, c.checked);
    }
    return {rep.ok(), detail.substr(0, detail.size() - 2)};
}

Verdict rank_lemma() {
    const auto big = mc_rank_lemma(24, 8, 8, 16, 10000, 7);
    constexpr std::size_t m1 = 12, t = 6, samples = 10000;
    const auto single = mc_rank_lemma(m1, t, 1, t + 1, samples, 8);
    const double p = std::ldexp(1.0, static_cast<int>(t) - static_cast<int>(m1));
    const double sigma = std::sqrt(p * (1 - p) / samples);
    const double emp = single.estimate.fraction();
    const bool ok = big.estimate.fraction() <= big.bound && std::abs(emp - p) <= 3 * sigma &&
                    emp <= single.bound + 3 * sigma;
    return {ok, fmt("(24,8,8,16): %.5f <= bound %.5f; single vector: %.5f vs 2^(t-m1) = %.5f (sigma %.5f)",
                    big.estimate.fraction(), big.bound, emp, p, sigma)};
}

Verdict singularity() {
    const auto two = mc_singularity(2, 0, 0, true);
    const auto big = mc_singularity(25, 2000, 25, false);
    return {two.hits == 10 && two.trials == 16 && big.fraction() <= 0.01,
            fmt("m=2 exhaustive %zu/%zu; m=25 %zu/%zu singular", two.hits, two.trials, big.hits, big.trials)};
}

Verdict consistency() {
    constexpr std::size_t n = 40, m = 20, k = 3;
    SplitMix64 rng(6);
    int checked = 0, bad = 0;
    for (std::uint64_t trial = 0; trial < 500; ++trial) {
        const Instance inst = generate_instance(n, k, m, derive_seed(6, "consistency", m, trial));
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < n; ++i) {
            if (!inst.defectives.contains(i)) pool.push_back(i);
        }
        const std::size_t size = 1 + rng.uniform_below(6);
        std::vector<std::size_t> pick;
        for (std::size_t t = 0; t < size; ++t) {
            std::swap(pool[t], pool[t + rng.uniform_below(pool.size() - t)]);
            pick.push_back(pool[t]);
        }
        const ItemSet r = ItemSet::from_unsorted(pick);
        BitMatrix b = inst.matrix;
        for (auto i : r) {
            for (std::size_t j = 0; j < m; ++j) b.set(j, i, rng.next() & 1U);
        }
        const auto out_a = threshold_select(inst.matrix, inst.outcome, k, TopM{});
        const auto out_b = threshold_select(b, inst.outcome, k, TopM{});
        if (out_a.includes(r) && out_b.includes(r)) {
            ++checked;
            bad += out_a == out_b ? 0 : 1;
        }
    }
    return {bad == 0 && checked > 0, fmt("%d resamplings with the set in both outputs, %d differ", checked, bad)};
}

Verdict split_rows_independence() {
    constexpr std::size_t n = 256, k = 16, m = 200;
    const std::size_t m1 = split_rows_m1(m, n, 1.0);
    const auto alg = make_split_rows_selector(make_threshold_selector(TopM{}), 1.0);
    int bad = 0;
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        const Instance inst = generate_instance(n, k, m, derive_seed(7, "split", m, trial));
        SplitMix64 rng(trial);
        BitMatrix b = inst.matrix;
        for (std::size_t j = m1; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i) b.set(j, i, rng.next() & 1U);
        }
        const auto y = outcome(b, inst.defectives);
        bad += alg(inst.matrix, inst.outcome, k) == alg(b, y, k) ? 0 : 1;
    }
    return {bad == 0, fmt("m=%zu, m1=%zu: %d/200 outputs changed", m, m1, bad)};
}

Verdict phase_behavior() {
    ExperimentSpec spec;
    spec.n = 4096;
    spec.k = 64;
    spec.m_grid = {532, 798, 1064, 1171, 1330, 2129};
    spec.algorithms = {parse_algorithm_id("m_thresh"), parse_algorithm_id("two_k_thresh"),
                       parse_algorithm_id("k_thresh")};
    spec.trials = 200;
    spec.master_seed = 20240607;
    std::vector<TrialRecord> recs;
    const auto rows = sweep(spec, std::max(1U, std::thread::hardware_concurrency()), &recs);

    const std::size_t g = spec.m_grid.size();
    auto rate = [&](std::size_t alg, std::size_t mi) { return rows[alg * g + mi].subset_success_rate; };
    bool ordered = true, monotone = true;
    for (std::size_t mi = 0; mi < g; ++mi) {
        ordered = ordered && rate(0, mi) + 0.05 >= rate(1, mi) && rate(1, mi) + 0.05 >= rate(2, mi);
        for (std::size_t a = 0; a < 3 && mi > 0; ++a) monotone = monotone && rate(a, mi) + 0.05 >= rate(a, mi - 1);
    }
    const double rec_1171 = *rows[3].full_recovery_rate, rec_2129 = *rows[5].full_recovery_rate;
    const bool recovery = rec_1171 >= 0.9 || rec_2129 >= 0.9;
    std::size_t successful = 0, small_deficit = 0;
    const double log2n = std::log2(static_cast<double>(spec.n));
    for (const auto& r : recs) {
        if (!r.contains_defectives) continue;
        ++successful;
        small_deficit += static_cast<double>(r.rank_deficit) <= log2n ? 1 : 0;
    }
    const double deficit_frac = successful ? static_cast<double>(small_deficit) / static_cast<double>(successful) : 0;

    std::ostringstream rates;
    for (std::size_t a = 0; a < 3; ++a) {
        rates << rows[a * g].algorithm << " [";
        for (std::size_t mi = 0; mi < g; ++mi) rates << (mi ? " " : "") << fmt("%.3f", rate(a, mi));
        rates << "] ";
    }
    const bool ok = ordered && monotone && recovery && deficit_frac >= 0.99;
    return {ok, fmt("(a) %s (b) %s (c) recovery %.3f at m=1171, %.3f at m=2129 (d) deficit <= log2 n in %.4f of %zu; ",
                    ordered ? "ordered" : "NOT ordered", monotone ? "monotone" : "NOT monotone", rec_1171, rec_2129,
                    deficit_frac, successful) +
                    rates.str()};
}

Verdict reproducibility() {
    ExperimentSpec spec;
    spec.n = 128;
    spec.k = 6;
    spec.m_grid = {20, 40, 60};
    for (auto name : kAlgorithmNames) spec.algorithms.push_back(parse_algorithm_id(name));
    spec.algorithms.push_back(parse_algorithm_id("split_rows(m_thresh,1)"));
    spec.trials = 12;
    spec.master_seed = 31337;
    auto csv = [&](std::size_t workers) {
        std::ostringstream os;
        write_sweep_csv(os, sweep(spec, workers));
        return os.str();
    };
    const std::string one = csv(1), again = csv(1), four = csv(4), seven = csv(7);
    const bool ok = one == again && one == four && one == seven;
    return {ok, fmt("%zu-byte CSV identical across 1/1/4/7 workers: %s", one.size(), ok ? "yes" : "no")};
}

}  // namespace

int main() {
    criterion(1, "oracle equivalence (n=14, k=3, m=14, 200 instances)", 10, oracle_equivalence);
    criterion(2, "psi invariants (n=200, k=10, m=100, 100 instances)", 5, psi_invariants);
    criterion(3, "exact bound domination", 30, bound_domination);
    criterion(4, "rank-lemma Monte Carlo", 60, rank_lemma);
    criterion(5, "singularity", 60, singularity);
    criterion(6, "m-thresholding consistency (n=40, m=20, k=3, 500 resamplings)", 600, consistency);
    criterion(7, "split-rows independence (n=256, k=16, c'=1, 200 trials)", 600, split_rows_independence);
    criterion(8, "end-to-end phase behavior (n=4096, k=64, 200 trials per m)", 1800, phase_behavior);
    criterion(9, "sweep reproducibility across worker counts", 600, reproducibility);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
