#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qgt/qgt.hpp"

namespace qgt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidSpec = 2;
inline constexpr int kExitBoundViolation = 3;

namespace detail {

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidSpec, "cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::Parse, path + ": " + e.what());
    }
}

/// Writes to `path`, or to `out` when the path is empty.
template <class Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
    if (path.empty()) {
        fn(out);
        return;
    }
    std::ofstream file(path);
    if (!file) throw Error(ErrorCode::InvalidParams, "cannot write " + path);
    fn(file);
}

inline void emit_json(const std::string& path, std::ostream& out, const nlohmann::json& j) {
    emit(path, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

inline nlohmann::json to_json(const FractionEstimate& e) {
    return {{"hits", e.hits}, {"trials", e.trials}, {"fraction", e.fraction()}, {"std_error", e.std_error()}};
}

inline nlohmann::json to_json(const MomentSummary& s) {
    return {{"count", s.count},
            {"mean", s.mean},
            {"variance", s.variance},
            {"expected_mean", s.expected_mean},
            {"expected_variance", s.expected_variance},
            {"std_error", s.std_error},
            {"z", s.z}};
}

struct FieldOptions {
    std::string field = "modp";
    std::uint64_t prime = kDefaultPrime;
    std::size_t exact_cap = kDefaultExactCap;

    FieldMode mode() const {
        if (field == "rational") return ExactRational{exact_cap};
        return ModP{prime};
    }
};

inline void add_field_options(CLI::App* app, FieldOptions& f) {
    app->add_option("--field", f.field, "Elimination field")->check(CLI::IsMember({"modp", "rational"}));
    app->add_option("--prime", f.prime, "Prime for the modp field");
    app->add_option("--exact-cap", f.exact_cap, "Largest dimension for exact rational elimination");
}

}  // namespace detail

/// Entry point shared by the binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Quantitative group testing: instance generation, recovery, and experiment sweeps"};
    app.require_subcommand(1);
    std::string output;

    // gen
    auto* gen = app.add_subcommand("gen", "Emit a random instance as JSON");
    std::size_t gen_n = 0, gen_k = 0, gen_m = 0;
    std::uint64_t gen_seed = 0;
    gen->add_option("--n", gen_n, "Items")->required();
    gen->add_option("--k", gen_k, "Defectives")->required();
    gen->add_option("--m", gen_m, "Tests")->required();
    gen->add_option("--seed", gen_seed, "Instance seed");
    gen->add_option("--output", output, "Output file (default stdout)");

    // solve
    auto* solve = app.add_subcommand("solve", "Run Subset Select and recovery on an instance");
    std::string solve_input, solve_alg = "m_thresh";
    std::size_t solve_budget = RecoveryConfig{}.free_var_budget;
    detail::FieldOptions solve_field;
    solve->add_option("--input", solve_input, "Instance JSON")->required();
    solve->add_option("--algorithm", solve_alg, "Algorithm id, e.g. m_thresh or split_rows(m_thresh,1)");
    solve->add_option("--budget", solve_budget, "Free variable budget");
    detail::add_field_options(solve, solve_field);
    solve->add_option("--output", output, "Output file (default stdout)");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment spec and write aggregated CSV");
    std::string spec_path, records_path;
    std::size_t workers = 1;
    std::optional<std::size_t> trials_override, budget_override, cap_override;
    std::optional<std::uint64_t> seed_override;
    sweep_cmd->add_option("--spec", spec_path, "Experiment spec JSON")->required();
    sweep_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--trials", trials_override, "Override trials");
    sweep_cmd->add_option("--seed", seed_override, "Override master seed");
    sweep_cmd->add_option("--budget", budget_override, "Override free variable budget");
    sweep_cmd->add_option("--exact-cap", cap_override, "Use rational elimination with this cap");
    sweep_cmd->add_option("--records", records_path, "Also write per-trial CSV here");
    sweep_cmd->add_option("--output", output, "Output CSV (default stdout)");

    // mc-sing
    auto* sing = app.add_subcommand("mc-sing", "Singular fraction of square Bernoulli matrices");
    std::size_t sing_m = 0, sing_trials = 1000, sing_cap = kDefaultExactCap;
    std::uint64_t sing_seed = 0;
    bool sing_exhaustive = false;
    sing->add_option("--m", sing_m, "Matrix size")->required();
    sing->add_option("--trials", sing_trials, "Samples");
    sing->add_option("--seed", sing_seed, "Seed");
    sing->add_flag("--exhaustive", sing_exhaustive, "Enumerate all matrices (m <= 4)");
    sing->add_option("--exact-cap", sing_cap, "Largest size ranked over the rationals");
    sing->add_option("--output", output, "Output file (default stdout)");

    // mc-ranklemma
    auto* rl = app.add_subcommand("mc-ranklemma", "Dimension growth of a span under random binary vectors");
    std::size_t rl_m1 = 0, rl_k1 = 0, rl_l = 0, rl_k2 = 0, rl_trials = 10000, rl_cap = kDefaultExactCap;
    std::uint64_t rl_seed = 0;
    rl->add_option("--m1", rl_m1, "Ambient dimension")->required();
    rl->add_option("--k1", rl_k1, "Dimension of the fixed span")->required();
    rl->add_option("--l", rl_l, "Random vectors")->required();
    rl->add_option("--k2", rl_k2, "Target dimension")->required();
    rl->add_option("--trials", rl_trials, "Samples");
    rl->add_option("--seed", rl_seed, "Seed");
    rl->add_option("--exact-cap", rl_cap, "Largest size ranked over the rationals");
    rl->add_option("--output", output, "Output file (default stdout)");

    // scores-dist
    auto* sd = app.add_subcommand("scores-dist", "Moments of psi for defective and non-defective items");
    std::size_t sd_n = 0, sd_k = 0, sd_m = 0, sd_trials = 100;
    std::uint64_t sd_seed = 0;
    sd->add_option("--n", sd_n, "Items")->required();
    sd->add_option("--k", sd_k, "Defectives")->required();
    sd->add_option("--m", sd_m, "Tests")->required();
    sd->add_option("--trials", sd_trials, "Instances");
    sd->add_option("--seed", sd_seed, "Seed");
    sd->add_option("--output", output, "Output file (default stdout)");

    // verify-bounds
    auto* vb = app.add_subcommand("verify-bounds", "Exact big-integer checks of the binomial bounds");
    BoundsCheckSpec vb_spec;
    std::optional<std::uint64_t> vb_max;
    vb->add_option("--c-tail", vb_spec.c_tail, "Tail constant");
    vb->add_option("--max-n", vb_max, "Largest N for the collision, Stirling and tail ranges");
    vb->add_option("--output", output, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInvalidSpec;
    }

    try {
        if (*gen) {
            detail::emit_json(output, out, to_json(generate_instance(gen_n, gen_k, gen_m, gen_seed)));
        } else if (*solve) {
            const Instance inst = instance_from_json(detail::read_json_file(solve_input));
            const AlgorithmSpec alg = parse_algorithm_id(solve_alg);
            RecoveryConfig cfg{solve_budget, solve_field.mode()};
            const RecoveryReport r = solve_qgt(inst, make_selector(alg), cfg);
            nlohmann::json j;
            j["algorithm"] = alg.id();
            j["status"] = to_string(r.status);
            j["subset"] = r.subset.indices();
            j["subset_size"] = r.subset.size();
            j["contains_defectives"] = r.contains_defectives;
            j["solution"] = r.solution ? nlohmann::json(r.solution->indices()) : nlohmann::json(nullptr);
            j["correct"] = r.correct;
            j["consistent"] = r.consistent;
            j["free_vars"] = r.free_var_count;
            j["rank_deficit"] = r.rank_deficit;
            j["enumerated"] = r.enumerated;
            j["warnings"] = r.warnings;
            detail::emit_json(output, out, j);
        } else if (*sweep_cmd) {
            ExperimentSpec spec = spec_from_json(detail::read_json_file(spec_path));
            if (trials_override) spec.trials = *trials_override;
            if (seed_override) spec.master_seed = *seed_override;
            if (budget_override) spec.recovery.free_var_budget = *budget_override;
            if (cap_override) spec.recovery.field_mode = ExactRational{*cap_override};
            validate(spec);
            std::vector<TrialRecord> records;
            const auto rows = sweep(spec, workers, &records);
            detail::emit(output, out, [&](std::ostream& os) { write_sweep_csv(os, rows); });
            if (!records_path.empty()) {
                detail::emit(records_path, out, [&](std::ostream& os) { write_trials_csv(os, records); });
            }
        } else if (*sing) {
            const auto e = mc_singularity(sing_m, sing_trials, sing_seed, sing_exhaustive, sing_cap);
            nlohmann::json j = detail::to_json(e);
            j["m"] = sing_m;
            j["exhaustive"] = sing_exhaustive;
            detail::emit_json(output, out, j);
        } else if (*rl) {
            const auto r = mc_rank_lemma(rl_m1, rl_k1, rl_l, rl_k2, rl_trials, rl_seed, rl_cap);
            nlohmann::json j = detail::to_json(r.estimate);
            j["m1"] = rl_m1;
            j["k1"] = rl_k1;
            j["l"] = rl_l;
            j["k2"] = rl_k2;
            j["bound"] = r.bound;
            j["within_bound"] = r.estimate.fraction() <= r.bound;
            detail::emit_json(output, out, j);
        } else if (*sd) {
            const auto d = mc_score_distribution(sd_n, sd_k, sd_m, sd_trials, sd_seed);
            detail::emit_json(output, out,
                              {{"n", sd_n},
                               {"k", sd_k},
                               {"m", sd_m},
                               {"trials", sd_trials},
                               {"defective", detail::to_json(d.defective)},
                               {"non_defective", detail::to_json(d.non_defective)}});
        } else if (*vb) {
            if (vb_max) {
                vb_spec.collision_max = *vb_max;
                vb_spec.stirling_max = *vb_max;
                vb_spec.tail_max = std::max(vb_spec.tail_min, *vb_max);
            }
            const BoundsReport rep = verify_bounds(vb_spec);
            nlohmann::json checks = nlohmann::json::array();
            for (const auto& c : rep.checks) {
                checks.push_back({{"name", c.name},
                                  {"checked", c.checked},
                                  {"violations", c.violations},
                                  {"first_violation", c.first_violation}});
            }
            detail::emit_json(output, out, {{"ok", rep.ok()}, {"c_tail", vb_spec.c_tail}, {"checks", checks}});
            return rep.ok() ? kExitOk : kExitBoundViolation;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        switch (e.code()) {
            case ErrorCode::InvalidSpec:
            case ErrorCode::Parse:
            case ErrorCode::InvalidParams: return kExitInvalidSpec;
            default: return kExitFailure;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace qgt::cli
