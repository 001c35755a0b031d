#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbro/config.hpp"
#include "sbro/data.hpp"
#include "sbro/model.hpp"

namespace sbro {

// One row of the per-round log. wall_time_ms and the coalition audit values
// stay in memory; the CSV schema carries only the deterministic columns.
struct RoundRecord {
    int round = 0;
    std::string method;
    std::vector<int> selected_ids;
    double total_cost = 0.0;
    double global_accuracy = 0.0;
    std::vector<double> sv;                    // aligned with selected_ids, sbro only
    std::vector<double> reputation_snapshot;   // post-update, length n
    double wall_time_ms = 0.0;
    double coalition_value = 0.0;  // v(S^t), sbro rounds with nonempty selection
    double empty_value = 0.0;      // v(empty), same
    bool has_shapley = false;
};

// The materialized federation an arm runs against.
struct Scenario {
    std::vector<ClientDataset> clients;  // labels already flipped
    Dataset validation;
    std::vector<double> bids;
    ModelParams initial_model;
    std::vector<int> clean_ids;
};

Scenario build_scenario(const ExperimentConfig& cfg);

struct RunResult {
    std::vector<RoundRecord> records;
    // per-round selection counts fed into the decay factor (sbro only)
    std::vector<std::vector<int>> selection_counts;
};

RunResult run_experiment_audited(const ExperimentConfig& cfg);
std::vector<RoundRecord> run_experiment(const ExperimentConfig& cfg);

struct ComparisonArm {
    Method method = Method::sbro;
    std::uint64_t scenario_seed = 0;
    std::vector<RoundRecord> records;
    double final_accuracy = 0.0;
    double last20_variance = 0.0;
};

struct MethodAggregate {
    Method method = Method::sbro;
    double mean_final_accuracy = 0.0;
    double var_final_accuracy = 0.0;
};

struct ComparisonResult {
    std::vector<ComparisonArm> arms;
    std::vector<MethodAggregate> aggregates;
};

// Runs every (method, seed) arm; arms under one seed share the scenario and
// differ only in the algorithmic seed.
ComparisonResult run_comparison(const ExperimentConfig& base,
                                const std::vector<Method>& methods,
                                const std::vector<std::uint64_t>& seeds);

// CSV serialization: fixed header, semicolon-joined id/real lists, reals at
// 6 decimal places, LF line endings.
std::string to_csv_string(const std::vector<RoundRecord>& records);
void emit_csv(const std::vector<RoundRecord>& records, const std::string& path);
std::string summary_to_csv(const ComparisonResult& result);
std::string aggregate_to_csv(const ComparisonResult& result);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Runtime invariant suite over a seeded scenario (used by the `check`
// subcommand and the tests).
std::vector<CheckResult> run_invariant_checks(const ExperimentConfig& cfg);

}  // namespace sbro
