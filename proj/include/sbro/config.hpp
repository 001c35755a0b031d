#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbro/data.hpp"
#include "sbro/model.hpp"
#include "sbro/reputation.hpp"

namespace sbro {

enum class Method { sbro, rs, hqrs, all };

Method method_from_string(const std::string& s);
std::string to_string(Method m);

// Everything that defines the federation itself. Arms sharing a scenario
// seed see identical datasets, partitions, flips, bids and initial model.
struct ScenarioConfig {
    int num_clients = 40;
    int samples_total = 10000;
    int validation_samples = 1000;
    int num_classes = 5;
    int input_dim = 8;
    double class_separation = 3.0;
    std::vector<FlipGroup> flip_groups = {
        {8, 0.9}, {8, 0.8}, {8, 0.7}, {8, 0.6}, {8, 0.0}};
    BidSpec bids;
    std::uint64_t seed = 42;
};

struct ShapleyOptions {
    enum class EmptyValue { previous_global, uniform_guess };
    EmptyValue empty_value = EmptyValue::previous_global;
};

struct ExperimentConfig {
    ScenarioConfig scenario;
    std::vector<int> model_shape = {8, 5};
    TrainConfig train{0.01, 16, 20, 7};
    Method method = Method::sbro;
    int rounds = 150;
    double budget = 45.0;
    ProspectParams prospect;
    UpdateParams update;
    ShapleyOptions shapley;
    double delta = 0.5;
    std::uint64_t seed = 1;  // algorithmic seed (selection randomness)
    std::string output_path;
    // compare-mode arms
    std::vector<Method> compare_methods = {Method::sbro, Method::rs, Method::hqrs,
                                           Method::all};
    std::vector<std::uint64_t> compare_seeds = {42, 43, 44};

    void validate() const;
};

ExperimentConfig default_config();

// Parses a JSON config document; keys mirror the field tree and fall back to
// defaults when absent. Overrides are dotted key=value pairs applied on top.
ExperimentConfig parse_config_json(const std::string& json_text,
                                   const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});
std::string config_to_json_string(const ExperimentConfig& cfg);

}  // namespace sbro
