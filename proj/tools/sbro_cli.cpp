#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sbro/config.hpp"
#include "sbro/harness.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string method;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int rounds = 0;
    bool rounds_set = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "JSON config file");
    sub->add_option("--override", args.overrides,
                    "config override as key.path=value (repeatable)");
    sub->add_option("--method", args.method, "sbro|rs|hqrs|all");
    sub->add_option("--rounds", args.rounds, "number of rounds")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { args.rounds_set = true; });
    sub->add_option("--seed", args.seed, "algorithmic seed")
        ->each([&](const std::string&) { args.seed_set = true; });
    sub->add_option("--out", args.out, "output path");
}

sbro::ExperimentConfig make_config(const CommonArgs& args) {
    sbro::ExperimentConfig cfg =
        args.config_path.empty()
            ? sbro::parse_config_json("", args.overrides)
            : sbro::load_config(args.config_path, args.overrides);
    if (!args.method.empty()) cfg.method = sbro::method_from_string(args.method);
    if (args.rounds_set) cfg.rounds = args.rounds;
    if (args.seed_set) cfg.seed = args.seed;
    if (!args.out.empty()) cfg.output_path = args.out;
    cfg.validate();
    return cfg;
}

int cmd_run(const CommonArgs& args) {
    const sbro::ExperimentConfig cfg = make_config(args);
    const std::vector<sbro::RoundRecord> records = sbro::run_experiment(cfg);
    const std::string path = cfg.output_path.empty() ? "run.csv" : cfg.output_path;
    sbro::emit_csv(records, path);
    double total_ms = 0.0;
    for (const auto& r : records) total_ms += r.wall_time_ms;
    std::cout << "method=" << sbro::to_string(cfg.method) << " rounds=" << cfg.rounds
              << " final_accuracy=" << records.back().global_accuracy << " csv=" << path
              << " (" << total_ms << " ms)\n";
    return 0;
}

int cmd_compare(const CommonArgs& args) {
    sbro::ExperimentConfig cfg = make_config(args);
    const std::string prefix = cfg.output_path.empty() ? "compare" : cfg.output_path;
    const sbro::ComparisonResult result =
        sbro::run_comparison(cfg, cfg.compare_methods, cfg.compare_seeds);

    for (const sbro::ComparisonArm& arm : result.arms) {
        const std::string path = prefix + "_" + sbro::to_string(arm.method) + "_s" +
                                 std::to_string(arm.scenario_seed) + ".csv";
        sbro::emit_csv(arm.records, path);
    }
    {
        std::ofstream out(prefix + "_summary.csv", std::ios::binary);
        out << sbro::summary_to_csv(result);
    }
    {
        std::ofstream out(prefix + "_aggregate.csv", std::ios::binary);
        out << sbro::aggregate_to_csv(result);
    }
    std::cout << sbro::summary_to_csv(result) << "\n" << sbro::aggregate_to_csv(result);
    return 0;
}

int cmd_gen_data(const CommonArgs& args) {
    const sbro::ExperimentConfig cfg = make_config(args);
    const sbro::Scenario scenario = sbro::build_scenario(cfg);

    nlohmann::json j;
    j["config"] = nlohmann::json::parse(sbro::config_to_json_string(cfg));
    j["validation"] = {{"features", scenario.validation.features},
                       {"labels", scenario.validation.labels},
                       {"num_classes", scenario.validation.num_classes},
                       {"input_dim", scenario.validation.input_dim}};
    nlohmann::json clients = nlohmann::json::array();
    for (std::size_t i = 0; i < scenario.clients.size(); ++i) {
        const sbro::ClientDataset& cd = scenario.clients[i];
        clients.push_back({{"client_id", cd.client_id},
                           {"flip_ratio", cd.flip_ratio},
                           {"is_clean", cd.is_clean},
                           {"bid", scenario.bids[i]},
                           {"features", cd.data.features},
                           {"labels", cd.data.labels}});
    }
    j["clients"] = clients;
    j["clean_ids"] = scenario.clean_ids;
    j["initial_model"] = {{"shape", scenario.initial_model.shape},
                          {"values", scenario.initial_model.values}};

    const std::string path = cfg.output_path.empty() ? "scenario.json" : cfg.output_path;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot open output file: " << path << "\n";
        return 1;
    }
    out << j.dump();
    std::cout << "wrote scenario fixture: " << path << " (" << scenario.clients.size()
              << " clients)\n";
    return 0;
}

int cmd_check(const CommonArgs& args) {
    const sbro::ExperimentConfig cfg = make_config(args);
    const std::vector<sbro::CheckResult> checks = sbro::run_invariant_checks(cfg);
    bool all_pass = true;
    for (const sbro::CheckResult& c : checks) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
        all_pass &= c.pass;
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Budget-constrained federated learning client-selection simulator"};
    app.require_subcommand(1);

    CommonArgs run_args, compare_args, gen_args, check_args;
    CLI::App* run = app.add_subcommand("run", "run a single experiment arm");
    add_common(run, run_args);
    CLI::App* compare =
        app.add_subcommand("compare", "run all configured (method, seed) arms");
    add_common(compare, compare_args);
    CLI::App* gen = app.add_subcommand("gen-data", "write a scenario fixture as JSON");
    add_common(gen, gen_args);
    CLI::App* check = app.add_subcommand("check", "run the invariant suite on a scenario");
    add_common(check, check_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (compare->parsed()) return cmd_compare(compare_args);
        if (gen->parsed()) return cmd_gen_data(gen_args);
        if (check->parsed()) return cmd_check(check_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
