#include "sbro/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sbro {

namespace {

using nlohmann::json;

json flip_groups_to_json(const std::vector<FlipGroup>& groups) {
    json arr = json::array();
    for (const FlipGroup& g : groups) arr.push_back({g.count, g.ratio});
    return arr;
}

std::vector<FlipGroup> flip_groups_from_json(const json& arr) {
    std::vector<FlipGroup> groups;
    for (const auto& item : arr) {
        if (!item.is_array() || item.size() != 2) {
            throw std::invalid_argument("flip_groups entries must be [count, ratio] pairs");
        }
        groups.push_back({item[0].get<int>(), item[1].get<double>()});
    }
    return groups;
}

json bids_to_json(const BidSpec& b) {
    json j;
    j["mode"] = b.mode == BidSpec::Mode::gaussian ? "gaussian" : "tiered";
    j["mean"] = b.mean;
    j["variance"] = b.variance;
    j["floor"] = b.floor;
    json tiers = json::array();
    for (const auto& [ratio, bid] : b.tiers) tiers.push_back({ratio, bid});
    j["tiers"] = tiers;
    return j;
}

void bids_from_json(const json& j, BidSpec& b) {
    if (j.contains("mode")) {
        const std::string mode = j["mode"].get<std::string>();
        if (mode == "gaussian") {
            b.mode = BidSpec::Mode::gaussian;
        } else if (mode == "tiered") {
            b.mode = BidSpec::Mode::tiered;
        } else {
            throw std::invalid_argument("bid mode must be gaussian or tiered");
        }
    }
    if (j.contains("mean")) b.mean = j["mean"].get<double>();
    if (j.contains("variance")) b.variance = j["variance"].get<double>();
    if (j.contains("floor")) b.floor = j["floor"].get<double>();
    if (j.contains("tiers")) {
        b.tiers.clear();
        for (const auto& item : j["tiers"]) {
            if (!item.is_array() || item.size() != 2) {
                throw std::invalid_argument("bid tiers must be [flip_ratio, bid] pairs");
            }
            b.tiers.emplace_back(item[0].get<double>(), item[1].get<double>());
        }
    }
}

// Split "a.b.c=value" and set the JSON pointer /a/b/c. The value parses as
// JSON when possible and falls back to a raw string.
void apply_override(json& doc, const std::string& spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("override must look like key.path=value: " + spec);
    }
    std::string path = "/" + spec.substr(0, eq);
    for (char& c : path) {
        if (c == '.') c = '/';
    }
    const std::string raw = spec.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    doc[json::json_pointer(path)] = value;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg = default_config();
    if (j.contains("scenario")) {
        const json& s = j["scenario"];
        auto& sc = cfg.scenario;
        if (s.contains("num_clients")) sc.num_clients = s["num_clients"].get<int>();
        if (s.contains("samples_total")) sc.samples_total = s["samples_total"].get<int>();
        if (s.contains("validation_samples")) sc.validation_samples = s["validation_samples"].get<int>();
        if (s.contains("num_classes")) sc.num_classes = s["num_classes"].get<int>();
        if (s.contains("input_dim")) sc.input_dim = s["input_dim"].get<int>();
        if (s.contains("class_separation")) sc.class_separation = s["class_separation"].get<double>();
        if (s.contains("flip_groups")) sc.flip_groups = flip_groups_from_json(s["flip_groups"]);
        if (s.contains("bids")) bids_from_json(s["bids"], sc.bids);
        if (s.contains("seed")) sc.seed = s["seed"].get<std::uint64_t>();
    }
    if (j.contains("model_shape")) cfg.model_shape = j["model_shape"].get<std::vector<int>>();
    if (j.contains("train")) {
        const json& t = j["train"];
        if (t.contains("learning_rate")) cfg.train.learning_rate = t["learning_rate"].get<double>();
        if (t.contains("batch_size")) cfg.train.batch_size = t["batch_size"].get<int>();
        if (t.contains("local_steps")) cfg.train.local_steps = t["local_steps"].get<int>();
        if (t.contains("seed")) cfg.train.seed = t["seed"].get<std::uint64_t>();
    }
    if (j.contains("method")) cfg.method = method_from_string(j["method"].get<std::string>());
    if (j.contains("rounds")) cfg.rounds = j["rounds"].get<int>();
    if (j.contains("budget")) cfg.budget = j["budget"].get<double>();
    if (j.contains("prospect")) {
        const json& p = j["prospect"];
        if (p.contains("alpha")) cfg.prospect.alpha = p["alpha"].get<double>();
        if (p.contains("beta")) cfg.prospect.beta = p["beta"].get<double>();
        if (p.contains("gamma")) cfg.prospect.gamma = p["gamma"].get<double>();
        if (p.contains("loss_sign")) {
            const std::string sign = p["loss_sign"].get<std::string>();
            if (sign == "negative") {
                cfg.prospect.loss_sign = ProspectParams::LossSign::negative;
            } else if (sign == "as_printed") {
                cfg.prospect.loss_sign = ProspectParams::LossSign::as_printed;
            } else {
                throw std::invalid_argument("loss_sign must be negative or as_printed");
            }
        }
    }
    if (j.contains("update")) {
        const json& u = j["update"];
        if (u.contains("omega")) cfg.update.omega = u["omega"].get<double>();
        if (u.contains("psi")) cfg.update.psi = u["psi"].get<double>();
        if (u.contains("rho")) cfg.update.rho = u["rho"].get<double>();
        if (u.contains("err_window")) cfg.update.err_window = u["err_window"].get<int>();
    }
    if (j.contains("shapley")) {
        const json& s = j["shapley"];
        if (s.contains("empty_value")) {
            const std::string ev = s["empty_value"].get<std::string>();
            if (ev == "previous_global") {
                cfg.shapley.empty_value = ShapleyOptions::EmptyValue::previous_global;
            } else if (ev == "uniform_guess") {
                cfg.shapley.empty_value = ShapleyOptions::EmptyValue::uniform_guess;
            } else {
                throw std::invalid_argument("shapley.empty_value must be previous_global or uniform_guess");
            }
        }
    }
    if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output_path")) cfg.output_path = j["output_path"].get<std::string>();
    if (j.contains("compare")) {
        const json& c = j["compare"];
        if (c.contains("methods")) {
            cfg.compare_methods.clear();
            for (const auto& m : c["methods"]) {
                cfg.compare_methods.push_back(method_from_string(m.get<std::string>()));
            }
        }
        if (c.contains("seeds")) cfg.compare_seeds = c["seeds"].get<std::vector<std::uint64_t>>();
    }
    cfg.validate();
    return cfg;
}

}  // namespace

Method method_from_string(const std::string& s) {
    if (s == "sbro") return Method::sbro;
    if (s == "rs") return Method::rs;
    if (s == "hqrs") return Method::hqrs;
    if (s == "all") return Method::all;
    throw std::invalid_argument("unknown method: " + s);
}

std::string to_string(Method m) {
    switch (m) {
        case Method::sbro: return "sbro";
        case Method::rs: return "rs";
        case Method::hqrs: return "hqrs";
        case Method::all: return "all";
    }
    throw std::logic_error("unreachable");
}

void ExperimentConfig::validate() const {
    if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
    if (!(budget > 0.0)) throw std::invalid_argument("budget must be > 0");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must be in (0,1]");
    if (scenario.validation_samples < 1) {
        throw std::invalid_argument("validation_samples must be >= 1");
    }
    if (model_shape.size() < 2) throw std::invalid_argument("model_shape needs >= 2 dims");
    if (model_shape.front() != scenario.input_dim) {
        throw std::invalid_argument("model_shape input does not match scenario input_dim");
    }
    if (model_shape.back() != scenario.num_classes) {
        throw std::invalid_argument("model_shape output does not match scenario num_classes");
    }
    if (!(train.learning_rate > 0.0)) {
        throw std::invalid_argument("train.learning_rate must be > 0");
    }
    train.validate();
    prospect.validate();
    update.validate();
    PartitionSpec part{scenario.num_clients, scenario.samples_total, scenario.flip_groups, 0};
    part.validate();
    scenario.bids.validate();
    if (compare_methods.empty()) throw std::invalid_argument("compare.methods is empty");
    if (compare_seeds.empty()) throw std::invalid_argument("compare.seeds is empty");
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig parse_config_json(const std::string& json_text,
                                   const std::vector<std::string>& overrides) {
    json doc = json_text.empty() ? json::object() : json::parse(json_text);
    for (const std::string& o : overrides) apply_override(doc, o);
    return config_from_json(doc);
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_json(buf.str(), overrides);
}

std::string config_to_json_string(const ExperimentConfig& cfg) {
    json j;
    j["scenario"]["num_clients"] = cfg.scenario.num_clients;
    j["scenario"]["samples_total"] = cfg.scenario.samples_total;
    j["scenario"]["validation_samples"] = cfg.scenario.validation_samples;
    j["scenario"]["num_classes"] = cfg.scenario.num_classes;
    j["scenario"]["input_dim"] = cfg.scenario.input_dim;
    j["scenario"]["class_separation"] = cfg.scenario.class_separation;
    j["scenario"]["flip_groups"] = flip_groups_to_json(cfg.scenario.flip_groups);
    j["scenario"]["bids"] = bids_to_json(cfg.scenario.bids);
    j["scenario"]["seed"] = cfg.scenario.seed;
    j["model_shape"] = cfg.model_shape;
    j["train"]["learning_rate"] = cfg.train.learning_rate;
    j["train"]["batch_size"] = cfg.train.batch_size;
    j["train"]["local_steps"] = cfg.train.local_steps;
    j["train"]["seed"] = cfg.train.seed;
    j["method"] = to_string(cfg.method);
    j["rounds"] = cfg.rounds;
    j["budget"] = cfg.budget;
    j["prospect"]["alpha"] = cfg.prospect.alpha;
    j["prospect"]["beta"] = cfg.prospect.beta;
    j["prospect"]["gamma"] = cfg.prospect.gamma;
    j["prospect"]["loss_sign"] =
        cfg.prospect.loss_sign == ProspectParams::LossSign::negative ? "negative"
                                                                     : "as_printed";
    j["update"]["omega"] = cfg.update.omega;
    j["update"]["psi"] = cfg.update.psi;
    j["update"]["rho"] = cfg.update.rho;
    j["update"]["err_window"] = cfg.update.err_window;
    j["shapley"]["empty_value"] =
        cfg.shapley.empty_value == ShapleyOptions::EmptyValue::previous_global
            ? "previous_global"
            : "uniform_guess";
    j["delta"] = cfg.delta;
    j["seed"] = cfg.seed;
    j["output_path"] = cfg.output_path;
    json methods = json::array();
    for (Method m : cfg.compare_methods) methods.push_back(to_string(m));
    j["compare"]["methods"] = methods;
    j["compare"]["seeds"] = cfg.compare_seeds;
    return j.dump(2);
}

}  // namespace sbro
