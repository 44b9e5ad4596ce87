#include "liftgraph/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "liftgraph/errors.hpp"

namespace liftgraph {

namespace {

using Json = nlohmann::ordered_json;

std::size_t as_count(const Json& v, const std::string& key) {
    if (!v.is_number_unsigned()) throw ConfigError("config key '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

double as_number(const Json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    return v.get<double>();
}

bool as_bool(const Json& v, const std::string& key) {
    if (!v.is_boolean()) throw ConfigError("config key '" + key + "' must be true or false");
    return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& key) {
    if (v.is_null()) return "";
    if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
    return v.get<std::string>();
}

using Setter = std::function<void(const Json&, const std::string&)>;

void overlay(const Json& section, const std::string& prefix, const std::map<std::string, Setter>& setters) {
    if (!section.is_object()) throw ConfigError("config section '" + prefix + "' must be an object");
    for (const auto& [key, value] : section.items()) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown config key '" + prefix + "." + key + "'");
        it->second(value, prefix + "." + key);
    }
}

}  // namespace

std::vector<std::uint64_t> RunConfig::run_seeds() const {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < seeds; ++i) out.push_back(seed + i);
    return out;
}

void RunConfig::validate() const {
    if (data.dataset_dir.empty() == data.synthetic.empty()) {
        throw ConfigError("exactly one of --dataset and --synthetic is required");
    }
    if (!data.synthetic.empty() && data.synthetic != kSyntheticCyclesPaths) {
        throw ConfigError("unknown synthetic dataset '" + data.synthetic + "' (available: cycles-paths)");
    }
    if (folds == 2 || folds == 0) throw ConfigError("folds must be 1 (hold-out) or at least 3");
    if (seeds == 0) throw ConfigError("seeds must be at least 1");
    if (out.empty()) throw ConfigError("output directory must not be empty");
    if (model.hidden_dim == 0) throw ConfigError("hidden_dim must be positive");
    if (model.num_blocks == 0) throw ConfigError("num_blocks must be positive");
    if (!(model.dropout_rate >= 0.0 && model.dropout_rate < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    model.pool.validate();
    train.validate();
}

std::optional<std::uint64_t> seed_from_env() {
    const char* raw = std::getenv("LIFTGRAPH_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    const std::string text(raw);
    std::size_t used = 0;
    std::uint64_t value = 0;
    try {
        if (text.front() == '-') throw std::invalid_argument(text);
        value = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || used == 0) throw ConfigError("LIFTGRAPH_SEED is not a non-negative integer: '" + text + "'");
    return value;
}

RunConfig default_run_config() {
    RunConfig c;
    if (const auto s = seed_from_env()) c.seed = *s;
    c.train.seed = c.seed;
    return c;
}

std::string run_config_to_json(const RunConfig& c) {
    Json j;
    j["data"] = {
        {"dataset", c.data.dataset_dir.empty() ? Json(nullptr) : Json(c.data.dataset_dir)},
        {"name", c.data.dataset_name},
        {"synthetic", c.data.synthetic.empty() ? Json(nullptr) : Json(c.data.synthetic)},
        {"synthetic_graphs", c.data.synthetic_graphs},
        {"synthetic_min_size", c.data.synthetic_min_size},
        {"synthetic_max_size", c.data.synthetic_max_size},
        {"degree_cap", c.data.degree_cap},
    };
    j["model"] = {
        {"input_dim", c.model.input_dim},
        {"num_classes", c.model.num_classes},
        {"hidden_dim", c.model.hidden_dim},
        {"num_blocks", c.model.num_blocks},
        {"classifier_hidden", c.model.classifier_hidden},
        {"dropout", c.model.dropout_rate},
        {"norm", std::string(norm_mode_name(c.model.norm_mode))},
        {"lambda", c.model.lambda},
    };
    j["pool"] = {
        {"ratio", c.model.pool.ratio},
        {"lift_layers", c.model.pool.num_lift_layers},
        {"lift_hops", c.model.pool.lift_hops},
        {"gate", c.model.pool.gate_with_scores},
    };
    j["train"] = {
        {"lr", c.train.lr},
        {"weight_decay", c.train.weight_decay},
        {"batch_size", c.train.batch_size},
        {"max_epochs", c.train.max_epochs},
        {"patience", c.train.patience},
        {"workers", c.train.workers},
    };
    j["protocol"] = {{"folds", c.folds}, {"seeds", c.seeds}, {"seed", c.seed}};
    j["out"] = c.out;
    return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text, RunConfig c) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    const std::map<std::string, Setter> data{
        {"dataset", [&](const Json& v, const std::string& k) { c.data.dataset_dir = as_string(v, k); }},
        {"name", [&](const Json& v, const std::string& k) { c.data.dataset_name = as_string(v, k); }},
        {"synthetic", [&](const Json& v, const std::string& k) { c.data.synthetic = as_string(v, k); }},
        {"synthetic_graphs", [&](const Json& v, const std::string& k) { c.data.synthetic_graphs = as_count(v, k); }},
        {"synthetic_min_size", [&](const Json& v, const std::string& k) { c.data.synthetic_min_size = as_count(v, k); }},
        {"synthetic_max_size", [&](const Json& v, const std::string& k) { c.data.synthetic_max_size = as_count(v, k); }},
        {"degree_cap", [&](const Json& v, const std::string& k) { c.data.degree_cap = as_count(v, k); }},
    };
    const std::map<std::string, Setter> model{
        {"input_dim", [&](const Json& v, const std::string& k) { c.model.input_dim = as_count(v, k); }},
        {"num_classes", [&](const Json& v, const std::string& k) { c.model.num_classes = as_count(v, k); }},
        {"hidden_dim", [&](const Json& v, const std::string& k) { c.model.hidden_dim = as_count(v, k); }},
        {"num_blocks", [&](const Json& v, const std::string& k) { c.model.num_blocks = as_count(v, k); }},
        {"classifier_hidden", [&](const Json& v, const std::string& k) { c.model.classifier_hidden = as_count(v, k); }},
        {"dropout", [&](const Json& v, const std::string& k) { c.model.dropout_rate = as_number(v, k); }},
        {"norm", [&](const Json& v, const std::string& k) { c.model.norm_mode = parse_norm_mode(as_string(v, k)); }},
        {"lambda", [&](const Json& v, const std::string& k) { c.model.lambda = as_number(v, k); }},
    };
    const std::map<std::string, Setter> pool{
        {"ratio", [&](const Json& v, const std::string& k) { c.model.pool.ratio = as_number(v, k); }},
        {"lift_layers", [&](const Json& v, const std::string& k) { c.model.pool.num_lift_layers = as_count(v, k); }},
        {"lift_hops", [&](const Json& v, const std::string& k) { c.model.pool.lift_hops = as_count(v, k); }},
        {"gate", [&](const Json& v, const std::string& k) { c.model.pool.gate_with_scores = as_bool(v, k); }},
    };
    const std::map<std::string, Setter> train{
        {"lr", [&](const Json& v, const std::string& k) { c.train.lr = as_number(v, k); }},
        {"weight_decay", [&](const Json& v, const std::string& k) { c.train.weight_decay = as_number(v, k); }},
        {"batch_size", [&](const Json& v, const std::string& k) { c.train.batch_size = as_count(v, k); }},
        {"max_epochs", [&](const Json& v, const std::string& k) { c.train.max_epochs = as_count(v, k); }},
        {"patience", [&](const Json& v, const std::string& k) { c.train.patience = as_count(v, k); }},
        {"workers", [&](const Json& v, const std::string& k) { c.train.workers = as_count(v, k); }},
    };
    const std::map<std::string, Setter> protocol{
        {"folds", [&](const Json& v, const std::string& k) { c.folds = as_count(v, k); }},
        {"seeds", [&](const Json& v, const std::string& k) { c.seeds = as_count(v, k); }},
        {"seed",
         [&](const Json& v, const std::string& k) {
             if (!v.is_number_unsigned()) throw ConfigError("config key '" + k + "' must be a non-negative integer");
             c.seed = v.get<std::uint64_t>();
         }},
    };
    const std::map<std::string, Setter> top{
        {"data", [&](const Json& v, const std::string& k) { overlay(v, k, data); }},
        {"model", [&](const Json& v, const std::string& k) { overlay(v, k, model); }},
        {"pool", [&](const Json& v, const std::string& k) { overlay(v, k, pool); }},
        {"train", [&](const Json& v, const std::string& k) { overlay(v, k, train); }},
        {"protocol", [&](const Json& v, const std::string& k) { overlay(v, k, protocol); }},
        {"out", [&](const Json& v, const std::string& k) { c.out = as_string(v, k); }},
    };
    for (const auto& [key, value] : j.items()) {
        const auto it = top.find(key);
        if (it == top.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(value, key);
    }
    c.train.seed = c.seed;
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return run_config_from_json(text.str(), std::move(base));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

Dataset load_dataset(RunConfig& c) {
    Dataset ds;
    if (!c.data.synthetic.empty()) {
        ds = synth_cycles_vs_paths(c.data.synthetic_graphs, c.data.synthetic_min_size, c.data.synthetic_max_size, c.seed);
    } else {
        const std::filesystem::path dir(c.data.dataset_dir);
        if (!std::filesystem::is_directory(dir)) throw ConfigError("dataset directory not found: " + dir.string());
        std::string name = c.data.dataset_name;
        if (name.empty()) name = (dir.filename().empty() ? dir.parent_path() : dir).filename().string();
        TuOptions options;
        options.degree_cap = c.data.degree_cap;
        ds = load_tu(dir, name, options);
    }
    c.model.input_dim = ds.feature_dim;
    c.model.num_classes = ds.num_classes;
    return ds;
}

}  // namespace liftgraph
