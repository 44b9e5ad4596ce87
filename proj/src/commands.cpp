#include "liftgraph/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "liftgraph/errors.hpp"
#include "liftgraph/run_config.hpp"
#include "properties/property_suite.hpp"

namespace liftgraph {

namespace {

namespace fs = std::filesystem;

template <class T>
struct Flag {
    T value{};
    CLI::Option* opt = nullptr;
    bool given() const { return opt != nullptr && opt->count() > 0; }
};

struct RunFlags {
    std::string config;
    Flag<std::string> dataset, name, synthetic, norm, gate, out;
    Flag<double> ratio, lambda, lr, weight_decay, dropout;
    Flag<std::size_t> lift_layers, lift_hops, hidden, blocks, degree_cap, graphs;
    Flag<std::size_t> folds, seeds, workers, epochs, patience, batch_size;
    Flag<std::uint64_t> seed;
};

template <class T>
CLI::Option* add(CLI::App* app, const std::string& name, Flag<T>& flag, const std::string& help) {
    flag.opt = app->add_option(name, flag.value, help);
    return flag.opt;
}

void add_model_flags(CLI::App* app, RunFlags& f) {
    app->add_option("--config", f.config, "JSON run config; flags override its values")->check(CLI::ExistingFile);
    add(app, "--dataset", f.dataset, "TU dataset directory");
    add(app, "--name", f.name, "TU file prefix (default: directory name)");
    add(app, "--synthetic", f.synthetic, "synthetic dataset: cycles-paths");
    f.dataset.opt->excludes(f.synthetic.opt);
    add(app, "--synthetic-graphs", f.graphs, "number of synthetic graphs");
    add(app, "--degree-cap", f.degree_cap, "degree one-hot cap");
    add(app, "--ratio", f.ratio, "pooling ratio in (0, 1]");
    add(app, "--lift-layers", f.lift_layers, "lifting layers per pool (0 = SAGPool baseline)");
    add(app, "--lift-hops", f.lift_hops, "hop radius of the lifting graph");
    add(app, "--norm", f.norm, "adjacency normalization")->check(CLI::IsMember({"paper", "symmetric"}));
    add(app, "--lambda", f.lambda, "self-loop weight");
    add(app, "--gate", f.gate, "gate preserved features with scores")->check(CLI::IsMember({"on", "off"}));
    add(app, "--hidden", f.hidden, "hidden width");
    add(app, "--blocks", f.blocks, "GCN + pooling blocks");
    add(app, "--dropout", f.dropout, "classifier dropout rate");
    add(app, "--seed", f.seed, "base seed (fallback: LIFTGRAPH_SEED)");
    add(app, "--out", f.out, "output directory");
}

void add_train_flags(CLI::App* app, RunFlags& f) {
    add(app, "--folds", f.folds, "cross-validation folds (1 = single hold-out split)");
    add(app, "--seeds", f.seeds, "initialisations per fold");
    add(app, "--workers", f.workers, "parallel training runs");
    add(app, "--lr", f.lr, "Adam learning rate");
    add(app, "--weight-decay", f.weight_decay, "decoupled weight decay");
    add(app, "--epochs", f.epochs, "maximum epochs");
    add(app, "--patience", f.patience, "early-stopping patience");
    add(app, "--batch-size", f.batch_size, "graphs per batch");
}

template <class T, class U>
void apply(const Flag<T>& flag, U& target) {
    if (flag.given()) target = flag.value;
}

RunConfig resolve(const RunFlags& f) {
    RunConfig c = default_run_config();
    if (!f.config.empty()) c = load_run_config(f.config, c);
    if (f.dataset.given()) {
        c.data.dataset_dir = f.dataset.value;
        c.data.synthetic.clear();
    }
    if (f.synthetic.given()) {
        c.data.synthetic = f.synthetic.value;
        c.data.dataset_dir.clear();
    }
    apply(f.name, c.data.dataset_name);
    apply(f.graphs, c.data.synthetic_graphs);
    apply(f.degree_cap, c.data.degree_cap);
    apply(f.ratio, c.model.pool.ratio);
    apply(f.lift_layers, c.model.pool.num_lift_layers);
    apply(f.lift_hops, c.model.pool.lift_hops);
    if (f.norm.given()) c.model.norm_mode = parse_norm_mode(f.norm.value);
    apply(f.lambda, c.model.lambda);
    if (f.gate.given()) c.model.pool.gate_with_scores = f.gate.value == "on";
    apply(f.hidden, c.model.hidden_dim);
    apply(f.blocks, c.model.num_blocks);
    apply(f.dropout, c.model.dropout_rate);
    apply(f.seed, c.seed);
    apply(f.out, c.out);
    apply(f.folds, c.folds);
    apply(f.seeds, c.seeds);
    apply(f.workers, c.train.workers);
    apply(f.lr, c.train.lr);
    apply(f.weight_decay, c.train.weight_decay);
    apply(f.epochs, c.train.max_epochs);
    apply(f.patience, c.train.patience);
    apply(f.batch_size, c.train.batch_size);
    c.train.seed = c.seed;
    return c;
}

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string summary_line(const CvSummary& s) {
    return "accuracy " + fixed(s.mean) + " ± " + fixed(s.std) + " over " + std::to_string(s.n_runs) + " runs";
}

void summarize(CvSummary& s) {
    s.n_runs = s.reports.size();
    double mean = 0.0;
    for (const auto& r : s.reports) mean += r.test_accuracy;
    mean /= static_cast<double>(s.n_runs);
    double var = 0.0;
    for (const auto& r : s.reports) var += (r.test_accuracy - mean) * (r.test_accuracy - mean);
    s.mean = mean;
    s.std = std::sqrt(var / static_cast<double>(s.n_runs));
}

constexpr std::size_t kHoldoutFolds = 10;

// Fold 0 of a 10-fold plan is the test split, fold 1 validation, the rest train.
CvSummary holdout(const Dataset& ds, std::span<const std::uint64_t> seeds, const ModelConfig& model,
                  const TrainConfig& config, const std::function<void(const FoldReport&)>& on_report) {
    Dataset canonical = ds;
    std::stable_sort(canonical.graphs.begin(), canonical.graphs.end(), [](const Graph& a, const Graph& b) {
        return a.source_index().value_or(0) < b.source_index().value_or(0);
    });
    const auto folds = make_folds(canonical, kHoldoutFolds, config.seed).folds();
    std::vector<const Graph*> train, val, test;
    for (std::size_t f = 0; f < kHoldoutFolds; ++f) {
        auto& dst = f == 0 ? test : f == 1 ? val : train;
        for (std::size_t i : folds[f]) dst.push_back(&canonical.graphs[i]);
    }
    CvSummary s;
    for (std::uint64_t seed : seeds) {
        TrainResult r = train_one(train, val, model, config, seed);
        r.report.test_accuracy = accuracy(r.best_params, model, test, config.batch_size);
        if (s.reports.empty()) s.first_params = r.best_params;
        s.reports.push_back(r.report);
        if (on_report) on_report(r.report);
    }
    summarize(s);
    return s;
}

CvSummary run_protocol(const Dataset& ds, const RunConfig& c, std::ostream& out) {
    const auto seeds = c.run_seeds();
    const auto log = [&](const FoldReport& r) {
        out << "  fold " << r.fold << " seed " << r.seed << ": best epoch " << r.best_epoch << ", test accuracy "
            << fixed(r.test_accuracy) << "\n";
    };
    if (c.folds == 1) return holdout(ds, seeds, c.model, c.train, log);
    return cross_validate(ds, c.folds, seeds, c.model, c.train, log);
}

fs::path prepare_out(const RunConfig& c) {
    const fs::path dir(c.out);
    fs::create_directories(dir);
    return dir;
}

int cmd_train(const RunFlags& f, std::ostream& out) {
    RunConfig c = resolve(f);
    c.validate();
    const Dataset ds = load_dataset(c);
    c.model.validate();
    const fs::path dir = prepare_out(c);
    write_text_file(dir / "run_config.json", run_config_to_json(c));
    out << "dataset " << ds.name << ": " << ds.graphs.size() << " graphs, " << ds.num_classes << " classes, "
        << ds.feature_dim << " features (" << feature_kind_name(ds.feature_kind) << ")\n";
    const CvSummary s = run_protocol(ds, c, out);
    write_text_file(dir / "metrics.csv", metrics_csv(s.reports));
    write_text_file(dir / "summary.json", summary_json(s));
    save_params(s.first_params, dir / "params.bin");
    out << summary_line(s) << "\n";
    return kExitOk;
}

int cmd_sweep(const RunFlags& f, const std::vector<double>& ratios, std::ostream& out) {
    RunConfig c = resolve(f);
    if (ratios.empty()) throw ConfigError("--ratios must list at least one ratio");
    for (double r : ratios) {
        PoolConfig p = c.model.pool;
        p.ratio = r;
        p.validate();
    }
    if (c.model.pool.num_lift_layers == 0) {
        throw ConfigError("sweep-ratio compares lifting with the baseline; --lift-layers must be positive");
    }
    c.validate();
    const Dataset ds = load_dataset(c);
    c.model.validate();
    const fs::path dir = prepare_out(c);
    write_text_file(dir / "run_config.json", run_config_to_json(c));

    std::ostringstream csv;
    csv << "ratio,liftpool_mean,liftpool_std,sagpool_mean,sagpool_std\n";
    for (double r : ratios) {
        RunConfig lift = c;
        lift.model.pool.ratio = r;
        RunConfig base = lift;
        base.model.pool.num_lift_layers = 0;
        out << "ratio " << r << ", lifting:\n";
        const CvSummary a = run_protocol(ds, lift, out);
        out << "ratio " << r << ", baseline:\n";
        const CvSummary b = run_protocol(ds, base, out);
        out << "ratio " << r << ": lifting " << summary_line(a) << "; baseline " << summary_line(b) << "\n";
        csv << r << "," << fixed(a.mean, 6) << "," << fixed(a.std, 6) << "," << fixed(b.mean, 6) << ","
            << fixed(b.std, 6) << "\n";
    }
    write_text_file(dir / "sweep.csv", csv.str());
    return kExitOk;
}

Graph graph_from_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    std::size_t n = 0;
    if (colon != std::string::npos) {
        const std::string count = spec.substr(colon + 1);
        if (count.empty() || count.find_first_not_of("0123456789") != std::string::npos) n = 0;
        else n = std::stoul(count);
    }
    if ((kind != "cycle" && kind != "path") || n < 3) {
        throw ConfigError("graph spec must be cycle:N or path:N with N >= 3, got '" + spec + "'");
    }
    Graph g = kind == "cycle" ? make_cycle(n) : make_path(n);
    g.set_features(degree_one_hot(g, 3, 2));
    return g;
}

int cmd_inspect(const RunFlags& f, const std::string& params_path, const std::string& graph_spec,
                std::size_t index, std::ostream& out) {
    RunConfig c = resolve(f);
    Graph g;
    if (!graph_spec.empty()) {
        if (!c.data.dataset_dir.empty() || !c.data.synthetic.empty()) {
            // A stored run config names its data; --graph replaces it.
            c.data = DataSource{};
        }
        g = graph_from_spec(graph_spec);
        if (c.model.input_dim == 0) c.model.input_dim = g.feature_dim();
        if (c.model.input_dim != g.feature_dim()) {
            throw ConfigError("graph " + graph_spec + " has " + std::to_string(g.feature_dim()) +
                              " features but the model expects " + std::to_string(c.model.input_dim));
        }
    } else {
        c.validate();
        const Dataset ds = load_dataset(c);
        if (index >= ds.graphs.size()) {
            throw ConfigError("graph index " + std::to_string(index) + " out of range for " +
                              std::to_string(ds.graphs.size()) + " graphs");
        }
        g = ds.graphs[index];
    }
    c.model.validate();
    const ModelParams params = load_params(params_path, c.model);
    const PoolingHierarchy h = trace_hierarchy(g, params, c.model);
    const fs::path dir = prepare_out(c);
    write_text_file(dir / "hierarchy.json", hierarchy_to_json(h));
    write_text_file(dir / "hierarchy.dot", hierarchy_to_dot(h));
    out << "nodes per level: " << h.input_ids.size();
    for (const auto& level : h.levels) out << " -> " << level.preserved_ids.size();
    out << "\n";
    return kExitOk;
}

int cmd_selftest(std::uint64_t seed, std::ostream& out) {
    properties::SuiteOptions options;
    options.seed = seed;
    std::size_t passed = 0, total = 0;
    properties::run_property_suite(options, [&](const properties::PropertyResult& r) {
        out << properties::format_result(r) << "\n";
        passed += r.passed;
        ++total;
    });
    out << passed << "/" << total << " properties passed\n";
    return passed == total ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hierarchical graph classification with lifting-based pooling", "liftgraph"};
    app.require_subcommand(1);

    RunFlags train_flags, sweep_flags, inspect_flags;
    CLI::App* train = app.add_subcommand("train", "cross-validated training; writes metrics, summary and params");
    add_model_flags(train, train_flags);
    add_train_flags(train, train_flags);

    CLI::App* sweep = app.add_subcommand("sweep-ratio", "lifting vs baseline accuracy across pooling ratios");
    add_model_flags(sweep, sweep_flags);
    add_train_flags(sweep, sweep_flags);
    std::vector<double> ratios{0.1, 0.3, 0.5, 0.7, 0.9};
    sweep->add_option("--ratios", ratios, "comma-separated pooling ratios")->delimiter(',');

    CLI::App* inspect = app.add_subcommand("inspect", "dump the pooling hierarchy of one graph");
    add_model_flags(inspect, inspect_flags);
    std::string params_path, graph_spec;
    std::size_t index = 0;
    inspect->add_option("--params", params_path, "parameter file written by train")->required();
    inspect->add_option("--graph", graph_spec, "cycle:N or path:N instead of a dataset graph");
    inspect->add_option("--index", index, "graph index within the dataset");

    CLI::App* selftest = app.add_subcommand("selftest", "run the property checks");
    std::uint64_t selftest_seed = properties::SuiteOptions{}.seed;
    selftest->add_option("--seed", selftest_seed, "property suite seed");

    std::vector<std::string> storage{"liftgraph"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train->parsed()) return cmd_train(train_flags, out);
        if (sweep->parsed()) return cmd_sweep(sweep_flags, ratios, out);
        if (inspect->parsed()) return cmd_inspect(inspect_flags, params_path, graph_spec, index, out);
        if (selftest->parsed()) return cmd_selftest(selftest_seed, out);
    } catch (const std::invalid_argument& e) {
        err << "liftgraph: error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "liftgraph: error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "liftgraph: failed: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace liftgraph
