#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "liftgraph/commands.hpp"
#include "liftgraph/data_io.hpp"
#include "liftgraph/errors.hpp"
#include "liftgraph/graph.hpp"
#include "liftgraph/lifting_1d.hpp"
#include "liftgraph/model.hpp"
#include "liftgraph/training.hpp"
#include "properties/property_suite.hpp"

namespace py = pybind11;
using namespace liftgraph;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_numpy(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

Matrix from_numpy(const Array& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-D array, got " + std::to_string(a.ndim()) + " dimensions");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

std::vector<const Graph*> pointers(const std::vector<Graph>& graphs) {
    std::vector<const Graph*> out;
    for (const Graph& g : graphs) out.push_back(&g);
    return out;
}

Batch batch_of(const std::vector<Graph>& graphs) {
    const auto ptrs = pointers(graphs);
    return batch_block_diagonal(std::span<const Graph* const>(ptrs));
}

py::dict report_dict(const FoldReport& r) {
    py::dict d;
    d["fold"] = r.fold;
    d["seed"] = r.seed;
    d["best_epoch"] = r.best_epoch;
    d["epochs_run"] = r.epochs_run;
    d["best_val_accuracy"] = r.best_val_accuracy;
    d["test_accuracy"] = r.test_accuracy;
    d["train_curve"] = r.train_curve;
    return d;
}

}  // namespace

PYBIND11_MODULE(_liftgraph, m) {
    m.doc() = "Hierarchical graph classification with lifting-based pooling";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

    py::class_<Graph>(m, "Graph")
        .def(py::init([](std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
                         const Array& features, std::optional<int> label) {
                 std::vector<Edge> es;
                 for (const auto& [u, v, w] : edges) es.push_back({u, v, w});
                 return Graph(n, std::move(es), from_numpy(features), label);
             }),
             py::arg("num_nodes"), py::arg("edges"), py::arg("features"), py::arg("label") = py::none())
        .def_property_readonly("num_nodes", &Graph::num_nodes)
        .def_property_readonly("num_edges", &Graph::num_edges)
        .def_property_readonly("feature_dim", &Graph::feature_dim)
        .def_property_readonly("edges",
                               [](const Graph& g) {
                                   std::vector<std::tuple<std::size_t, std::size_t, double>> out;
                                   for (const Edge& e : g.edges()) out.emplace_back(e.u, e.v, e.weight);
                                   return out;
                               })
        .def_property(
            "features", [](const Graph& g) { return to_numpy(g.features()); },
            [](Graph& g, const Array& f) { g.set_features(from_numpy(f)); })
        .def_property("label", &Graph::label, &Graph::set_label)
        .def("dense_adjacency", [](const Graph& g) { return to_numpy(g.dense_adjacency()); })
        .def("__repr__", [](const Graph& g) {
            return "<Graph " + std::to_string(g.num_nodes()) + " nodes, " + std::to_string(g.num_edges()) + " edges>";
        });

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("name", &Dataset::name)
        .def_readonly("graphs", &Dataset::graphs)
        .def_readonly("num_classes", &Dataset::num_classes)
        .def_readonly("feature_dim", &Dataset::feature_dim)
        .def_property_readonly("feature_kind", [](const Dataset& d) { return std::string(feature_kind_name(d.feature_kind)); })
        .def("labels", &Dataset::labels)
        .def("__len__", [](const Dataset& d) { return d.graphs.size(); });

    py::class_<PoolConfig>(m, "PoolConfig")
        .def(py::init<>())
        .def_readwrite("ratio", &PoolConfig::ratio)
        .def_readwrite("num_lift_layers", &PoolConfig::num_lift_layers)
        .def_readwrite("gate_with_scores", &PoolConfig::gate_with_scores)
        .def_readwrite("lift_hops", &PoolConfig::lift_hops)
        .def("validate", &PoolConfig::validate);

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("input_dim", &ModelConfig::input_dim)
        .def_readwrite("hidden_dim", &ModelConfig::hidden_dim)
        .def_readwrite("num_blocks", &ModelConfig::num_blocks)
        .def_readwrite("pool", &ModelConfig::pool)
        .def_readwrite("num_classes", &ModelConfig::num_classes)
        .def_readwrite("classifier_hidden", &ModelConfig::classifier_hidden)
        .def_readwrite("dropout_rate", &ModelConfig::dropout_rate)
        .def_property(
            "norm_mode", [](const ModelConfig& c) { return std::string(norm_mode_name(c.norm_mode)); },
            [](ModelConfig& c, const std::string& s) { c.norm_mode = parse_norm_mode(s); })
        .def_readwrite("lam", &ModelConfig::lambda)
        .def("validate", &ModelConfig::validate);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("weight_decay", &TrainConfig::weight_decay)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("max_epochs", &TrainConfig::max_epochs)
        .def_readwrite("patience", &TrainConfig::patience)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("workers", &TrainConfig::workers)
        .def("validate", &TrainConfig::validate);

    py::class_<ModelParams>(m, "Params")
        .def("names",
             [](const ModelParams& p) {
                 std::vector<std::string> out;
                 for (const auto& [name, _] : p.entries()) out.push_back(name);
                 return out;
             })
        .def("__len__", &ModelParams::size)
        .def("__contains__", [](const ModelParams& p, const std::string& name) { return p.find(name) != nullptr; })
        .def("__getitem__",
             [](const ModelParams& p, const std::string& name) {
                 const Matrix* v = p.find(name);
                 if (v == nullptr) throw py::key_error(name);
                 return to_numpy(*v);
             })
        .def("__setitem__",
             [](ModelParams& p, const std::string& name, const Array& value) {
                 if (p.find(name) == nullptr) throw py::key_error(name);
                 Matrix& slot = p.at(name);
                 Matrix next = from_numpy(value);
                 if (next.rows() != slot.rows() || next.cols() != slot.cols()) {
                     throw ShapeError("parameter '" + name + "' has shape " + slot.shape_string() + ", got " +
                                      next.shape_string());
                 }
                 slot = std::move(next);
             })
        .def("__eq__", [](const ModelParams& a, const ModelParams& b) { return a == b; })
        .def("to_bytes",
             [](const ModelParams& p) {
                 const auto bytes = serialize_params(p);
                 return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
             })
        .def_static("from_bytes",
                    [](const py::bytes& b) {
                        const std::string s = b;
                        return deserialize_params(std::span<const std::uint8_t>(
                            reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
                    })
        .def("save", [](const ModelParams& p, const std::string& path) { save_params(p, path); })
        .def_static("load", [](const std::string& path) { return load_params(path); });

    m.def("degree", &degree, py::arg("graph"));
    m.def(
        "normalized_adjacency",
        [](const Graph& g, const std::string& mode, double lam) {
            return to_numpy(normalize_augment(g, parse_norm_mode(mode), lam).to_dense());
        },
        py::arg("graph"), py::arg("mode") = "symmetric", py::arg("lam") = 1.0,
        "Dense view of the normalized adjacency plus lam * I.");
    m.def("khop_augment", &khop_augment, py::arg("graph"), py::arg("k"));
    m.def(
        "induced_subgraph", [](const Graph& g, const std::vector<std::size_t>& keep) { return induced_subgraph(g, keep); },
        py::arg("graph"), py::arg("keep"));
    m.def("make_cycle", &make_cycle, py::arg("n"));
    m.def("make_path", &make_path, py::arg("n"));
    m.def(
        "degree_one_hot", [](const Graph& g, std::size_t width, std::size_t cap) { return to_numpy(degree_one_hot(g, width, cap)); },
        py::arg("graph"), py::arg("width"), py::arg("cap"));
    m.def("synth_cycles_vs_paths", &synth_cycles_vs_paths, py::arg("n_graphs"), py::arg("min_size") = 6,
          py::arg("max_size") = 12, py::arg("seed") = 0);
    m.def(
        "load_tu",
        [](const std::string& dir, const std::string& name, std::size_t degree_cap) {
            TuOptions o;
            o.degree_cap = degree_cap;
            return load_tu(dir, name, o);
        },
        py::arg("directory"), py::arg("name"), py::arg("degree_cap") = 64);

    m.def("param_layout", [](const ModelConfig& c) {
        std::vector<std::tuple<std::string, std::size_t, std::size_t>> out;
        for (const auto& s : param_layout(c)) out.emplace_back(s.name, s.rows, s.cols);
        return out;
    });
    m.def("init_params", &init_params, py::arg("config"), py::arg("seed") = 0);
    m.def("count_params", [](const ModelParams& p) {
        const ParamCounts c = count_params(p);
        py::dict d;
        d["total"] = c.total;
        d["lifting"] = c.lifting;
        d["per_tensor"] = c.per_tensor;
        return d;
    });
    m.def(
        "predict_logits",
        [](const std::vector<Graph>& graphs, const ModelParams& p, const ModelConfig& c) {
            return to_numpy(predict_logits(batch_of(graphs), p, c));
        },
        py::arg("graphs"), py::arg("params"), py::arg("config"));
    m.def(
        "loss_and_grads",
        [](const std::vector<Graph>& graphs, const ModelParams& p, const ModelConfig& c, bool train_mode,
           std::uint64_t dropout_seed) {
            ForwardOptions o;
            o.train_mode = train_mode;
            o.dropout_seed = dropout_seed;
            const LossAndGrads r = loss_and_grads(batch_of(graphs), p, c, o);
            py::dict grads;
            for (std::size_t i = 0; i < r.grads.size(); ++i) grads[py::str(p.entries()[i].first)] = to_numpy(r.grads[i]);
            return py::make_tuple(r.loss, grads);
        },
        py::arg("graphs"), py::arg("params"), py::arg("config"), py::arg("train_mode") = false,
        py::arg("dropout_seed") = 0, "Mean cross-entropy and its gradient for every parameter.");
    m.def(
        "accuracy",
        [](const ModelParams& p, const ModelConfig& c, const std::vector<Graph>& graphs, std::size_t batch_size) {
            const auto ptrs = pointers(graphs);
            return accuracy(p, c, ptrs, batch_size);
        },
        py::arg("params"), py::arg("config"), py::arg("graphs"), py::arg("batch_size") = 32);
    m.def(
        "hierarchy_json",
        [](const Graph& g, const ModelParams& p, const ModelConfig& c) { return hierarchy_to_json(trace_hierarchy(g, p, c)); },
        py::arg("graph"), py::arg("params"), py::arg("config"));
    m.def(
        "hierarchy_dot",
        [](const Graph& g, const ModelParams& p, const ModelConfig& c) { return hierarchy_to_dot(trace_hierarchy(g, p, c)); },
        py::arg("graph"), py::arg("params"), py::arg("config"));

    m.def(
        "cross_validate",
        [](const Dataset& ds, std::size_t k, const std::vector<std::uint64_t>& seeds, const ModelConfig& model,
           const TrainConfig& train) {
            CvSummary s;
            {
                py::gil_scoped_release release;
                s = cross_validate(ds, k, seeds, model, train);
            }
            py::dict d;
            d["mean"] = s.mean;
            d["std"] = s.std;
            d["n_runs"] = s.n_runs;
            py::list reports;
            for (const auto& r : s.reports) reports.append(report_dict(r));
            d["reports"] = reports;
            d["metrics_csv"] = metrics_csv(s.reports);
            d["first_params"] = s.first_params;
            return d;
        },
        py::arg("dataset"), py::arg("k"), py::arg("seeds"), py::arg("model"), py::arg("train"));

    m.def(
        "classical_lift_1d",
        [](const std::vector<double>& x, double predict, double update) {
            const LiftedSignal s = classical_lift_1d(x, predict, update);
            return py::make_tuple(s.approx, s.detail);
        },
        py::arg("signal"), py::arg("predict"), py::arg("update"));
    m.def(
        "classical_unlift_1d",
        [](const std::vector<double>& approx, const std::vector<double>& detail, double predict, double update) {
            return classical_unlift_1d(LiftedSignal{approx, detail}, predict, update);
        },
        py::arg("approx"), py::arg("detail"), py::arg("predict"), py::arg("update"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");
    m.def("run_property_suite", [] {
        py::list out;
        for (const auto& r : properties::run_property_suite()) {
            py::dict d;
            d["name"] = r.name;
            d["passed"] = r.passed;
            d["detail"] = r.detail;
            out.append(d);
        }
        return out;
    });
}
