#include "liftgraph/model.hpp"

#include <algorithm>
#include <cmath>

#include "liftgraph/errors.hpp"
#include "liftgraph/layers.hpp"
#include "liftgraph/random.hpp"

namespace liftgraph {

void ModelConfig::validate() const {
    if (input_dim == 0) throw ConfigError("input_dim must be positive");
    if (hidden_dim == 0) throw ConfigError("hidden_dim must be positive");
    if (num_blocks == 0) throw ConfigError("num_blocks must be at least 1");
    if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    pool.validate();
}

namespace param_names {
std::string gcn(std::size_t block) { return "block" + std::to_string(block) + ".gcn.theta"; }
std::string score(std::size_t block) { return "block" + std::to_string(block) + ".score.theta"; }
std::string lift_predict(std::size_t block, std::size_t layer) {
    return "block" + std::to_string(block) + ".lift" + std::to_string(layer) + ".theta_p";
}
std::string lift_update(std::size_t block, std::size_t layer) {
    return "block" + std::to_string(block) + ".lift" + std::to_string(layer) + ".theta_u";
}
}  // namespace param_names

std::vector<ParamShape> param_layout(const ModelConfig& config) {
    const std::size_t d = config.hidden_dim;
    std::vector<ParamShape> layout;
    for (std::size_t b = 0; b < config.num_blocks; ++b) {
        layout.push_back({param_names::gcn(b), b == 0 ? config.input_dim : d, d});
        layout.push_back({param_names::score(b), d, 1});
        for (std::size_t l = 0; l < config.pool.num_lift_layers; ++l) {
            layout.push_back({param_names::lift_predict(b, l), 1, d});
            layout.push_back({param_names::lift_update(b, l), 1, d});
        }
    }
    const std::size_t h = config.head_hidden();
    layout.push_back({std::string(param_names::kFc1Weight), 2 * d, h});
    layout.push_back({std::string(param_names::kFc1Bias), 1, h});
    layout.push_back({std::string(param_names::kFc2Weight), h, config.num_classes});
    layout.push_back({std::string(param_names::kFc2Bias), 1, config.num_classes});
    return layout;
}

void ModelParams::add(std::string name, Matrix value) {
    if (find(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
    entries_.emplace_back(std::move(name), std::move(value));
}

const Matrix* ModelParams::find(std::string_view name) const {
    for (const auto& [n, m] : entries_)
        if (n == name) return &m;
    return nullptr;
}

const Matrix& ModelParams::at(std::string_view name) const {
    if (const Matrix* m = find(name)) return *m;
    throw std::out_of_range("no parameter named '" + std::string(name) + "'");
}

Matrix& ModelParams::at(std::string_view name) {
    return const_cast<Matrix&>(static_cast<const ModelParams&>(*this).at(name));
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    ModelParams params;
    const std::size_t d = config.hidden_dim;
    for (const ParamShape& shape : param_layout(config)) {
        const bool is_bias = shape.name.ends_with(".bias");
        const bool is_diagonal = shape.name.find(".lift") != std::string::npos;
        if (is_bias) {
            params.add(shape.name, Matrix(shape.rows, shape.cols));
        } else if (is_diagonal) {
            params.add(shape.name, glorot_uniform(shape.rows, shape.cols, d, d, rng));
        } else {
            params.add(shape.name, glorot_uniform(shape.rows, shape.cols, rng));
        }
    }
    return params;
}

void check_params(const ModelParams& params, const ModelConfig& config) {
    const auto layout = param_layout(config);
    for (const ParamShape& shape : layout) {
        const Matrix* m = params.find(shape.name);
        if (!m) throw ShapeError("parameter '" + shape.name + "' missing");
        if (m->rows() != shape.rows || m->cols() != shape.cols) {
            throw ShapeError("parameter '" + shape.name + "' has shape " + m->shape_string() + ", config expects " +
                             shape_string(shape.rows, shape.cols));
        }
    }
    if (params.size() != layout.size()) {
        for (const auto& [name, m] : params.entries()) {
            const bool known = std::any_of(layout.begin(), layout.end(), [&](const ParamShape& s) { return s.name == name; });
            if (!known) throw ShapeError("parameter '" + name + "' not part of the configured model");
        }
    }
}

ParamCounts count_params(const ModelParams& params) {
    ParamCounts counts;
    for (const auto& [name, m] : params.entries()) {
        counts.per_tensor.emplace_back(name, m.size());
        counts.total += m.size();
        if (name.find(".lift") != std::string::npos) counts.lifting += m.size();
    }
    return counts;
}

BoundParams::BoundParams(Tape& tape, const ModelParams& params) {
    entries_.reserve(params.size());
    for (const auto& [name, m] : params.entries()) entries_.emplace_back(name, tape.leaf(m));
}

BoundParams BoundParams::constants(const ModelParams& params) {
    BoundParams b;
    for (const auto& [name, m] : params.entries()) b.entries_.emplace_back(name, DiffMatrix::constant(m));
    return b;
}

BoundParams BoundParams::from_leaves(const ModelParams& params, std::span<const DiffMatrix> leaves) {
    if (leaves.size() != params.size()) {
        throw ShapeError("from_leaves: " + std::to_string(leaves.size()) + " leaves for " + std::to_string(params.size()) +
                         " parameters");
    }
    BoundParams b;
    for (std::size_t i = 0; i < leaves.size(); ++i) b.entries_.emplace_back(params.entries()[i].first, leaves[i]);
    return b;
}

const DiffMatrix& BoundParams::operator[](std::string_view name) const {
    for (const auto& [n, m] : entries_)
        if (n == name) return m;
    throw std::out_of_range("no bound parameter named '" + std::string(name) + "'");
}

DiffMatrix forward(const Batch& batch, const BoundParams& params, const ModelConfig& config,
                   const ForwardOptions& options, ForwardTrace* trace) {
    if (batch.graph.feature_dim() != config.input_dim) {
        throw ShapeError("forward: batch feature dimension " + std::to_string(batch.graph.feature_dim()) +
                         " differs from configured input_dim " + std::to_string(config.input_dim));
    }
    for (const auto& group : batch.membership.groups()) {
        if (group.empty()) throw std::invalid_argument("forward: batch contains an empty graph");
    }

    Graph graph = batch.graph;
    Membership membership = batch.membership;
    DiffMatrix x = DiffMatrix::constant(graph.features());
    DiffMatrix pooled_sum;
    for (std::size_t b = 0; b < config.num_blocks; ++b) {
        const NormalizedAdjacency na = normalize_augment(graph, config.norm_mode, config.lambda);
        const DiffMatrix h = gcn_forward(na, x, params[param_names::gcn(b)]);

        PoolParams pool_params;
        pool_params.theta_s = params[param_names::score(b)];
        for (std::size_t l = 0; l < config.pool.num_lift_layers; ++l) {
            pool_params.lifts.push_back({params[param_names::lift_predict(b, l)], params[param_names::lift_update(b, l)]});
        }
        PoolingOutcome outcome = liftpool(graph, membership, na, h, config.pool, pool_params);

        const DiffMatrix level = readout(outcome.x_next, outcome.membership_out);
        pooled_sum = b == 0 ? level : add(pooled_sum, level);

        x = outcome.x_next;
        membership = outcome.membership_out;
        Graph next = outcome.coarse_graph;
        if (trace) {
            trace->level_inputs.push_back(std::move(graph));
            trace->outcomes.push_back(std::move(outcome));
        }
        graph = std::move(next);
    }

    DiffMatrix z = relu(add_row_vector(matmul(pooled_sum, params[param_names::kFc1Weight]), params[param_names::kFc1Bias]));
    if (options.train_mode && config.dropout_rate > 0.0) {
        Rng rng(options.dropout_seed);
        const double keep = 1.0 - config.dropout_rate;
        Matrix mask(z.rows(), z.cols());
        for (double& m : mask.data()) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
        z = hadamard(z, DiffMatrix::constant(std::move(mask)));
    }
    return add_row_vector(matmul(z, params[param_names::kFc2Weight]), params[param_names::kFc2Bias]);
}

Matrix predict_logits(const Batch& batch, const ModelParams& params, const ModelConfig& config) {
    return forward(batch, BoundParams::constants(params), config).value();
}

PoolingHierarchy trace_hierarchy(const Graph& graph, const ModelParams& params, const ModelConfig& config) {
    check_params(params, config);
    std::span<const Graph> one(&graph, 1);
    const Batch batch = batch_block_diagonal(one);
    ForwardTrace trace;
    forward(batch, BoundParams::constants(params), config, {}, &trace);
    return build_hierarchy(batch.graph, trace.level_inputs, trace.outcomes);
}

}  // namespace liftgraph
