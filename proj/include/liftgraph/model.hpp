#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "liftgraph/autodiff.hpp"
#include "liftgraph/graph.hpp"
#include "liftgraph/pooling.hpp"

namespace liftgraph {

/// Hierarchical classifier: num_blocks x (GCN -> pooling), a mean||max
/// readout after every block, readouts summed, then
/// dense -> ReLU -> dropout -> dense.
struct ModelConfig {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 128;
    std::size_t num_blocks = 3;
    PoolConfig pool;
    std::size_t num_classes = 2;
    std::size_t classifier_hidden = 0;  // 0 means hidden_dim
    double dropout_rate = 0.5;
    NormMode norm_mode = NormMode::SymmetricSqrt;
    double lambda = 1.0;

    void validate() const;
    std::size_t head_hidden() const { return classifier_hidden == 0 ? hidden_dim : classifier_hidden; }
};

struct ParamShape {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

/// Name and shape of every trainable tensor, in storage order.
std::vector<ParamShape> param_layout(const ModelConfig& config);

namespace param_names {
std::string gcn(std::size_t block);
std::string score(std::size_t block);
std::string lift_predict(std::size_t block, std::size_t layer);
std::string lift_update(std::size_t block, std::size_t layer);
inline constexpr std::string_view kFc1Weight = "classifier.fc1.weight";
inline constexpr std::string_view kFc1Bias = "classifier.fc1.bias";
inline constexpr std::string_view kFc2Weight = "classifier.fc2.weight";
inline constexpr std::string_view kFc2Bias = "classifier.fc2.bias";
}  // namespace param_names

/// Ordered set of named matrices.
class ModelParams {
   public:
    void add(std::string name, Matrix value);
    const Matrix* find(std::string_view name) const;
    const Matrix& at(std::string_view name) const;
    Matrix& at(std::string_view name);

    std::size_t size() const { return entries_.size(); }
    const std::vector<std::pair<std::string, Matrix>>& entries() const { return entries_; }
    std::vector<std::pair<std::string, Matrix>>& entries() { return entries_; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

   private:
    std::vector<std::pair<std::string, Matrix>> entries_;
};

/// Glorot-uniform weights, zero biases; lifting diagonals use the bound of a
/// d x d layer.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

/// Throws ShapeError naming the first tensor whose name or shape differs
/// from the layout of config.
void check_params(const ModelParams& params, const ModelConfig& config);

struct ParamCounts {
    std::vector<std::pair<std::string, std::size_t>> per_tensor;
    std::size_t total = 0;
    std::size_t lifting = 0;
};

ParamCounts count_params(const ModelParams& params);

/// Parameters bound to a tape as leaves, or as constants for inference.
class BoundParams {
   public:
    BoundParams(Tape& tape, const ModelParams& params);
    static BoundParams constants(const ModelParams& params);
    /// Names from params, values from existing leaves in the same order.
    static BoundParams from_leaves(const ModelParams& params, std::span<const DiffMatrix> leaves);

    const DiffMatrix& operator[](std::string_view name) const;
    const std::vector<std::pair<std::string, DiffMatrix>>& entries() const { return entries_; }

   private:
    BoundParams() = default;
    std::vector<std::pair<std::string, DiffMatrix>> entries_;
};

struct ForwardOptions {
    bool train_mode = false;
    std::uint64_t dropout_seed = 0;
};

/// Per block: the graph entering pooling and the pooling outcome.
struct ForwardTrace {
    std::vector<Graph> level_inputs;
    std::vector<PoolingOutcome> outcomes;
};

/// num_graphs x num_classes logits.
DiffMatrix forward(const Batch& batch, const BoundParams& params, const ModelConfig& config,
                   const ForwardOptions& options = {}, ForwardTrace* trace = nullptr);

/// Evaluation-mode logits without recording a tape.
Matrix predict_logits(const Batch& batch, const ModelParams& params, const ModelConfig& config);

/// Pooling hierarchy of one graph under trained parameters.
PoolingHierarchy trace_hierarchy(const Graph& graph, const ModelParams& params, const ModelConfig& config);

// Parameter file: little-endian, "LGPARAMS" magic, u32 version, u32 count,
// per tensor {u32 name length, name bytes, u64 rows, u64 cols}, then the raw
// f64 values of every tensor in table order.
inline constexpr std::uint32_t kParamFileVersion = 1;

std::vector<std::uint8_t> serialize_params(const ModelParams& params);
ModelParams deserialize_params(std::span<const std::uint8_t> bytes);
void save_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_params(const std::filesystem::path& path);
/// Loads and verifies against the layout implied by config.
ModelParams load_params(const std::filesystem::path& path, const ModelConfig& config);

}  // namespace liftgraph
