#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "liftgraph/data_io.hpp"
#include "liftgraph/model.hpp"

namespace liftgraph {

struct TrainConfig {
    double lr = 5e-4;
    double weight_decay = 1e-4;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 1000;
    std::size_t patience = 50;
    std::uint64_t seed = 0;  // fold plan seed; run seeds are passed separately
    std::size_t workers = 1;

    void validate() const;
};

struct FoldReport {
    std::size_t fold = 0;
    std::uint64_t seed = 0;
    std::size_t best_epoch = 0;  // 1-based
    std::size_t epochs_run = 0;
    double best_val_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::vector<double> train_curve;  // mean training loss per epoch
};

/// First and second moment estimates aligned with ModelParams::entries().
struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    std::size_t t = 0;

    static AdamState zeros_like(const ModelParams& params);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// One Adam step with decoupled weight decay: p -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * p).
void adam_step(ModelParams& params, std::span<const Matrix> grads, AdamState& state, double lr, double weight_decay);

/// Fraction of graphs whose argmax logit (first on ties) equals the label.
double accuracy(const ModelParams& params, const ModelConfig& config, std::span<const Graph* const> graphs,
                std::size_t batch_size);

/// Mean loss of a batch plus gradients aligned with params.entries().
struct LossAndGrads {
    double loss = 0.0;
    std::vector<Matrix> grads;
};
LossAndGrads loss_and_grads(const Batch& batch, const ModelParams& params, const ModelConfig& config,
                            const ForwardOptions& options);

struct TrainResult {
    ModelParams best_params;
    FoldReport report;  // test_accuracy left at 0
};

/// Seeded shuffle -> batch -> forward -> loss -> backward -> Adam per epoch,
/// early stopping on validation accuracy; returns the best-validation
/// parameters (earliest epoch on ties).
TrainResult train_one(std::span<const Graph* const> train, std::span<const Graph* const> val, const ModelConfig& model,
                      const TrainConfig& config, std::uint64_t seed);

struct CvSummary {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    std::size_t n_runs = 0;
    std::vector<FoldReport> reports;  // fold-major, then seed
    ModelParams first_params;          // best parameters of fold 0, first seed
};

/// For each fold f and seed: test on fold f, validate on fold (f + 1) mod k,
/// train on the remaining k - 2 folds.
CvSummary cross_validate(const Dataset& ds, std::size_t k, std::span<const std::uint64_t> seeds,
                         const ModelConfig& model, const TrainConfig& config,
                         const std::function<void(const FoldReport&)>& on_report = {});

std::string metrics_csv(std::span<const FoldReport> reports);
std::string summary_json(const CvSummary& summary);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace liftgraph
