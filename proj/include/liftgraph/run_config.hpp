#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "liftgraph/data_io.hpp"
#include "liftgraph/model.hpp"
#include "liftgraph/training.hpp"

namespace liftgraph {

struct DataSource {
    std::string dataset_dir;   // TU directory
    std::string dataset_name;  // file prefix; empty means the directory name
    std::string synthetic;     // generator name, exclusive with dataset_dir
    std::size_t synthetic_graphs = 200;
    std::size_t synthetic_min_size = 6;
    std::size_t synthetic_max_size = 12;
    std::size_t degree_cap = 64;
};

inline constexpr const char* kSyntheticCyclesPaths = "cycles-paths";

/// Everything a run depends on. Persisted as run_config.json next to results.
struct RunConfig {
    ModelConfig model;
    TrainConfig train;  // train.seed mirrors seed
    DataSource data;
    std::size_t folds = 10;  // 1 runs a single hold-out split
    std::size_t seeds = 1;
    std::uint64_t seed = 0;
    std::string out = "liftgraph_out";

    /// Run seeds seed, seed + 1, ..., one per requested repetition.
    std::vector<std::uint64_t> run_seeds() const;
    /// Checks everything that does not depend on the data.
    void validate() const;
};

/// Defaults with LIFTGRAPH_SEED applied when set.
RunConfig default_run_config();
std::optional<std::uint64_t> seed_from_env();

std::string run_config_to_json(const RunConfig& config);
/// Overlays the keys present in text onto base. Unknown keys are errors.
RunConfig run_config_from_json(const std::string& text, RunConfig base);
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base);

/// Loads or generates the data and fills model.input_dim / num_classes.
Dataset load_dataset(RunConfig& config);

}  // namespace liftgraph
