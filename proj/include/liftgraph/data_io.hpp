#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "liftgraph/graph.hpp"

namespace liftgraph {

enum class FeatureKind { NodeLabelsOneHot, NodeAttributes, DegreeOneHot };

std::string_view feature_kind_name(FeatureKind kind);

struct Dataset {
    std::string name;
    std::vector<Graph> graphs;  // every graph labeled, labels in [0, num_classes)
    std::size_t num_classes = 0;
    std::size_t feature_dim = 0;
    FeatureKind feature_kind = FeatureKind::DegreeOneHot;

    std::vector<int> labels() const;
    /// Checks labels, node counts and feature widths; throws on violation.
    void validate() const;
};

struct TuOptions {
    /// Degrees at or above the cap share one overflow slot.
    std::size_t degree_cap = 64;
};

/// Reads NAME_A.txt, NAME_graph_indicator.txt, NAME_graph_labels.txt and the
/// optional NAME_node_labels.txt / NAME_node_attributes.txt from dir.
/// Features prefer attributes, then one-hot node labels, then one-hot degree.
Dataset load_tu(const std::filesystem::path& dir, const std::string& name, const TuOptions& options = {});

/// One-hot degree features with overflow bucket at cap; width min(max_deg, cap) + 1.
Matrix degree_one_hot(const Graph& g, std::size_t width, std::size_t cap);

/// Class 0 = cycle C_n, class 1 = path P_n, n uniform in [min_size, max_size],
/// labels alternating; features are one-hot degree (width 3).
Dataset synth_cycles_vs_paths(std::size_t n_graphs, std::size_t min_size, std::size_t max_size, std::uint64_t seed);

Graph make_cycle(std::size_t n);
Graph make_path(std::size_t n);

struct FoldPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> assignments;  // graph index -> fold

    /// Graph indices per fold, ascending.
    std::vector<std::vector<std::size_t>> folds() const;
};

/// Stratified assignment. Members of each class are taken in source order,
/// shuffled with the seed and dealt round-robin, the deal continuing across
/// classes, so the plan depends only on labels, source indices and seed.
FoldPlan make_folds(const Dataset& ds, std::size_t k, std::uint64_t seed);

}  // namespace liftgraph
