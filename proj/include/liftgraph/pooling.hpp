#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "liftgraph/autodiff.hpp"
#include "liftgraph/graph.hpp"

namespace liftgraph {

enum class ScoreActivation { Tanh };

struct PoolConfig {
    double ratio = 0.5;
    /// 0 disables lifting, which yields the SAGPool baseline.
    std::size_t num_lift_layers = 1;
    ScoreActivation score_activation = ScoreActivation::Tanh;
    bool gate_with_scores = true;
    /// Hop radius of the graph used to build the lifting cross-matrices.
    std::size_t lift_hops = 1;

    void validate() const;
};

/// Diagonal prediction and update scales of one lifting layer, 1 x d each.
struct LiftParams {
    DiffMatrix theta_p;
    DiffMatrix theta_u;
};

struct PoolParams {
    DiffMatrix theta_s;  // d x 1
    std::vector<LiftParams> lifts;
};

struct Selection {
    std::vector<std::size_t> preserved;  // per graph, descending score
    std::vector<std::size_t> removed;    // per graph, ascending index
};

/// tanh(W_a H Theta_s), one score per node (n x 1).
DiffMatrix compute_scores(const NormalizedAdjacency& na, const DiffMatrix& h, const DiffMatrix& theta_s);

/// max(1, ceil(ratio * n)).
std::size_t preserved_count(std::size_t n, double ratio);

/// Per graph top-k by score; ties go to the smaller node index.
Selection select_topk(std::span<const double> scores, const Membership& membership, double ratio);

struct LiftResult {
    DiffMatrix h_hat_p;  // |V^p| x d, rows in preserved order
    DiffMatrix h_hat_r;  // |V^r| x d, rows in removed order
    /// Nonzero cross-matrix entries touched over all layers; each costs d
    /// multiply-adds.
    std::size_t cut_entries_visited = 0;
};

/// Stacked predict/update lifting across the preserved/removed cut:
///   H^r <- H^r - ReLU(M_pr H^p diag(theta_p))
///   H^p <- H^p + ReLU(M_rp H^r diag(theta_u))
/// where M_pr holds the na_lift entries with removed rows and preserved
/// columns, and M_rp is its transpose.
LiftResult lift(const NormalizedAdjacency& na_lift, const DiffMatrix& h, const Selection& selection,
                std::span<const LiftParams> layers);

struct CoarsenResult {
    Graph coarse;
    DiffMatrix x_next;
};

/// Keeps the preserved rows (already lifted); optionally multiplies each row
/// by its node score. The coarse graph is the induced subgraph on preserved.
CoarsenResult coarsen(const Graph& g, const DiffMatrix& h_hat_p, std::span<const std::size_t> preserved,
                      const DiffMatrix& scores, bool gate_with_scores);

struct PoolingOutcome {
    std::vector<std::size_t> preserved;
    std::vector<std::size_t> removed;
    std::vector<double> scores;  // per input node
    DiffMatrix score_matrix;     // n x 1, differentiable
    DiffMatrix lifted_preserved;
    DiffMatrix x_next;
    Graph coarse_graph;
    Membership membership_out;
    std::size_t cut_entries_visited = 0;
};

/// Node selection, lifting (skipped without lift layers) and coarsening.
PoolingOutcome liftpool(const Graph& g, const Membership& membership, const NormalizedAdjacency& na,
                        const DiffMatrix& h, const PoolConfig& config, const PoolParams& params);

/// Per pooling level: which input nodes survived, their scores and the
/// coarse edges, all in original node ids.
struct HierarchyLevel {
    std::size_t level = 0;
    std::vector<std::int64_t> node_ids;  // nodes entering this level
    std::vector<double> scores;          // aligned with node_ids
    std::vector<std::int64_t> preserved_ids;
    std::vector<std::pair<std::int64_t, std::int64_t>> coarse_edges;
};

struct PoolingHierarchy {
    std::vector<std::int64_t> input_ids;
    std::vector<std::pair<std::int64_t, std::int64_t>> input_edges;
    std::vector<HierarchyLevel> levels;
};

/// Assembles the hierarchy of a single graph from the outcomes of successive
/// pooling calls. Node ids come from Graph::node_ids, else positions.
PoolingHierarchy build_hierarchy(const Graph& input, std::span<const Graph> level_inputs,
                                 std::span<const PoolingOutcome> outcomes);

std::string hierarchy_to_json(const PoolingHierarchy& hierarchy);
std::string hierarchy_to_dot(const PoolingHierarchy& hierarchy);

}  // namespace liftgraph
