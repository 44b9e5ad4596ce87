#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "liftgraph/matrix.hpp"

namespace liftgraph {

struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;
    double weight = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected weighted graph with node features. Edges are stored once with
/// u < v, sorted; self-loops are rejected.
class Graph {
   public:
    Graph() = default;
    Graph(std::size_t num_nodes, std::vector<Edge> edges, Matrix features, std::optional<int> label = std::nullopt);

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Matrix& features() const { return features_; }
    std::size_t feature_dim() const { return features_.cols(); }

    std::optional<int> label() const { return label_; }
    void set_label(std::optional<int> label) { label_ = label; }

    /// Original node identifiers, carried through induced_subgraph.
    const std::optional<std::vector<std::int64_t>>& node_ids() const { return node_ids_; }
    void set_node_ids(std::vector<std::int64_t> ids);

    /// Position of the graph in its source dataset.
    std::optional<std::size_t> source_index() const { return source_index_; }
    void set_source_index(std::optional<std::size_t> index) { source_index_ = index; }

    void set_features(Matrix features);

    /// Weight of edge {a, b}; 0 when absent.
    double weight(std::size_t a, std::size_t b) const;

    /// Neighbor lists (ascending) with weights.
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_lists() const;
    Matrix dense_adjacency() const;

   private:
    std::size_t num_nodes_ = 0;
    std::vector<Edge> edges_;
    Matrix features_;
    std::optional<int> label_;
    std::optional<std::vector<std::int64_t>> node_ids_;
    std::optional<std::size_t> source_index_;
};

enum class NormMode {
    PaperLiteral,   // W / (d_i d_j)
    SymmetricSqrt,  // W / sqrt(d_i d_j)
};

std::string_view norm_mode_name(NormMode mode);
NormMode parse_norm_mode(std::string_view name);

/// Normalized adjacency with lambda self-loops, stored sparse and symmetric.
class NormalizedAdjacency {
   public:
    NormalizedAdjacency(std::shared_ptr<const CsrMatrix> csr, NormMode mode, double lambda)
        : csr_(std::move(csr)), mode_(mode), lambda_(lambda) {}

    std::size_t size() const { return csr_->rows; }
    NormMode mode() const { return mode_; }
    double lambda() const { return lambda_; }
    const std::shared_ptr<const CsrMatrix>& csr() const { return csr_; }

    double at(std::size_t i, std::size_t j) const { return csr_->at(i, j); }
    Matrix to_dense() const { return csr_->to_dense(); }

   private:
    std::shared_ptr<const CsrMatrix> csr_;
    NormMode mode_;
    double lambda_;
};

/// D_ii = sum_j W_ij.
std::vector<double> degree(const Graph& g);

NormalizedAdjacency normalize_augment(const Graph& g, NormMode mode, double lambda);

/// Connects every pair within k hops; added edges get unit weight.
Graph khop_augment(const Graph& g, std::size_t k);

/// M[a][b] = na[rows[a]][cols[b]] for disjoint rows and cols.
Matrix cross_submatrix(const NormalizedAdjacency& na, std::span<const std::size_t> rows,
                       std::span<const std::size_t> cols);

/// Sparse form of cross_submatrix; only entries of edges crossing the
/// (rows, cols) cut are materialized.
std::shared_ptr<const CsrMatrix> cross_submatrix_sparse(const NormalizedAdjacency& na,
                                                        std::span<const std::size_t> rows,
                                                        std::span<const std::size_t> cols);

/// Node to graph assignment of a batched (block-diagonal) graph.
struct Membership {
    std::vector<std::size_t> graph_of_node;
    std::size_t num_graphs = 0;

    static Membership single(std::size_t num_nodes);
    /// Node indices per graph, ascending.
    std::vector<std::vector<std::size_t>> groups() const;
};

struct Batch {
    Graph graph;
    Membership membership;
    std::vector<int> labels;  // one per member graph, -1 when unlabeled
};

Batch batch_block_diagonal(std::span<const Graph> graphs);
Batch batch_block_diagonal(std::span<const Graph* const> graphs);

Graph induced_subgraph(const Graph& g, std::span<const std::size_t> keep);

}  // namespace liftgraph
