#include "liftgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "liftgraph/errors.hpp"

namespace liftgraph {

namespace {

// Validates an index list: in range and unique.
void check_indices(const char* op, std::span<const std::size_t> idx, std::size_t n) {
    std::vector<char> seen(n, 0);
    for (std::size_t i : idx) {
        if (i >= n) throw IndexError(std::string(op) + ": index " + std::to_string(i) + " out of range for size " + std::to_string(n));
        if (seen[i]) throw IndexError(std::string(op) + ": duplicate index " + std::to_string(i));
        seen[i] = 1;
    }
}

}  // namespace

Graph::Graph(std::size_t num_nodes, std::vector<Edge> edges, Matrix features, std::optional<int> label)
    : num_nodes_(num_nodes), edges_(std::move(edges)), label_(label) {
    for (Edge& e : edges_) {
        if (e.u >= num_nodes_ || e.v >= num_nodes_) {
            throw IndexError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ") outside graph of " +
                             std::to_string(num_nodes_) + " nodes");
        }
        if (e.u == e.v) throw std::invalid_argument("self-loop at node " + std::to_string(e.u));
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
            throw std::invalid_argument("edge weight must be finite and non-negative");
        }
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    for (std::size_t i = 1; i < edges_.size(); ++i) {
        if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v) {
            throw std::invalid_argument("duplicate edge (" + std::to_string(edges_[i].u) + ", " +
                                        std::to_string(edges_[i].v) + ")");
        }
    }
    set_features(std::move(features));
}

void Graph::set_features(Matrix features) {
    if (features.rows() != num_nodes_) {
        throw ShapeError("features " + features.shape_string() + " for graph of " + std::to_string(num_nodes_) + " nodes");
    }
    features_ = std::move(features);
}

void Graph::set_node_ids(std::vector<std::int64_t> ids) {
    if (ids.size() != num_nodes_) throw ShapeError("node id list length differs from node count");
    node_ids_ = std::move(ids);
}

double Graph::weight(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{a, b, 0.0}, [](const Edge& x, const Edge& y) {
        return x.u != y.u ? x.u < y.u : x.v < y.v;
    });
    if (it == edges_.end() || it->u != a || it->v != b) return 0.0;
    return it->weight;
}

std::vector<std::vector<std::pair<std::size_t, double>>> Graph::adjacency_lists() const {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(num_nodes_);
    for (const Edge& e : edges_) {
        adj[e.u].emplace_back(e.v, e.weight);
        adj[e.v].emplace_back(e.u, e.weight);
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    return adj;
}

Matrix Graph::dense_adjacency() const {
    Matrix w(num_nodes_, num_nodes_);
    for (const Edge& e : edges_) {
        w(e.u, e.v) = e.weight;
        w(e.v, e.u) = e.weight;
    }
    return w;
}

std::string_view norm_mode_name(NormMode mode) {
    return mode == NormMode::PaperLiteral ? "paper" : "symmetric";
}

NormMode parse_norm_mode(std::string_view name) {
    if (name == "paper" || name == "paper_literal") return NormMode::PaperLiteral;
    if (name == "symmetric" || name == "symmetric_sqrt") return NormMode::SymmetricSqrt;
    throw ConfigError("unknown normalization mode '" + std::string(name) + "'");
}

std::vector<double> degree(const Graph& g) {
    const auto adj = g.adjacency_lists();
    std::vector<double> d(g.num_nodes(), 0.0);
    for (std::size_t i = 0; i < adj.size(); ++i)
        for (const auto& [j, w] : adj[i]) d[i] += w;
    return d;
}

NormalizedAdjacency normalize_augment(const Graph& g, NormMode mode, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and non-negative");
    const auto adj = g.adjacency_lists();
    const std::size_t n = g.num_nodes();
    const std::vector<double> deg = degree(g);

    auto csr = std::make_shared<CsrMatrix>();
    csr->rows = csr->cols = n;
    csr->row_ptr.assign(1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        bool diagonal_done = lambda == 0.0;
        for (const auto& [j, w] : adj[i]) {
            if (!diagonal_done && j > i) {
                csr->col_idx.push_back(i);
                csr->values.push_back(lambda);
                diagonal_done = true;
            }
            const double dd = deg[i] * deg[j];
            double value = 0.0;
            if (dd > 0.0) value = mode == NormMode::PaperLiteral ? w / dd : w / std::sqrt(dd);
            csr->col_idx.push_back(j);
            csr->values.push_back(value);
        }
        if (!diagonal_done) {
            csr->col_idx.push_back(i);
            csr->values.push_back(lambda);
        }
        csr->row_ptr.push_back(csr->col_idx.size());
    }
    return NormalizedAdjacency(std::move(csr), mode, lambda);
}

Graph khop_augment(const Graph& g, std::size_t k) {
    if (k == 0) throw ConfigError("khop_augment: k must be at least 1");
    if (k == 1) return g;
    const auto adj = g.adjacency_lists();
    const std::size_t n = g.num_nodes();
    std::vector<Edge> edges = g.edges();
    std::vector<std::size_t> dist(n);
    std::deque<std::size_t> queue;
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), static_cast<std::size_t>(-1));
        dist[s] = 0;
        queue.assign(1, s);
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            if (dist[u] == k) continue;
            for (const auto& [v, w] : adj[u]) {
                if (dist[v] != static_cast<std::size_t>(-1)) continue;
                dist[v] = dist[u] + 1;
                if (dist[v] >= 2 && s < v) edges.push_back({s, v, 1.0});
                queue.push_back(v);
            }
        }
    }
    Graph out(n, std::move(edges), g.features(), g.label());
    if (g.node_ids()) out.set_node_ids(*g.node_ids());
    out.set_source_index(g.source_index());
    return out;
}

namespace {

void check_cross_indices(const NormalizedAdjacency& na, std::span<const std::size_t> rows,
                         std::span<const std::size_t> cols) {
    check_indices("cross_submatrix rows", rows, na.size());
    check_indices("cross_submatrix cols", cols, na.size());
    std::vector<char> in_rows(na.size(), 0);
    for (std::size_t r : rows) in_rows[r] = 1;
    for (std::size_t c : cols) {
        if (in_rows[c]) throw IndexError("cross_submatrix: node " + std::to_string(c) + " in both row and column sets");
    }
}

}  // namespace

Matrix cross_submatrix(const NormalizedAdjacency& na, std::span<const std::size_t> rows,
                       std::span<const std::size_t> cols) {
    check_cross_indices(na, rows, cols);
    Matrix m(rows.size(), cols.size());
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b) m(a, b) = na.at(rows[a], cols[b]);
    return m;
}

std::shared_ptr<const CsrMatrix> cross_submatrix_sparse(const NormalizedAdjacency& na,
                                                        std::span<const std::size_t> rows,
                                                        std::span<const std::size_t> cols) {
    check_cross_indices(na, rows, cols);
    constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
    std::vector<std::size_t> col_pos(na.size(), kAbsent);
    for (std::size_t b = 0; b < cols.size(); ++b) col_pos[cols[b]] = b;

    const CsrMatrix& src = *na.csr();
    auto out = std::make_shared<CsrMatrix>();
    out->rows = rows.size();
    out->cols = cols.size();
    std::vector<std::pair<std::size_t, double>> row_entries;
    for (std::size_t r : rows) {
        row_entries.clear();
        for (std::size_t k = src.row_ptr[r]; k < src.row_ptr[r + 1]; ++k) {
            const std::size_t pos = col_pos[src.col_idx[k]];
            if (pos != kAbsent) row_entries.emplace_back(pos, src.values[k]);
        }
        std::sort(row_entries.begin(), row_entries.end());
        for (const auto& [pos, v] : row_entries) {
            out->col_idx.push_back(pos);
            out->values.push_back(v);
        }
        out->row_ptr.push_back(out->col_idx.size());
    }
    return out;
}

Membership Membership::single(std::size_t num_nodes) {
    return Membership{std::vector<std::size_t>(num_nodes, 0), 1};
}

std::vector<std::vector<std::size_t>> Membership::groups() const {
    std::vector<std::vector<std::size_t>> out(num_graphs);
    for (std::size_t i = 0; i < graph_of_node.size(); ++i) out[graph_of_node[i]].push_back(i);
    return out;
}

Batch batch_block_diagonal(std::span<const Graph> graphs) {
    std::vector<const Graph*> ptrs;
    ptrs.reserve(graphs.size());
    for (const Graph& g : graphs) ptrs.push_back(&g);
    return batch_block_diagonal(std::span<const Graph* const>(ptrs));
}

Batch batch_block_diagonal(std::span<const Graph* const> graphs) {
    if (graphs.empty()) throw std::invalid_argument("batch_block_diagonal: no graphs");
    const std::size_t d = graphs.front()->feature_dim();
    std::size_t total = 0;
    for (const Graph* g : graphs) {
        if (g->feature_dim() != d) {
            throw ShapeError("batch_block_diagonal: feature dimension " + std::to_string(g->feature_dim()) +
                             " differs from " + std::to_string(d));
        }
        total += g->num_nodes();
    }
    Batch batch;
    std::vector<Edge> edges;
    Matrix features(total, d);
    batch.membership.num_graphs = graphs.size();
    batch.membership.graph_of_node.reserve(total);
    std::vector<std::int64_t> ids;
    ids.reserve(total);
    std::size_t offset = 0;
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        const Graph& g = *graphs[gi];
        for (const Edge& e : g.edges()) edges.push_back({e.u + offset, e.v + offset, e.weight});
        std::copy(g.features().data().begin(), g.features().data().end(),
                  features.data().begin() + static_cast<std::ptrdiff_t>(offset * d));
        for (std::size_t i = 0; i < g.num_nodes(); ++i) {
            batch.membership.graph_of_node.push_back(gi);
            ids.push_back(g.node_ids() ? (*g.node_ids())[i] : static_cast<std::int64_t>(i));
        }
        batch.labels.push_back(g.label().value_or(-1));
        offset += g.num_nodes();
    }
    batch.graph = Graph(total, std::move(edges), std::move(features));
    batch.graph.set_node_ids(std::move(ids));
    if (graphs.size() == 1) {
        batch.graph.set_label(graphs.front()->label());
        batch.graph.set_source_index(graphs.front()->source_index());
    }
    return batch;
}

Graph induced_subgraph(const Graph& g, std::span<const std::size_t> keep) {
    check_indices("induced_subgraph", keep, g.num_nodes());
    constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
    std::vector<std::size_t> pos(g.num_nodes(), kAbsent);
    for (std::size_t a = 0; a < keep.size(); ++a) pos[keep[a]] = a;
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) {
        if (pos[e.u] != kAbsent && pos[e.v] != kAbsent) edges.push_back({pos[e.u], pos[e.v], e.weight});
    }
    Matrix features(keep.size(), g.feature_dim());
    for (std::size_t a = 0; a < keep.size(); ++a) {
        const auto src = g.features().row_span(keep[a]);
        std::copy(src.begin(), src.end(), features.row_span(a).begin());
    }
    Graph out(keep.size(), std::move(edges), std::move(features), g.label());
    if (g.node_ids()) {
        std::vector<std::int64_t> ids;
        ids.reserve(keep.size());
        for (std::size_t k : keep) ids.push_back((*g.node_ids())[k]);
        out.set_node_ids(std::move(ids));
    }
    out.set_source_index(g.source_index());
    return out;
}

}  // namespace liftgraph
