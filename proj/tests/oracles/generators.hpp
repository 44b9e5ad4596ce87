#pragma once

#include <cstddef>
#include <vector>

#include "liftgraph/graph.hpp"
#include "liftgraph/matrix.hpp"
#include "liftgraph/random.hpp"

namespace liftgraph::oracles {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0);

/// Erdos-Renyi graph with uniform [-1, 1] features. Weighted graphs draw
/// edge weights from [0.5, 2].
Graph random_graph(Rng& rng, std::size_t n, double edge_prob, std::size_t feature_dim, bool weighted);

/// Random spanning tree plus Erdos-Renyi extras; always connected.
Graph random_connected_graph(Rng& rng, std::size_t n, double extra_prob, std::size_t feature_dim, bool weighted);

/// Node i of g becomes node perm[i]; features and node ids move along.
Graph permute_graph(const Graph& g, const std::vector<std::size_t>& perm);

std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n);

}  // namespace liftgraph::oracles
