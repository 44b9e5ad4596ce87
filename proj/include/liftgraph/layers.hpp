#pragma once

#include <string>

#include "liftgraph/autodiff.hpp"
#include "liftgraph/graph.hpp"
#include "liftgraph/random.hpp"

namespace liftgraph {

struct GCNLayerParams {
    std::string name;
    Matrix theta;  // d_in x d_out
};

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);
Matrix glorot_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// ReLU(W_a X Theta).
DiffMatrix gcn_forward(const NormalizedAdjacency& na, const DiffMatrix& x, const DiffMatrix& theta);

/// Per graph: column-wise mean concatenated with column-wise max, giving a
/// num_graphs x 2d matrix.
DiffMatrix readout(const DiffMatrix& h, const Membership& membership);

}  // namespace liftgraph
