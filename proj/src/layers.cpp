#include "liftgraph/layers.hpp"

#include <cmath>

#include "liftgraph/errors.hpp"

namespace liftgraph {

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) { return glorot_uniform(rows, cols, rows, cols, rng); }

Matrix glorot_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.uniform(-bound, bound);
    return m;
}

DiffMatrix gcn_forward(const NormalizedAdjacency& na, const DiffMatrix& x, const DiffMatrix& theta) {
    if (x.rows() != na.size()) {
        throw ShapeError("gcn_forward: features " + x.value().shape_string() + " for adjacency of size " +
                         std::to_string(na.size()));
    }
    if (x.cols() != theta.rows()) {
        throw ShapeError("gcn_forward: features " + x.value().shape_string() + " vs weights " +
                         theta.value().shape_string());
    }
    return relu(spmm(na.csr(), matmul(x, theta)));
}

DiffMatrix readout(const DiffMatrix& h, const Membership& membership) {
    if (membership.graph_of_node.size() != h.rows()) {
        throw ShapeError("readout: membership covers " + std::to_string(membership.graph_of_node.size()) +
                         " nodes, features have " + std::to_string(h.rows()) + " rows");
    }
    const auto groups = membership.groups();
    std::vector<DiffMatrix> rows;
    rows.reserve(groups.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        if (groups[gi].empty()) throw std::invalid_argument("readout: graph " + std::to_string(gi) + " has no nodes");
        // A batch of one graph needs no row gather.
        const DiffMatrix part = groups.size() == 1 ? h : row_select(h, groups[gi]);
        rows.push_back(concat_cols(mean_rows(part), max_rows(part)));
    }
    if (rows.size() == 1) return rows.front();
    return concat_rows(rows);
}

}  // namespace liftgraph
