#include "liftgraph/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "liftgraph/errors.hpp"

namespace liftgraph {

void PoolConfig::validate() const {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("pooling ratio must lie in (0, 1], got " + std::to_string(ratio));
    if (lift_hops < 1) throw ConfigError("lift_hops must be at least 1");
}

DiffMatrix compute_scores(const NormalizedAdjacency& na, const DiffMatrix& h, const DiffMatrix& theta_s) {
    if (h.rows() != na.size()) {
        throw ShapeError("compute_scores: features " + h.value().shape_string() + " for adjacency of size " +
                         std::to_string(na.size()));
    }
    if (theta_s.rows() != h.cols() || theta_s.cols() != 1) {
        throw ShapeError("compute_scores: score weights " + theta_s.value().shape_string() + " for features " +
                         h.value().shape_string());
    }
    return tanh_elem(spmm(na.csr(), matmul(h, theta_s)));
}

std::size_t preserved_count(std::size_t n, double ratio) {
    // The slack keeps products such as 0.3 * 10 = 3.0000000000000004 from
    // rounding up to the next integer.
    const double target = std::ceil(ratio * static_cast<double>(n) - 1e-9);
    const auto k = static_cast<std::size_t>(std::max(target, 1.0));
    return std::min(k, std::max<std::size_t>(n, 1));
}

Selection select_topk(std::span<const double> scores, const Membership& membership, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("pooling ratio must lie in (0, 1]");
    if (scores.size() != membership.graph_of_node.size()) {
        throw ShapeError("select_topk: " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(membership.graph_of_node.size()) + " nodes");
    }
    Selection sel;
    for (auto group : membership.groups()) {
        if (group.empty()) continue;
        std::sort(group.begin(), group.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return a < b;
        });
        const std::size_t k = preserved_count(group.size(), ratio);
        sel.preserved.insert(sel.preserved.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(k));
        std::vector<std::size_t> rest(group.begin() + static_cast<std::ptrdiff_t>(k), group.end());
        std::sort(rest.begin(), rest.end());
        sel.removed.insert(sel.removed.end(), rest.begin(), rest.end());
    }
    return sel;
}

LiftResult lift(const NormalizedAdjacency& na_lift, const DiffMatrix& h, const Selection& selection,
                std::span<const LiftParams> layers) {
    if (selection.preserved.empty()) throw std::invalid_argument("lift: empty preserved set");
    if (selection.preserved.size() + selection.removed.size() != h.rows() || na_lift.size() != h.rows()) {
        throw ShapeError("lift: preserved/removed sets must partition the " + std::to_string(h.rows()) + " nodes");
    }
    const std::size_t d = h.cols();
    for (const LiftParams& layer : layers) {
        if (layer.theta_p.rows() != 1 || layer.theta_p.cols() != d || layer.theta_u.rows() != 1 ||
            layer.theta_u.cols() != d) {
            throw ShapeError("lift: diagonals " + layer.theta_p.value().shape_string() + " / " +
                             layer.theta_u.value().shape_string() + " for feature width " + std::to_string(d));
        }
    }

    const auto m_pr = cross_submatrix_sparse(na_lift, selection.removed, selection.preserved);
    const auto m_rp = std::make_shared<const CsrMatrix>(m_pr->transposed());

    LiftResult out;
    out.h_hat_p = row_select(h, selection.preserved);
    out.h_hat_r = row_select(h, selection.removed);
    for (const LiftParams& layer : layers) {
        const DiffMatrix prediction = relu(col_scale(spmm(m_pr, out.h_hat_p), layer.theta_p));
        out.h_hat_r = sub(out.h_hat_r, prediction);
        const DiffMatrix update = relu(col_scale(spmm(m_rp, out.h_hat_r), layer.theta_u));
        out.h_hat_p = add(out.h_hat_p, update);
        out.cut_entries_visited += m_pr->nnz() + m_rp->nnz();
    }
    return out;
}

CoarsenResult coarsen(const Graph& g, const DiffMatrix& h_hat_p, std::span<const std::size_t> preserved,
                      const DiffMatrix& scores, bool gate_with_scores) {
    if (h_hat_p.rows() != preserved.size()) {
        throw ShapeError("coarsen: " + h_hat_p.value().shape_string() + " features for " +
                         std::to_string(preserved.size()) + " preserved nodes");
    }
    CoarsenResult out;
    out.coarse = induced_subgraph(g, preserved);
    if (gate_with_scores) {
        if (scores.rows() != g.num_nodes() || scores.cols() != 1) {
            throw ShapeError("coarsen: scores " + scores.value().shape_string() + " for graph of " +
                             std::to_string(g.num_nodes()) + " nodes");
        }
        out.x_next = row_scale(h_hat_p, row_select(scores, preserved));
    } else {
        out.x_next = h_hat_p;
    }
    out.coarse.set_features(out.x_next.value());
    return out;
}

PoolingOutcome liftpool(const Graph& g, const Membership& membership, const NormalizedAdjacency& na,
                        const DiffMatrix& h, const PoolConfig& config, const PoolParams& params) {
    config.validate();
    if (params.lifts.size() != config.num_lift_layers) {
        throw ConfigError("liftpool: " + std::to_string(params.lifts.size()) + " lifting parameter sets for " +
                          std::to_string(config.num_lift_layers) + " layers");
    }
    PoolingOutcome out;
    out.score_matrix = compute_scores(na, h, params.theta_s);
    out.scores = out.score_matrix.value().data();

    Selection selection = select_topk(out.scores, membership, config.ratio);
    if (Tape* tape = out.score_matrix.tape()) tape->note_branch_range(selection.preserved);

    if (config.num_lift_layers > 0) {
        LiftResult lifted;
        if (config.lift_hops > 1) {
            const NormalizedAdjacency na_lift = normalize_augment(khop_augment(g, config.lift_hops), na.mode(), na.lambda());
            lifted = lift(na_lift, h, selection, params.lifts);
        } else {
            lifted = lift(na, h, selection, params.lifts);
        }
        out.lifted_preserved = lifted.h_hat_p;
        out.cut_entries_visited = lifted.cut_entries_visited;
    } else {
        out.lifted_preserved = row_select(h, selection.preserved);
    }

    CoarsenResult coarse = coarsen(g, out.lifted_preserved, selection.preserved, out.score_matrix, config.gate_with_scores);
    out.x_next = coarse.x_next;
    out.coarse_graph = std::move(coarse.coarse);
    out.membership_out.num_graphs = membership.num_graphs;
    out.membership_out.graph_of_node.reserve(selection.preserved.size());
    for (std::size_t p : selection.preserved) out.membership_out.graph_of_node.push_back(membership.graph_of_node[p]);
    out.preserved = std::move(selection.preserved);
    out.removed = std::move(selection.removed);
    return out;
}

}  // namespace liftgraph
