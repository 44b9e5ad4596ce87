#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "liftgraph/data_io.hpp"
#include "liftgraph/errors.hpp"
#include "liftgraph/lifting_1d.hpp"
#include "liftgraph/pooling.hpp"
#include "oracles/generators.hpp"
#include "oracles/reference.hpp"

using namespace liftgraph;

namespace {

DiffMatrix C(Matrix m) { return DiffMatrix::constant(std::move(m)); }

const Matrix kGcnOut{{1, 0.5}, {1, 1.5}, {1, 1.5}};

NormalizedAdjacency path3_literal() { return normalize_augment(make_path(3), NormMode::PaperLiteral, 1.0); }

std::vector<LiftParams> const_lifts(std::size_t layers, std::size_t d, double p, double u) {
    std::vector<LiftParams> out;
    for (std::size_t l = 0; l < layers; ++l) out.push_back({C(Matrix(1, d, p)), C(Matrix(1, d, u))});
    return out;
}

}  // namespace

TEST(Scores, PathExample) {
    const auto s = compute_scores(path3_literal(), C({{1, 0}, {0, 1}, {1, 1}}), C({{1}, {-1}}));
    ASSERT_EQ(s.rows(), 3u);
    ASSERT_EQ(s.cols(), 1u);
    // tanh(0.5) = 0.46211715726000975850...
    EXPECT_NEAR(s(0, 0), 0.46211715726000976, 1e-15);
    EXPECT_NEAR(s(1, 0), -0.46211715726000976, 1e-15);
    EXPECT_NEAR(s(2, 0), -0.46211715726000976, 1e-15);
}

TEST(Scores, ZeroThetaOrZeroFeatures) {
    EXPECT_EQ(compute_scores(path3_literal(), C(kGcnOut), C(Matrix(2, 1))).value(), Matrix(3, 1));
    EXPECT_EQ(compute_scores(path3_literal(), C(Matrix(3, 2)), C({{0.3}, {-2}})).value(), Matrix(3, 1));
}

TEST(Scores, StrictlyInsideUnitInterval) {
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        const Graph g = oracles::random_graph(rng, 10, 0.4, 3, false);
        const auto s = compute_scores(normalize_augment(g, NormMode::SymmetricSqrt, 1.0), C(g.features()),
                                      C(oracles::random_matrix(rng, 3, 1)));
        for (double x : s.value().data()) {
            EXPECT_GT(x, -1.0);
            EXPECT_LT(x, 1.0);
        }
    }
}

TEST(TopK, Examples) {
    const std::vector<double> s1{0.462, -0.462, -0.462};
    const auto a = select_topk(s1, Membership::single(3), 1.0 / 3.0);
    EXPECT_EQ(a.preserved, (std::vector<std::size_t>{0}));
    EXPECT_EQ(a.removed, (std::vector<std::size_t>{1, 2}));

    const std::vector<double> s2{0.1, 0.9, 0.5};
    const auto all = select_topk(s2, Membership::single(3), 1.0);
    EXPECT_EQ(all.preserved, (std::vector<std::size_t>{1, 2, 0}));
    EXPECT_TRUE(all.removed.empty());

    const std::vector<double> s3{0.9, 0.1, 0.5};
    const auto b = select_topk(s3, Membership::single(3), 2.0 / 3.0);
    EXPECT_EQ(b.preserved, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(b.removed, (std::vector<std::size_t>{1}));
}

TEST(TopK, TiesGoToSmallerIndex) {
    const std::vector<double> s{0.2, 0.5, 0.5, 0.5};
    const auto sel = select_topk(s, Membership::single(4), 0.5);
    EXPECT_EQ(sel.preserved, (std::vector<std::size_t>{1, 2}));
}

TEST(TopK, PreservedCountRounding) {
    EXPECT_EQ(preserved_count(10, 0.3), 3u);
    EXPECT_EQ(preserved_count(7, 0.5), 4u);
    EXPECT_EQ(preserved_count(3, 0.1), 1u);
    EXPECT_EQ(preserved_count(8, 0.5), 4u);
    EXPECT_EQ(preserved_count(1, 0.5), 1u);
    EXPECT_EQ(preserved_count(5, 1.0), 5u);
}

TEST(TopK, PerGraphInBatches) {
    const std::vector<double> s{0.1, 0.9, 0.3, 0.8, 0.2, 0.7};
    Membership m{{0, 0, 0, 1, 1, 1}, 2};
    const auto sel = select_topk(s, m, 0.5);
    EXPECT_EQ(sel.preserved, (std::vector<std::size_t>{1, 2, 3, 5}));
    EXPECT_EQ(sel.removed, (std::vector<std::size_t>{0, 4}));
}

TEST(TopK, InvalidRatio) {
    const std::vector<double> s{0.1};
    EXPECT_ANY_THROW(select_topk(s, Membership::single(1), 0.0));
    EXPECT_ANY_THROW(select_topk(s, Membership::single(1), 1.5));
}

TEST(Lift, PathExample) {
    const Selection sel{{0}, {1, 2}};
    const auto lifts = const_lifts(1, 2, 1.0, 1.0);
    const auto r = lift(path3_literal(), C(kGcnOut), sel, lifts);
    EXPECT_EQ(r.h_hat_r.value(), Matrix({{0.5, 1.25}, {1, 1.5}}));
    EXPECT_EQ(r.h_hat_p.value(), Matrix({{1.25, 1.125}}));
    // M_pr has one nonzero (node 1 to node 0), and M_rp is its transpose.
    EXPECT_EQ(r.cut_entries_visited, 2u);
}

TEST(Lift, ZeroDiagonalsAreIdentity) {
    const Selection sel{{0}, {1, 2}};
    const auto r = lift(path3_literal(), C(kGcnOut), sel, const_lifts(1, 2, 0.0, 0.0));
    EXPECT_EQ(r.h_hat_p.value(), Matrix({{1, 0.5}}));
    EXPECT_EQ(r.h_hat_r.value(), Matrix({{1, 1.5}, {1, 1.5}}));
}

TEST(Lift, RemovedWithoutPreservedNeighborIsUntouched) {
    // Path 0-1-2-3, preserve 0; node 3 is two hops away.
    const auto na = normalize_augment(make_path(4), NormMode::SymmetricSqrt, 1.0);
    const Matrix h{{1, 2}, {0.5, 0.5}, {3, 1}, {2, 2}};
    const Selection sel{{0}, {1, 2, 3}};
    const auto r = lift(na, C(h), sel, const_lifts(1, 2, 0.7, 0.9));
    EXPECT_EQ(r.h_hat_r(1, 0), 3.0);
    EXPECT_EQ(r.h_hat_r(2, 0), 2.0);
    EXPECT_EQ(r.h_hat_r(2, 1), 2.0);
}

TEST(Lift, Errors) {
    const Selection empty{{}, {0, 1, 2}};
    EXPECT_ANY_THROW(lift(path3_literal(), C(kGcnOut), empty, const_lifts(1, 2, 1, 1)));
    const Selection sel{{0}, {1, 2}};
    EXPECT_THROW(lift(path3_literal(), C(kGcnOut), sel, const_lifts(1, 3, 1, 1)), ShapeError);
}

TEST(Lift, NoRemovedNodes) {
    const Selection sel{{2, 0, 1}, {}};
    const auto r = lift(path3_literal(), C(kGcnOut), sel, const_lifts(2, 2, 1, 1));
    EXPECT_EQ(r.h_hat_p.rows(), 3u);
    EXPECT_EQ(r.h_hat_r.rows(), 0u);
    EXPECT_EQ(r.h_hat_p(0, 1), 1.5);
}

TEST(Lift, MatchesDenseReferenceForStackedLayersAndHops) {
    Rng rng(99);
    for (int t = 0; t < 40; ++t) {
        const Graph g = oracles::random_graph(rng, 4 + rng.below(16), 0.3, 3, true);
        const std::size_t layers = 1 + rng.below(3);
        const std::size_t hops = 1 + rng.below(3);
        const Graph lift_graph = khop_augment(g, hops);
        const NormMode mode = rng.below(2) ? NormMode::PaperLiteral : NormMode::SymmetricSqrt;
        const auto na = normalize_augment(lift_graph, mode, 1.0);

        const auto scores = oracles::random_matrix(rng, g.num_nodes(), 1).data();
        const Selection sel = select_topk(scores, Membership::single(g.num_nodes()), 0.5);
        std::vector<LiftParams> lp;
        std::vector<Matrix> tp, tu;
        for (std::size_t l = 0; l < layers; ++l) {
            tp.push_back(oracles::random_matrix(rng, 1, 3));
            tu.push_back(oracles::random_matrix(rng, 1, 3));
            lp.push_back({C(tp.back()), C(tu.back())});
        }
        const auto r = lift(na, C(g.features()), sel, lp);
        const auto ref = oracles::lift_reference(lift_graph, mode, 1.0, g.features(), sel.preserved, sel.removed, tp, tu);
        EXPECT_LT(max_abs_diff(r.h_hat_p.value(), ref.h_hat_p), 1e-12);
        EXPECT_LT(max_abs_diff(r.h_hat_r.value(), ref.h_hat_r), 1e-12);

        // Work only on cut edges: 2 entries (M_pr and its transpose) per cut edge per layer.
        const std::set<std::size_t> kept(sel.preserved.begin(), sel.preserved.end());
        std::size_t cut = 0;
        for (const Edge& e : lift_graph.edges()) cut += kept.count(e.u) != kept.count(e.v);
        EXPECT_EQ(r.cut_entries_visited, 2 * cut * layers);
        EXPECT_LE(r.cut_entries_visited, 2 * lift_graph.num_edges() * layers);
    }
}

TEST(Coarsen, ExampleWithoutGating) {
    const std::vector<std::size_t> preserved{0};
    const auto c = coarsen(make_path(3), C({{1.25, 1.125}}), preserved, C({{0.462}, {0}, {0}}), false);
    EXPECT_EQ(c.coarse.num_nodes(), 1u);
    EXPECT_EQ(c.coarse.num_edges(), 0u);
    EXPECT_EQ(c.x_next.value(), Matrix({{1.25, 1.125}}));
    EXPECT_EQ(c.coarse.features(), Matrix({{1.25, 1.125}}));
}

TEST(Coarsen, GatingScalesRows) {
    const std::vector<std::size_t> preserved{0};
    const auto c = coarsen(make_path(3), C({{1.25, 1.125}}), preserved, C({{0.462}, {0}, {0}}), true);
    EXPECT_NEAR(c.x_next(0, 0), 0.5775, 1e-15);
    EXPECT_NEAR(c.x_next(0, 1), 0.51975, 1e-15);
}

TEST(Coarsen, FullRatioIsIsomorphic) {
    Rng rng(6);
    const Graph g = oracles::random_graph(rng, 8, 0.4, 2, true);
    const auto na = normalize_augment(g, NormMode::SymmetricSqrt, 1.0);
    PoolConfig cfg;
    cfg.ratio = 1.0;
    cfg.gate_with_scores = false;
    const PoolParams params{C(oracles::random_matrix(rng, 2, 1)), const_lifts(1, 2, 0.5, 0.5)};
    const auto out = liftpool(g, Membership::single(8), na, C(g.features()), cfg, params);
    ASSERT_EQ(out.coarse_graph.num_nodes(), 8u);
    EXPECT_EQ(out.x_next.value(), row_select(C(g.features()), out.preserved).value());
    for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t b = 0; b < 8; ++b)
            EXPECT_EQ(out.coarse_graph.weight(a, b), a == b ? 0.0 : g.weight(out.preserved[a], out.preserved[b]));
}

TEST(Coarsen, InvalidIndices) {
    const std::vector<std::size_t> bad{5};
    EXPECT_THROW(coarsen(make_path(3), C({{1.0}}), bad, C(Matrix(3, 1)), false), IndexError);
}

TEST(LiftPool, PathEndToEnd) {
    PoolConfig cfg;
    cfg.ratio = 1.0 / 3.0;
    const PoolParams params{C({{1}, {-1}}), const_lifts(1, 2, 1.0, 1.0)};
    const auto out = liftpool(make_path(3), Membership::single(3), path3_literal(), C(kGcnOut), cfg, params);
    // W_a H theta = [0.25, -0.5, -0.75]
    EXPECT_NEAR(out.scores[0], std::tanh(0.25), 1e-15);
    EXPECT_NEAR(out.scores[1], std::tanh(-0.5), 1e-15);
    EXPECT_NEAR(out.scores[2], std::tanh(-0.75), 1e-15);
    EXPECT_EQ(out.preserved, (std::vector<std::size_t>{0}));
    EXPECT_EQ(out.removed, (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(out.lifted_preserved.value(), Matrix({{1.25, 1.125}}));
    EXPECT_NEAR(out.x_next(0, 0), 1.25 * std::tanh(0.25), 1e-15);
    EXPECT_NEAR(out.x_next(0, 1), 1.125 * std::tanh(0.25), 1e-15);
    EXPECT_EQ(out.coarse_graph.num_nodes(), 1u);
    EXPECT_EQ(out.membership_out.graph_of_node, (std::vector<std::size_t>{0}));
}

TEST(LiftPool, BaselineMatchesReference) {
    Rng rng(2024);
    for (int t = 0; t < 30; ++t) {
        const Graph g = oracles::random_graph(rng, 3 + rng.below(20), 0.3, 4, true);
        const Matrix theta = oracles::random_matrix(rng, 4, 1);
        const NormMode mode = t % 2 ? NormMode::PaperLiteral : NormMode::SymmetricSqrt;
        PoolConfig cfg;
        cfg.num_lift_layers = 0;
        cfg.ratio = 0.1 + 0.1 * static_cast<double>(rng.below(9));
        const auto out = liftpool(g, Membership::single(g.num_nodes()), normalize_augment(g, mode, 1.0),
                                  C(g.features()), cfg, PoolParams{C(theta), {}});
        const auto ref = oracles::sagpool_reference(g, g.features(), theta, cfg.ratio, mode, 1.0, true);
        EXPECT_EQ(out.scores, ref.scores);
        EXPECT_EQ(out.preserved, ref.preserved);
        EXPECT_EQ(out.x_next.value(), ref.x_next);
        EXPECT_EQ(out.coarse_graph.dense_adjacency(), ref.coarse_adjacency);
        EXPECT_EQ(out.cut_entries_visited, 0u);
    }
}

TEST(LiftPool, ZeroLiftEqualsBaseline) {
    Rng rng(77);
    const Graph g = oracles::random_graph(rng, 12, 0.3, 3, false);
    const auto na = normalize_augment(g, NormMode::SymmetricSqrt, 1.0);
    const Matrix theta = oracles::random_matrix(rng, 3, 1);
    PoolConfig base;
    base.num_lift_layers = 0;
    PoolConfig lifted;
    lifted.num_lift_layers = 2;
    const auto a = liftpool(g, Membership::single(12), na, C(g.features()), base, PoolParams{C(theta), {}});
    const auto b = liftpool(g, Membership::single(12), na, C(g.features()), lifted,
                            PoolParams{C(theta), const_lifts(2, 3, 0.0, 0.0)});
    EXPECT_EQ(a.x_next.value(), b.x_next.value());
    EXPECT_EQ(a.preserved, b.preserved);
}

TEST(LiftPool, ConfigValidation) {
    PoolConfig cfg;
    cfg.ratio = 0.0;
    EXPECT_ANY_THROW(cfg.validate());
    cfg.ratio = 0.5;
    cfg.lift_hops = 0;
    EXPECT_ANY_THROW(cfg.validate());
    cfg.lift_hops = 1;
    EXPECT_NO_THROW(cfg.validate());
    const auto na = path3_literal();
    EXPECT_ANY_THROW(liftpool(make_path(3), Membership::single(3), na, C(kGcnOut), cfg, PoolParams{C({{1}, {1}}), {}}));
}

TEST(Lifting1d, ConstantSignalFullyPredicted) {
    const std::vector<double> x{1, 1, 1, 1};
    const auto r = classical_lift_1d(x, 1.0, 0.5);
    EXPECT_EQ(r.detail, (std::vector<double>{0, 0}));
    EXPECT_EQ(r.approx, (std::vector<double>{1, 1}));
}

TEST(Lifting1d, ZeroCoefficientsSplit) {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const auto r = classical_lift_1d(x, 0.0, 0.0);
    EXPECT_EQ(r.approx, (std::vector<double>{1, 3, 5}));
    EXPECT_EQ(r.detail, (std::vector<double>{2, 4, 6}));
}

TEST(Lifting1d, OddLengthRejected) {
    const std::vector<double> x{1, 2, 3};
    EXPECT_THROW(classical_lift_1d(x, 0.5, 0.25), ShapeError);
}

TEST(Lifting1d, RoundTripExactOnDyadicSignal) {
    Rng rng(3);
    std::vector<double> x(8);
    for (double& v : x) v = static_cast<double>(static_cast<std::int64_t>(rng.below(1 << 20)) - (1 << 19)) / 1024.0;
    const auto r = classical_lift_1d(x, 0.5, 0.25);
    EXPECT_EQ(classical_unlift_1d(r, 0.5, 0.25), x);
}

TEST(Lifting1d, RoundTripNearExactOnArbitraryDoubles) {
    Rng rng(4);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(2 * (1 + rng.below(32)));
        for (double& v : x) v = rng.uniform(-10, 10);
        const double p = rng.uniform(-1, 1), u = rng.uniform(-1, 1);
        const auto y = classical_unlift_1d(classical_lift_1d(x, p, u), p, u);
        for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-13);
    }
}
