#include <vector>

#include <gtest/gtest.h>

#include "liftgraph/data_io.hpp"
#include "liftgraph/errors.hpp"
#include "liftgraph/layers.hpp"
#include "oracles/generators.hpp"

using namespace liftgraph;

namespace {

DiffMatrix C(Matrix m) { return DiffMatrix::constant(std::move(m)); }

}  // namespace

TEST(GcnForward, PathExample) {
    const auto na = normalize_augment(make_path(3), NormMode::PaperLiteral, 1.0);
    const auto out = gcn_forward(na, C({{1, 0}, {0, 1}, {1, 1}}), C(Matrix::identity(2)));
    EXPECT_EQ(out.value(), Matrix({{1, 0.5}, {1, 1.5}, {1, 1.5}}));
}

TEST(GcnForward, ZeroThetaGivesZero) {
    const auto na = normalize_augment(make_path(3), NormMode::SymmetricSqrt, 1.0);
    EXPECT_EQ(gcn_forward(na, C(Matrix(3, 2, 0.4)), C(Matrix(2, 4))).value(), Matrix(3, 4));
}

TEST(GcnForward, EdgelessGraphIsIdentity) {
    const auto na = normalize_augment(Graph(3, {}, Matrix(3, 2)), NormMode::SymmetricSqrt, 1.0);
    const Matrix x{{0.5, 1}, {0, 2}, {3, 0.25}};
    EXPECT_EQ(gcn_forward(na, C(x), C(Matrix::identity(2))).value(), x);
}

TEST(GcnForward, ShapeMismatch) {
    const auto na = normalize_augment(make_path(3), NormMode::SymmetricSqrt, 1.0);
    EXPECT_THROW(gcn_forward(na, C(Matrix(4, 2)), C(Matrix(2, 2))), ShapeError);
    EXPECT_THROW(gcn_forward(na, C(Matrix(3, 2)), C(Matrix(3, 2))), ShapeError);
}

TEST(GcnForward, PermutationEquivariant) {
    Rng rng(17);
    for (int t = 0; t < 20; ++t) {
        const Graph g = oracles::random_graph(rng, 5 + rng.below(15), 0.3, 4, true);
        const auto perm = oracles::random_permutation(rng, g.num_nodes());
        const Graph pg = oracles::permute_graph(g, perm);
        const Matrix theta = oracles::random_matrix(rng, 4, 3);
        for (NormMode mode : {NormMode::PaperLiteral, NormMode::SymmetricSqrt}) {
            const Matrix out = gcn_forward(normalize_augment(g, mode, 1.0), C(g.features()), C(theta)).value();
            const Matrix pout = gcn_forward(normalize_augment(pg, mode, 1.0), C(pg.features()), C(theta)).value();
            for (std::size_t i = 0; i < g.num_nodes(); ++i)
                for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(pout(perm[i], c), out(i, c), 1e-12);
        }
    }
}

TEST(Readout, SingleGraph) {
    EXPECT_EQ(readout(C({{1, 3}, {3, 5}}), Membership::single(2)).value(), Matrix({{2, 4, 3, 5}}));
}

TEST(Readout, OneNodeGraph) {
    EXPECT_EQ(readout(C({{0.5, -1}}), Membership::single(1)).value(), Matrix({{0.5, -1, 0.5, -1}}));
}

TEST(Readout, BatchStacksPerGraphReadouts) {
    const Matrix h{{1, 2}, {3, 0}, {-1, 4}, {2, 2}, {0, 1}};
    Membership m{{0, 1, 0, 1, 1}, 2};
    const Matrix out = readout(C(h), m).value();
    const Matrix g0 = readout(C({{1, 2}, {-1, 4}}), Membership::single(2)).value();
    const Matrix g1 = readout(C({{3, 0}, {2, 2}, {0, 1}}), Membership::single(3)).value();
    ASSERT_EQ(out.rows(), 2u);
    for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_EQ(out(0, c), g0(0, c));
        EXPECT_EQ(out(1, c), g1(0, c));
    }
}

TEST(Readout, EmptyGroupRejected) {
    Membership m{{0, 0}, 2};
    EXPECT_ANY_THROW(readout(C(Matrix(2, 2)), m));
}

TEST(Readout, InvariantToRowOrder) {
    Rng rng(4);
    const Matrix h = oracles::random_matrix(rng, 6, 3);
    const auto perm = oracles::random_permutation(rng, 6);
    Matrix ph(6, 3);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t c = 0; c < 3; ++c) ph(perm[i], c) = h(i, c);
    const Matrix a = readout(C(h), Membership::single(6)).value();
    const Matrix b = readout(C(ph), Membership::single(6)).value();
    for (std::size_t c = 0; c < 6; ++c) EXPECT_NEAR(a(0, c), b(0, c), 1e-15);
}

TEST(Glorot, BoundsAndDeterminism) {
    Rng a(1), b(1);
    const Matrix m = glorot_uniform(30, 20, a);
    EXPECT_EQ(m, glorot_uniform(30, 20, b));
    const double bound = std::sqrt(6.0 / 50.0);
    for (double x : m.data()) {
        EXPECT_LE(x, bound);
        EXPECT_GE(x, -bound);
    }
}
