#include "properties/property_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <set>
#include <sstream>

#include "liftgraph/grad_check.hpp"
#include "liftgraph/lifting_1d.hpp"
#include "liftgraph/model.hpp"
#include "liftgraph/pooling.hpp"
#include "oracles/generators.hpp"
#include "oracles/reference.hpp"

namespace liftgraph::properties {

namespace {

using Clock = std::chrono::steady_clock;

DiffMatrix C(Matrix m) { return DiffMatrix::constant(std::move(m)); }

ModelParams uniform_params(const ModelConfig& cfg, Rng& rng) {
    ModelParams p;
    for (const ParamShape& s : param_layout(cfg)) p.add(s.name, oracles::random_matrix(rng, s.rows, s.cols));
    return p;
}

Batch single(const Graph& g) { return batch_block_diagonal(std::span<const Graph>(&g, 1)); }

bool scores_distinct(std::vector<double> s, double margin) {
    std::sort(s.begin(), s.end());
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] - s[i - 1] <= margin) return false;
    return true;
}

template <typename Body>
PropertyResult timed(std::string name, Body body) {
    PropertyResult r;
    r.name = std::move(name);
    const auto start = Clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return r;
}

std::vector<LiftParams> random_lifts(Rng& rng, std::size_t layers, std::size_t d) {
    std::vector<LiftParams> out;
    for (std::size_t l = 0; l < layers; ++l)
        out.push_back({C(oracles::random_matrix(rng, 1, d)), C(oracles::random_matrix(rng, 1, d))});
    return out;
}

}  // namespace

PropertyResult check_permutation_invariance(std::size_t n_graphs, std::uint64_t seed) {
    return timed("permutation invariance", [&](PropertyResult& r) {
        Rng rng(seed);
        ModelConfig cfg;
        cfg.input_dim = 4;
        cfg.hidden_dim = 8;
        cfg.pool.num_lift_layers = 1;
        double worst = 0.0;
        std::size_t accepted = 0, rejected = 0, mismatches = 0;
        while (accepted < n_graphs) {
            const Graph g = oracles::random_connected_graph(rng, 6 + rng.below(15), 0.2, 4, true);
            const ModelParams params = uniform_params(cfg, rng);
            ForwardTrace trace;
            const Matrix base = forward(single(g), BoundParams::constants(params), cfg, {}, &trace).value();
            bool distinct = true;
            for (const auto& o : trace.outcomes) distinct = distinct && scores_distinct(o.scores, 1e-9);
            if (!distinct) {
                if (++rejected > 20 * n_graphs) throw std::runtime_error("could not draw graphs with distinct scores");
                continue;
            }
            ++accepted;

            const auto perm = oracles::random_permutation(rng, g.num_nodes());
            const Graph pg = oracles::permute_graph(g, perm);
            ForwardTrace ptrace;
            const Matrix permuted = forward(single(pg), BoundParams::constants(params), cfg, {}, &ptrace).value();
            worst = std::max(worst, max_abs_diff(base, permuted));

            // Level 0 selections correspond through perm; later levels are
            // already in score order and must agree as lists.
            std::vector<std::size_t> mapped;
            for (std::size_t p : trace.outcomes[0].preserved) mapped.push_back(perm[p]);
            bool same = mapped == ptrace.outcomes[0].preserved;
            for (std::size_t l = 0; l < trace.outcomes.size(); ++l) {
                const auto& a = trace.outcomes[l];
                const auto& b = ptrace.outcomes[l];
                if (l > 0) same = same && a.preserved == b.preserved;
                same = same && a.coarse_graph.edges() == b.coarse_graph.edges();
                if (a.x_next.value().rows() == b.x_next.value().rows())
                    worst = std::max(worst, max_abs_diff(a.x_next.value(), b.x_next.value()));
                else
                    same = false;
            }
            mismatches += !same;
        }
        r.passed = worst <= 1e-9 && mismatches == 0;
        std::ostringstream os;
        os << accepted << " graphs (" << rejected << " redrawn for ties), max |diff| " << worst << ", "
           << mismatches << " selection mismatches";
        r.detail = os.str();
    });
}

PropertyResult check_locality(std::size_t n_graphs, std::uint64_t seed) {
    return timed("locality", [&](PropertyResult& r) {
        Rng rng(seed);
        std::size_t checks = 0, violations = 0, stacked_checks = 0;
        for (std::size_t t = 0; t < n_graphs; ++t) {
            const std::size_t n = 8 + rng.below(13);
            const Graph g = oracles::random_graph(rng, n, 2.5 / static_cast<double>(n), 3, true);
            const auto dist = oracles::all_pairs_hops(g);
            const auto na = normalize_augment(g, NormMode::SymmetricSqrt, 1.0);
            const Matrix h = oracles::random_matrix(rng, n, 3);
            const auto scores = oracles::random_matrix(rng, n, 1).data();
            const Selection sel = select_topk(scores, Membership::single(n), 0.5);
            const std::set<std::size_t> preserved(sel.preserved.begin(), sel.preserved.end());

            for (std::size_t layers : {1, 2}) {
                const auto lifts = random_lifts(rng, layers, 3);
                const std::size_t radius = 2 * layers;
                const LiftResult base = lift(na, C(h), sel, lifts);
                for (std::size_t j = 0; j < n; ++j) {
                    Matrix hp = h;
                    for (std::size_t c = 0; c < 3; ++c) hp(j, c) += rng.uniform(-2.0, 2.0);
                    const LiftResult pert = lift(na, C(hp), sel, lifts);
                    for (std::size_t a = 0; a < sel.preserved.size(); ++a) {
                        const std::size_t i = sel.preserved[a];
                        if (dist[i][j] <= radius) continue;
                        (layers == 1 ? checks : stacked_checks)++;
                        for (std::size_t c = 0; c < 3; ++c) violations += base.h_hat_p(a, c) != pert.h_hat_p(a, c);
                    }
                    if (layers == 1 && preserved.count(j)) {
                        for (std::size_t b = 0; b < sel.removed.size(); ++b) {
                            const std::size_t m = sel.removed[b];
                            if (dist[m][j] <= 1) continue;
                            ++checks;
                            for (std::size_t c = 0; c < 3; ++c) violations += base.h_hat_r(b, c) != pert.h_hat_r(b, c);
                        }
                    }
                }
            }
        }
        r.passed = violations == 0 && checks > 0;
        std::ostringstream os;
        os << checks << " one-layer and " << stacked_checks << " two-layer perturbation checks, " << violations
           << " changed entries";
        r.detail = os.str();
    });
}

PropertyResult check_gradients(std::uint64_t seed) {
    return timed("gradient check", [&](PropertyResult& r) {
        Rng rng(seed);
        ModelConfig cfg;
        cfg.input_dim = 3;
        cfg.hidden_dim = 5;
        cfg.pool.num_lift_layers = 1;
        Graph g = oracles::random_connected_graph(rng, 8, 0.25, 3, false);
        g.set_label(1);
        const Batch batch = single(g);
        const ModelParams init = uniform_params(cfg, rng);
        std::vector<Matrix> values;
        for (const auto& [name, m] : init.entries()) values.push_back(m);
        const ForwardOptions options{true, derive_seed(seed, 99)};
        auto loss = [&](Tape&, std::span<const DiffMatrix> p) {
            return softmax_cross_entropy(forward(batch, BoundParams::from_leaves(init, p), cfg, options), batch.labels);
        };
        const GradCheckReport report = grad_check(loss, values, 1e-6, 1e-5);
        std::size_t total = 0;
        for (const Matrix& m : values) total += m.size();
        r.passed = report.passed() && report.checked > total / 2;
        std::ostringstream os;
        os << report.checked << "/" << total << " coordinates checked, " << report.kinked.size()
           << " kink-guarded, max rel error " << report.max_rel_error;
        if (!report.failures.empty()) {
            const auto& f = report.failures.front();
            os << "; first failure " << init.entries()[f.param].first << "[" << f.index << "] analytic " << f.analytic
               << " numeric " << f.numeric;
        }
        r.detail = os.str();
    });
}

PropertyResult check_parameter_overhead() {
    return timed("parameter overhead", [&](PropertyResult& r) {
        std::size_t configs = 0, wrong = 0;
        for (std::size_t d : {8, 32, 128})
            for (std::size_t blocks : {1, 3})
                for (std::size_t layers : {1, 2, 3}) {
                    ModelConfig cfg;
                    cfg.input_dim = 7;
                    cfg.hidden_dim = d;
                    cfg.num_blocks = blocks;
                    cfg.pool.num_lift_layers = 0;
                    const ParamCounts base = count_params(init_params(cfg, 1));
                    cfg.pool.num_lift_layers = layers;
                    const ParamCounts lifted = count_params(init_params(cfg, 1));
                    const std::size_t expected = 2 * d * layers * blocks;
                    ++configs;
                    wrong += lifted.total - base.total != expected || lifted.lifting != expected || base.lifting != 0;
                }
        r.passed = wrong == 0;
        r.detail = std::to_string(configs) + " configurations, " + std::to_string(wrong) + " mismatches";
    });
}

PropertyResult check_baseline_equivalence(std::size_t n_graphs, std::uint64_t seed) {
    return timed("baseline equivalence", [&](PropertyResult& r) {
        Rng rng(seed);
        std::size_t mismatches = 0;
        for (std::size_t t = 0; t < n_graphs; ++t) {
            const std::size_t n = 2 + rng.below(24);
            const Graph g = oracles::random_graph(rng, n, 0.1 + 0.4 * rng.uniform(), 1 + rng.below(6), t % 2 == 0);
            const Matrix theta = oracles::random_matrix(rng, g.feature_dim(), 1);
            const NormMode mode = rng.below(2) ? NormMode::PaperLiteral : NormMode::SymmetricSqrt;
            const double lambda = rng.below(2) ? 1.0 : rng.uniform(0.0, 2.0);
            PoolConfig cfg;
            cfg.num_lift_layers = 0;
            cfg.ratio = 0.1 * static_cast<double>(1 + rng.below(10));
            const PoolingOutcome out = liftpool(g, Membership::single(n), normalize_augment(g, mode, lambda),
                                                C(g.features()), cfg, PoolParams{C(theta), {}});
            const auto ref = oracles::sagpool_reference(g, g.features(), theta, cfg.ratio, mode, lambda, true);
            mismatches += out.scores != ref.scores || out.preserved != ref.preserved || !(out.x_next.value() == ref.x_next) ||
                          !(out.coarse_graph.dense_adjacency() == ref.coarse_adjacency);
        }
        r.passed = mismatches == 0;
        r.detail = std::to_string(n_graphs) + " graphs, " + std::to_string(mismatches) + " not entry-identical";
    });
}

PropertyResult check_zero_lift_identity(std::size_t n_graphs, std::uint64_t seed) {
    return timed("zero-lift identity", [&](PropertyResult& r) {
        Rng rng(seed);
        std::size_t mismatches = 0;
        for (std::size_t t = 0; t < n_graphs; ++t) {
            const std::size_t n = 2 + rng.below(24);
            const Graph g = oracles::random_graph(rng, n, 0.3, 4, true);
            const auto na = normalize_augment(g, NormMode::SymmetricSqrt, 1.0);
            const Matrix theta = oracles::random_matrix(rng, 4, 1);
            PoolConfig base;
            base.num_lift_layers = 0;
            PoolConfig lifted = base;
            lifted.num_lift_layers = 1 + rng.below(3);
            lifted.lift_hops = 1 + rng.below(2);
            std::vector<LiftParams> zeros;
            for (std::size_t l = 0; l < lifted.num_lift_layers; ++l) zeros.push_back({C(Matrix(1, 4)), C(Matrix(1, 4))});
            const auto a = liftpool(g, Membership::single(n), na, C(g.features()), base, PoolParams{C(theta), {}});
            const auto b = liftpool(g, Membership::single(n), na, C(g.features()), lifted, PoolParams{C(theta), zeros});
            mismatches += !(a.x_next.value() == b.x_next.value()) || a.preserved != b.preserved ||
                          a.coarse_graph.edges() != b.coarse_graph.edges();
        }
        r.passed = mismatches == 0;
        r.detail = std::to_string(n_graphs) + " graphs, " + std::to_string(mismatches) + " differ from baseline";
    });
}

PropertyResult check_lifting_round_trip(std::size_t n_signals, std::uint64_t seed) {
    return timed("1-D lifting round trip", [&](PropertyResult& r) {
        // Dyadic samples and coefficients keep every intermediate exactly
        // representable, so reconstruction is exact rather than approximate.
        Rng rng(seed);
        std::size_t failures = 0;
        for (std::size_t t = 0; t < n_signals; ++t) {
            std::vector<double> x(2 * (1 + rng.below(32)));
            for (double& v : x) v = std::ldexp(static_cast<double>(static_cast<std::int64_t>(rng.below(1u << 21)) - (1 << 20)), -10);
            const double p = static_cast<double>(static_cast<int>(rng.below(33)) - 16) / 8.0;
            const double u = static_cast<double>(static_cast<int>(rng.below(33)) - 16) / 8.0;
            failures += classical_unlift_1d(classical_lift_1d(x, p, u), p, u) != x;
        }
        r.passed = failures == 0;
        r.detail = std::to_string(n_signals) + " signals, " + std::to_string(failures) + " not reconstructed exactly";
    });
}

PropertyResult check_khop_oracle(std::size_t n_graphs, std::uint64_t seed) {
    return timed("k-hop oracle", [&](PropertyResult& r) {
        Rng rng(seed);
        std::size_t mismatches = 0;
        for (std::size_t t = 0; t < n_graphs; ++t) {
            const std::size_t n = 1 + rng.below(50);
            const Graph g = oracles::random_graph(rng, n, 1.5 / static_cast<double>(n) + 0.05 * rng.uniform(), 0, true);
            const std::size_t k = 1 + rng.below(4);
            const Graph aug = khop_augment(g, k);
            const auto dist = oracles::all_pairs_hops(g);
            std::size_t expected_edges = 0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    const bool want = dist[i][j] <= k;
                    expected_edges += want;
                    const double w = aug.weight(i, j);
                    if (want != (w != 0.0)) {
                        ++mismatches;
                    } else if (want) {
                        // Original edges keep their weight; added ones are unit.
                        mismatches += w != (dist[i][j] == 1 ? g.weight(i, j) : 1.0);
                    }
                }
            }
            mismatches += aug.num_edges() != expected_edges;
        }
        r.passed = mismatches == 0;
        r.detail = std::to_string(n_graphs) + " graphs, " + std::to_string(mismatches) + " adjacency mismatches";
    });
}

std::vector<PropertyResult> run_property_suite(const SuiteOptions& o,
                                               const std::function<void(const PropertyResult&)>& on_result) {
    std::vector<PropertyResult> results;
    auto add = [&](PropertyResult r) {
        if (on_result) on_result(r);
        results.push_back(std::move(r));
    };
    add(check_permutation_invariance(o.permutation_graphs, derive_seed(o.seed, 1)));
    add(check_locality(o.locality_graphs, derive_seed(o.seed, 2)));
    add(check_gradients(derive_seed(o.seed, 3)));
    add(check_parameter_overhead());
    add(check_baseline_equivalence(o.baseline_graphs, derive_seed(o.seed, 5)));
    add(check_zero_lift_identity(o.zero_lift_graphs, derive_seed(o.seed, 6)));
    add(check_lifting_round_trip(o.round_trip_signals, derive_seed(o.seed, 7)));
    add(check_khop_oracle(o.khop_graphs, derive_seed(o.seed, 8)));
    return results;
}

std::string format_result(const PropertyResult& r) {
    char time[32];
    std::snprintf(time, sizeof time, "%.2f s", r.seconds);
    return std::string(r.passed ? "PASS" : "FAIL") + "  " + r.name + ": " + r.detail + " (" + time + ")";
}

}  // namespace liftgraph::properties
