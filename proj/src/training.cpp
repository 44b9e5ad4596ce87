#include "liftgraph/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "liftgraph/errors.hpp"
#include "liftgraph/random.hpp"

namespace liftgraph {

void TrainConfig::validate() const {
    if (!(lr >= 0.0)) throw ConfigError("learning rate must be non-negative");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
    if (patience == 0 || patience > max_epochs) throw ConfigError("patience must lie in [1, max_epochs]");
    if (workers == 0) throw ConfigError("workers must be positive");
}

AdamState AdamState::zeros_like(const ModelParams& params) {
    AdamState s;
    for (const auto& [name, m] : params.entries()) {
        s.m.emplace_back(m.rows(), m.cols());
        s.v.emplace_back(m.rows(), m.cols());
    }
    return s;
}

void adam_step(ModelParams& params, std::span<const Matrix> grads, AdamState& state, double lr, double weight_decay) {
    auto& entries = params.entries();
    if (grads.size() != entries.size() || state.m.size() != entries.size()) {
        throw ShapeError("adam_step: " + std::to_string(grads.size()) + " gradients for " + std::to_string(entries.size()) +
                         " parameters");
    }
    ++state.t;
    const double correction1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
    const double correction2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
    for (std::size_t p = 0; p < entries.size(); ++p) {
        Matrix& value = entries[p].second;
        const Matrix& g = grads[p];
        if (g.rows() != value.rows() || g.cols() != value.cols()) {
            throw ShapeError("adam_step: gradient " + g.shape_string() + " for parameter '" + entries[p].first + "' of " +
                             value.shape_string());
        }
        auto& m = state.m[p].data();
        auto& v = state.v[p].data();
        auto& x = value.data();
        for (std::size_t i = 0; i < x.size(); ++i) {
            m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g.data()[i];
            v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g.data()[i] * g.data()[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            x[i] -= lr * (m_hat / (std::sqrt(v_hat) + kAdamEpsilon) + weight_decay * x[i]);
        }
    }
}

namespace {

std::size_t argmax_row(const Matrix& m, std::size_t r) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < m.cols(); ++j)
        if (m(r, j) > m(r, best)) best = j;
    return best;
}

}  // namespace

double accuracy(const ModelParams& params, const ModelConfig& config, std::span<const Graph* const> graphs,
                std::size_t batch_size) {
    if (graphs.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < graphs.size(); start += batch_size) {
        const auto chunk = graphs.subspan(start, std::min(batch_size, graphs.size() - start));
        const Batch batch = batch_block_diagonal(chunk);
        const Matrix logits = predict_logits(batch, params, config);
        for (std::size_t r = 0; r < chunk.size(); ++r)
            if (static_cast<int>(argmax_row(logits, r)) == batch.labels[r]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(graphs.size());
}

LossAndGrads loss_and_grads(const Batch& batch, const ModelParams& params, const ModelConfig& config,
                            const ForwardOptions& options) {
    Tape tape;
    const BoundParams bound(tape, params);
    const DiffMatrix logits = forward(batch, bound, config, options);
    const DiffMatrix loss = softmax_cross_entropy(logits, batch.labels);
    LossAndGrads out;
    out.loss = loss(0, 0);
    if (!std::isfinite(out.loss)) return out;
    const Gradients grads = tape.backward(loss);
    out.grads.reserve(bound.entries().size());
    for (const auto& [name, leaf] : bound.entries()) out.grads.push_back(grads.of(leaf));
    return out;
}

TrainResult train_one(std::span<const Graph* const> train, std::span<const Graph* const> val, const ModelConfig& model,
                      const TrainConfig& config, std::uint64_t seed) {
    config.validate();
    model.validate();
    if (train.empty() || val.empty()) throw std::invalid_argument("train_one: empty training or validation split");

    ModelParams params = init_params(model, derive_seed(seed, 0));
    AdamState state = AdamState::zeros_like(params);
    Rng shuffle_rng(derive_seed(seed, 1));

    TrainResult result;
    result.report.seed = seed;
    result.best_params = params;
    double best_val = -1.0;
    std::size_t since_best = 0;
    std::vector<const Graph*> order(train.begin(), train.end());

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0, b = 0; start < order.size(); start += config.batch_size, ++b) {
            const std::span<const Graph* const> chunk(order.data() + start,
                                                      std::min(config.batch_size, order.size() - start));
            const Batch batch = batch_block_diagonal(chunk);
            ForwardOptions options;
            options.train_mode = true;
            options.dropout_seed = derive_seed(seed, 0x100000000ULL * epoch + b + 2);
            LossAndGrads lg = loss_and_grads(batch, params, model, options);
            if (!std::isfinite(lg.loss)) {
                throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(b) + " (seed " + std::to_string(seed) + ")");
            }
            loss_sum += lg.loss * static_cast<double>(chunk.size());
            adam_step(params, lg.grads, state, config.lr, config.weight_decay);
        }
        result.report.train_curve.push_back(loss_sum / static_cast<double>(order.size()));
        result.report.epochs_run = epoch;

        const double val_acc = accuracy(params, model, val, config.batch_size);
        if (val_acc > best_val) {
            best_val = val_acc;
            result.best_params = params;
            result.report.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    result.report.best_val_accuracy = best_val;
    return result;
}

CvSummary cross_validate(const Dataset& ds, std::size_t k, std::span<const std::uint64_t> seeds,
                         const ModelConfig& model, const TrainConfig& config,
                         const std::function<void(const FoldReport&)>& on_report) {
    config.validate();
    if (k < 3) throw ConfigError("cross validation needs at least 3 folds (train/validation/test)");
    if (seeds.empty()) throw ConfigError("cross validation needs at least one seed");

    // Canonical order by source index makes the run independent of the order
    // graphs arrive in.
    Dataset canonical = ds;
    std::stable_sort(canonical.graphs.begin(), canonical.graphs.end(), [](const Graph& a, const Graph& b) {
        return a.source_index().value_or(0) < b.source_index().value_or(0);
    });
    const FoldPlan plan = make_folds(canonical, k, config.seed);
    const auto folds = plan.folds();

    struct Job {
        std::size_t fold;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t f = 0; f < k; ++f)
        for (std::uint64_t s : seeds) jobs.push_back({f, s});

    std::vector<FoldReport> reports(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    ModelParams first_params;
    std::mutex report_mutex;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                const std::size_t test_fold = jobs[j].fold;
                const std::size_t val_fold = (test_fold + 1) % k;
                std::vector<const Graph*> train, val, test;
                for (std::size_t f = 0; f < k; ++f) {
                    auto& dst = f == test_fold ? test : f == val_fold ? val : train;
                    for (std::size_t i : folds[f]) dst.push_back(&canonical.graphs[i]);
                }
                TrainResult r = train_one(train, val, model, config, jobs[j].seed);
                r.report.fold = test_fold;
                r.report.test_accuracy = accuracy(r.best_params, model, test, config.batch_size);
                reports[j] = std::move(r.report);
                std::lock_guard lock(report_mutex);
                if (j == 0) first_params = std::move(r.best_params);
                if (on_report) on_report(reports[j]);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };
    const std::size_t n_workers = std::min(config.workers, jobs.size());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    CvSummary summary;
    summary.n_runs = reports.size();
    for (const FoldReport& r : reports) summary.mean += r.test_accuracy;
    summary.mean /= static_cast<double>(summary.n_runs);
    double var = 0.0;
    for (const FoldReport& r : reports) var += (r.test_accuracy - summary.mean) * (r.test_accuracy - summary.mean);
    summary.std = std::sqrt(var / static_cast<double>(summary.n_runs));
    summary.reports = std::move(reports);
    summary.first_params = std::move(first_params);
    return summary;
}

std::string metrics_csv(std::span<const FoldReport> reports) {
    std::string out = "fold,seed,best_epoch,test_accuracy\n";
    char line[128];
    for (const FoldReport& r : reports) {
        std::snprintf(line, sizeof line, "%zu,%llu,%zu,%.6f\n", r.fold, static_cast<unsigned long long>(r.seed),
                      r.best_epoch, r.test_accuracy);
        out += line;
    }
    return out;
}

std::string summary_json(const CvSummary& summary) {
    nlohmann::ordered_json j;
    j["mean"] = summary.mean;
    j["std"] = summary.std;
    j["n_runs"] = summary.n_runs;
    return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << contents;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace liftgraph
