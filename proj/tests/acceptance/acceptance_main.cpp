// One PASS/FAIL/SKIP line per acceptance criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "liftgraph/data_io.hpp"
#include "liftgraph/training.hpp"
#include "properties/property_suite.hpp"

using namespace liftgraph;
namespace fs = std::filesystem;

namespace {

// Pinned thresholds.
constexpr double kDeskAccuracy = 0.95;
constexpr double kDeskSeconds = 300.0;
constexpr double kProteinsLiftPool = 0.7409;
constexpr double kProteinsWindow = 0.030;

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

ModelConfig synthetic_model(double ratio) {
    ModelConfig m;
    m.input_dim = 3;
    m.num_classes = 2;
    m.hidden_dim = 32;
    m.pool.ratio = ratio;
    m.pool.num_lift_layers = 1;
    return m;
}

Outcome property_suite() {
    std::size_t passed = 0, total = 0;
    properties::run_property_suite({}, [&](const properties::PropertyResult& r) {
        ++total;
        passed += r.passed;
        std::printf("      %s %s\n", r.passed ? "ok  " : "FAIL", properties::format_result(r).substr(6).c_str());
    });
    return {passed == total ? Verdict::Pass : Verdict::Fail,
            std::to_string(passed) + "/" + std::to_string(total) + " properties hold"};
}

Outcome desk_scale_learning() {
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset ds = synth_cycles_vs_paths(200, 6, 12, 0);
    const std::vector<std::uint64_t> seeds{0};
    const CvSummary s = cross_validate(ds, 3, seeds, synthetic_model(0.5), TrainConfig{});
    const double elapsed = seconds_since(t0);
    const bool ok = s.mean >= kDeskAccuracy && elapsed < kDeskSeconds;
    return {ok ? Verdict::Pass : Verdict::Fail, "3-fold test accuracy " + fmt("%.4f", s.mean) + " ± " +
                                                    fmt("%.4f", s.std) + " (need >= 0.95), " +
                                                    fmt("%.1f", elapsed) + " s (need < 300 s)"};
}

Outcome ratio_sweep_sanity() {
    const Dataset ds = synth_cycles_vs_paths(200, 6, 12, 0);
    const std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    const CvSummary low = cross_validate(ds, 3, seeds, synthetic_model(0.1), TrainConfig{});
    const CvSummary mid = cross_validate(ds, 3, seeds, synthetic_model(0.5), TrainConfig{});
    return {mid.mean >= low.mean ? Verdict::Pass : Verdict::Fail,
            "mean accuracy over 5 seeds x 3 folds: ratio 0.5 " + fmt("%.4f", mid.mean) + " vs ratio 0.1 " +
                fmt("%.4f", low.mean)};
}

Outcome proteins_long_run() {
    const char* dir = std::getenv("LIFTGRAPH_PROTEINS_DIR");
    if (dir == nullptr || *dir == '\0') return {Verdict::Skip, "set LIFTGRAPH_PROTEINS_DIR to run (not CI-gated)"};
    const Dataset ds = load_tu(dir, "PROTEINS");
    ModelConfig m;
    m.input_dim = ds.feature_dim;
    m.num_classes = ds.num_classes;
    TrainConfig t;
    t.workers = std::max(1u, std::thread::hardware_concurrency());
    const std::vector<std::uint64_t> seeds{0, 1, 2};
    const CvSummary lift = cross_validate(ds, 10, seeds, m, t);
    m.pool.num_lift_layers = 0;
    const CvSummary base = cross_validate(ds, 10, seeds, m, t);
    const bool ok = std::abs(lift.mean - kProteinsLiftPool) <= kProteinsWindow && lift.mean > base.mean;
    return {ok ? Verdict::Pass : Verdict::Fail, "lifting " + fmt("%.4f", lift.mean) + " ± " + fmt("%.4f", lift.std) +
                                                    " (target 0.7409 ± 0.030), baseline " + fmt("%.4f", base.mean)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome cli_determinism() {
    const fs::path root = fs::temp_directory_path() / "liftgraph_acceptance_determinism";
    fs::remove_all(root);
    const std::string base = std::string("\"") + LIFTGRAPH_TOOL_PATH +
                             "\" train --synthetic cycles-paths --seeds 3 --folds 3 --synthetic-graphs 60"
                             " --hidden 16 --epochs 40 --patience 40 --out ";
    std::vector<std::string> csvs;
    for (const char* run : {"a", "b"}) {
        const std::string cmd = base + "\"" + (root / run).string() + "\" > /dev/null";
        const int status = std::system(cmd.c_str());
        if (status != 0) return {Verdict::Fail, "train invocation exited with status " + std::to_string(status)};
        csvs.push_back(slurp(root / run / "metrics.csv"));
    }
    fs::remove_all(root);
    const bool same = !csvs[0].empty() && csvs[0] == csvs[1];
    return {same ? Verdict::Pass : Verdict::Fail,
            std::string("two train invocations, metrics.csv ") + (same ? "byte-identical" : "differs") + " (" +
                std::to_string(csvs[0].size()) + " bytes)"};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"1 property suite", property_suite},
        {"2 desk-scale learning", desk_scale_learning},
        {"3 ratio-sweep sanity", ratio_sweep_sanity},
        {"4 PROTEINS long run", proteins_long_run},
        {"5 CLI determinism", cli_determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {Verdict::Fail, std::string("threw: ") + e.what()};
        }
        const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
        failures += o.verdict == Verdict::Fail;
        std::printf("%s  %s: %s [%.1f s]\n", tag, c.name, o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
