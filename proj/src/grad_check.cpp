#include "liftgraph/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "liftgraph/errors.hpp"

namespace liftgraph {

namespace {

struct Evaluation {
    double value;
    std::uint64_t signature;
};

Evaluation evaluate(const ScalarFunction& f, const std::vector<Matrix>& params) {
    Tape tape;
    std::vector<DiffMatrix> bound;
    bound.reserve(params.size());
    for (const Matrix& p : params) bound.push_back(tape.leaf(p));
    const DiffMatrix out = f(tape, bound);
    if (out.rows() != 1 || out.cols() != 1) throw ShapeError("grad_check: function must return 1x1");
    return {out(0, 0), tape.branch_signature()};
}

}  // namespace

GradCheckReport grad_check(const ScalarFunction& f, const std::vector<Matrix>& params, double h, double tol) {
    if (!(h > 0.0)) throw std::invalid_argument("grad_check: step must be positive");

    std::vector<Matrix> analytic;
    std::uint64_t base_signature = 0;
    {
        Tape tape;
        std::vector<DiffMatrix> bound;
        for (const Matrix& p : params) bound.push_back(tape.leaf(p));
        const DiffMatrix out = f(tape, bound);
        const Gradients grads = tape.backward(out);
        for (const DiffMatrix& b : bound) analytic.push_back(grads.of(b));
        base_signature = tape.branch_signature();
    }

    GradCheckReport report;
    std::vector<Matrix> probe = params;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (std::size_t i = 0; i < params[p].size(); ++i) {
            const double original = params[p].data()[i];
            probe[p].data()[i] = original + h;
            const Evaluation plus = evaluate(f, probe);
            probe[p].data()[i] = original - h;
            const Evaluation minus = evaluate(f, probe);
            probe[p].data()[i] = original;

            GradCheckEntry entry;
            entry.param = p;
            entry.index = i;
            entry.analytic = analytic[p].data()[i];
            entry.numeric = (plus.value - minus.value) / (2.0 * h);
            const double denom = std::max({std::abs(entry.analytic), std::abs(entry.numeric), kGradCheckRelFloor});
            entry.rel_error = std::abs(entry.analytic - entry.numeric) / denom;

            if (plus.signature != base_signature || minus.signature != base_signature) {
                report.kinked.push_back(entry);
                continue;
            }
            ++report.checked;
            report.max_rel_error = std::max(report.max_rel_error, entry.rel_error);
            if (!(entry.rel_error < tol)) report.failures.push_back(entry);
        }
    }
    return report;
}

}  // namespace liftgraph
