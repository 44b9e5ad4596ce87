#include "liftgraph/lifting_1d.hpp"

#include <stdexcept>
#include <string>

#include "liftgraph/errors.hpp"

namespace liftgraph {

LiftedSignal classical_lift_1d(std::span<const double> signal, double predict, double update) {
    if (signal.size() % 2 != 0) {
        throw ShapeError("classical_lift_1d: signal length " + std::to_string(signal.size()) + " is odd");
    }
    const std::size_t half = signal.size() / 2;
    LiftedSignal out;
    out.approx.resize(half);
    out.detail.resize(half);
    for (std::size_t n = 0; n < half; ++n) {
        const double even = signal[2 * n];
        const double odd = signal[2 * n + 1];
        out.detail[n] = odd - predict * even;
        out.approx[n] = even + update * out.detail[n];
    }
    return out;
}

std::vector<double> classical_unlift_1d(const LiftedSignal& lifted, double predict, double update) {
    if (lifted.approx.size() != lifted.detail.size()) {
        throw ShapeError("classical_unlift_1d: approx and detail halves differ in length");
    }
    std::vector<double> signal(2 * lifted.approx.size());
    for (std::size_t n = 0; n < lifted.approx.size(); ++n) {
        const double even = lifted.approx[n] - update * lifted.detail[n];
        signal[2 * n] = even;
        signal[2 * n + 1] = lifted.detail[n] + predict * even;
    }
    return signal;
}

}  // namespace liftgraph
