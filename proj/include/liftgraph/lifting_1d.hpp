#pragma once

#include <span>
#include <vector>

namespace liftgraph {

/// Even samples after the update step and odd samples after prediction.
struct LiftedSignal {
    std::vector<double> approx;
    std::vector<double> detail;
};

/// Classical forward lifting with scalar predict/update coefficients:
///   detail = x_odd - predict * x_even
///   approx = x_even + update * detail
/// Requires an even-length signal.
LiftedSignal classical_lift_1d(std::span<const double> signal, double predict, double update);

/// Backward lifting; undoes classical_lift_1d step by step.
std::vector<double> classical_unlift_1d(const LiftedSignal& lifted, double predict, double update);

}  // namespace liftgraph
