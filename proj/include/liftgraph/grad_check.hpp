#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "liftgraph/autodiff.hpp"

namespace liftgraph {

struct GradCheckEntry {
    std::size_t param = 0;
    std::size_t index = 0;  // row-major entry
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::vector<GradCheckEntry> failures;
    /// Coordinates whose +-h probes changed a discrete branch (ReLU mask,
    /// argmax, top-k set). They are excluded from max_rel_error.
    std::vector<GradCheckEntry> kinked;

    bool passed() const { return failures.empty(); }
};

/// Builds a 1x1 result from params bound as leaves of the given tape.
using ScalarFunction = std::function<DiffMatrix(Tape&, std::span<const DiffMatrix> params)>;

/// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
inline constexpr double kGradCheckRelFloor = 1e-3;

/// Compares tape gradients against central differences (f(p+h) - f(p-h)) / 2h
/// for every entry of every parameter.
GradCheckReport grad_check(const ScalarFunction& f, const std::vector<Matrix>& params, double h, double tol);

}  // namespace liftgraph
