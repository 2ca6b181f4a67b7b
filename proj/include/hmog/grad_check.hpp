#pragma once

#include <functional>
#include <vector>

#include "hmog/graph.hpp"

namespace hmog {

/// Builds a scalar loss in a fresh graph from the current parameter values.
/// Must be deterministic: any randomness has to be re-seeded inside.
using LossBuilder = std::function<Var(Graph&)>;

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t entries_checked = 0;
    std::string worst_parameter;
};

/// Compares reverse-mode gradients with central differences for every
/// trainable entry of `params`. Relative error per entry is
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
GradCheckReport grad_check(const LossBuilder& loss, const std::vector<Parameter*>& params, double eps = 1e-5);

}  // namespace hmog
