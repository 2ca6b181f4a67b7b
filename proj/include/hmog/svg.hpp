#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hmog/interpret.hpp"
#include "hmog/tensor.hpp"

namespace hmog {

/// Distinct color for generator `i` of `count`.
std::string palette_color(std::size_t i, std::size_t count);

/// Real samples as crosses, generated samples as dots colored by component.
/// The legend has one entry per component.
std::string scatter_svg(const Tensor& real, const Tensor& fake, const std::vector<std::size_t>& component,
                        std::size_t component_count);

/// Heatmap of an L x L matrix with values in [-1, 1]; one <rect class="cell"> per entry.
std::string corr_svg(const Tensor& corr);

/// Complete binary tree in heap order: each node labeled with its mean
/// response, leaves also list their exemplar coordinates. One <g class="node">
/// per node.
std::string tree_svg(const std::vector<std::optional<std::vector<double>>>& node_means,
                     const std::vector<std::vector<Exemplar>>& exemplars);

}  // namespace hmog
