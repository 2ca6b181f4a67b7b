#pragma once

#include <optional>
#include <vector>

#include "hmog/generators.hpp"
#include "hmog/rng.hpp"

namespace hmog {

/// Pearson correlation between the columns of a responsibility matrix
/// (n x L). Constant columns get zero off-diagonal entries; the diagonal is 1.
Tensor responsibility_correlation(const Tensor& responsibilities);

/// Leaf-by-leaf correlation of path-product gatings over the latents z.
Tensor gating_correlation(const GeneratorTree& tree, const Tensor& z);

/// Generated samples shared(tree(z)) for a batch of latents.
Tensor generate_tree_samples(const GeneratorTree& tree, const DenseNet& shared, const Tensor& z);

/// Mean generated sample per tree node, weighted by the node's path product;
/// empty when the node's total weight is below 1e-12. Heap order.
std::vector<std::optional<std::vector<double>>> node_average_response(const GeneratorTree& tree,
                                                                      const DenseNet& shared, const Tensor& z);

struct Exemplar {
    std::size_t draw = 0;         // index among the n_draw latents
    double responsibility = 0.0;  // of the leaf this exemplar belongs to
    std::vector<double> sample;
};

/// For each leaf, the `top` draws with highest responsibility for that leaf
/// (ties by lower draw index), in descending responsibility order.
std::vector<std::vector<Exemplar>> top_leaf_exemplars(const GeneratorTree& tree, const DenseNet& shared,
                                                      std::size_t n_draw, std::size_t top, Rng& rng);
/// Same over caller-provided latents.
std::vector<std::vector<Exemplar>> top_leaf_exemplars(const GeneratorTree& tree, const DenseNet& shared,
                                                      const Tensor& z, std::size_t top);

}  // namespace hmog
