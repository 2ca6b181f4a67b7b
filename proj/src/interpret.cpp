#include "hmog/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hmog/data.hpp"

namespace hmog {

Tensor responsibility_correlation(const Tensor& r) {
    const std::size_t n = r.rows(), l = r.cols();
    if (n < 3) throw std::invalid_argument("correlation needs at least 3 samples");
    std::vector<double> mu(l, 0.0), sd(l, 0.0);
    for (std::size_t j = 0; j < l; ++j) {
        for (std::size_t t = 0; t < n; ++t) mu[j] += r(t, j);
        mu[j] /= static_cast<double>(n);
        for (std::size_t t = 0; t < n; ++t) sd[j] += (r(t, j) - mu[j]) * (r(t, j) - mu[j]);
        sd[j] = std::sqrt(sd[j]);
    }
    Tensor c({l, l});
    for (std::size_t i = 0; i < l; ++i) {
        c(i, i) = 1.0;
        for (std::size_t j = i + 1; j < l; ++j) {
            double v = 0.0;
            if (sd[i] > 0.0 && sd[j] > 0.0) {
                for (std::size_t t = 0; t < n; ++t) v += (r(t, i) - mu[i]) * (r(t, j) - mu[j]);
                v = std::clamp(v / (sd[i] * sd[j]), -1.0, 1.0);
            }
            c(i, j) = c(j, i) = v;
        }
    }
    return c;
}

Tensor gating_correlation(const GeneratorTree& tree, const Tensor& z) {
    Graph g;
    Graph::NoGradGuard guard(g);
    return responsibility_correlation(tree.leaf_responsibilities(g, g.constant(z)).value());
}

Tensor generate_tree_samples(const GeneratorTree& tree, const DenseNet& shared, const Tensor& z) {
    Graph g;
    Graph::NoGradGuard guard(g);
    return shared.forward(g, tree.forward(g, g.constant(z))).value();
}

std::vector<std::optional<std::vector<double>>> node_average_response(const GeneratorTree& tree,
                                                                      const DenseNet& shared, const Tensor& z) {
    if (z.rows() < 1) throw std::invalid_argument("node_average_response: need at least one latent");
    Graph g;
    Graph::NoGradGuard guard(g);
    Var zv = g.constant(z);
    const Tensor x = shared.forward(g, tree.forward(g, zv)).value();
    const auto weights = tree.node_weights(g, zv);

    std::vector<std::optional<std::vector<double>>> out(weights.size());
    for (std::size_t m = 0; m < weights.size(); ++m) {
        const Tensor& w = weights[m].value();
        double total = 0.0;
        std::vector<double> acc(x.cols(), 0.0);
        for (std::size_t t = 0; t < x.rows(); ++t) {
            total += w[t];
            for (std::size_t c = 0; c < x.cols(); ++c) acc[c] += w[t] * x(t, c);
        }
        if (total < 1e-12) continue;
        for (auto& a : acc) a /= total;
        out[m] = std::move(acc);
    }
    return out;
}

std::vector<std::vector<Exemplar>> top_leaf_exemplars(const GeneratorTree& tree, const DenseNet& shared,
                                                      const Tensor& z, std::size_t top) {
    const std::size_t n = z.rows();
    if (top > n) throw std::invalid_argument("top_leaf_exemplars: top exceeds number of draws");
    Graph g;
    Graph::NoGradGuard guard(g);
    Var zv = g.constant(z);
    const Tensor x = shared.forward(g, tree.forward(g, zv)).value();
    const Tensor resp = tree.leaf_responsibilities(g, zv).value();

    std::vector<std::vector<Exemplar>> out(tree.leaf_count());
    std::vector<std::size_t> order(n);
    for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
        std::iota(order.begin(), order.end(), 0);
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                          [&](std::size_t a, std::size_t b) {
                              if (resp(a, leaf) != resp(b, leaf)) return resp(a, leaf) > resp(b, leaf);
                              return a < b;
                          });
        for (std::size_t q = 0; q < top; ++q) {
            const std::size_t t = order[q];
            Exemplar e{t, resp(t, leaf), {}};
            for (std::size_t c = 0; c < x.cols(); ++c) e.sample.push_back(x(t, c));
            out[leaf].push_back(std::move(e));
        }
    }
    return out;
}

std::vector<std::vector<Exemplar>> top_leaf_exemplars(const GeneratorTree& tree, const DenseNet& shared,
                                                      std::size_t n_draw, std::size_t top, Rng& rng) {
    if (n_draw < top) throw std::invalid_argument("top_leaf_exemplars: n_draw must be >= top");
    return top_leaf_exemplars(tree, shared, sample_latent({tree.latent_dim()}, n_draw, rng), top);
}

}  // namespace hmog
