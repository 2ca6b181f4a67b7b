#pragma once

#include <string_view>

#include "hmog/nn.hpp"

namespace hmog {

enum class HeadKind {
    Wasserstein,  // one unbounded score
    Sigmoid,      // one probability of "real"
    Softmax,      // K+1 class probabilities, class 0 = real
};

std::string_view head_name(HeadKind h);

/// The Wasserstein head keeps its output bias frozen at zero.
class CriticNet {
public:
    CriticNet() = default;
    /// `classes` is only used by the softmax head (K+1 outputs).
    CriticNet(std::size_t data_dim, const std::vector<std::size_t>& hidden, Activation activation, HeadKind head,
              Rng& rng, std::size_t classes = 0);

    HeadKind head() const { return head_; }
    std::size_t data_dim() const { return net_.in_dim(); }
    std::size_t output_dim() const { return net_.out_dim(); }
    bool twice_differentiable() const;

    /// Pre-head outputs (n x outputs).
    Var logits(Graph& g, Var x) const;
    /// Scores, probabilities or class probabilities depending on the head.
    Var forward(Graph& g, Var x) const;

    DenseNet& net() { return net_; }
    const DenseNet& net() const { return net_; }
    std::vector<Parameter*> parameters() { return net_.parameters(); }

private:
    DenseNet net_;
    HeadKind head_ = HeadKind::Wasserstein;
};

/// K-way classifier over generated samples (softmax output).
class AuxClassifier {
public:
    AuxClassifier() = default;
    AuxClassifier(std::size_t data_dim, const std::vector<std::size_t>& hidden, Activation activation,
                  std::size_t classes, Rng& rng);

    std::size_t classes() const { return net_.out_dim(); }
    Var forward(Graph& g, Var x) const;
    DenseNet& net() { return net_; }
    std::vector<Parameter*> parameters() { return net_.parameters(); }

private:
    DenseNet net_;
};

}  // namespace hmog
