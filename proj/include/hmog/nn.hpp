#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hmog/graph.hpp"
#include "hmog/rng.hpp"

namespace hmog {

enum class Activation { Identity, Tanh, Softplus, Sigmoid, LeakyRelu };

Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation a);
Var activate(Var x, Activation a);
bool twice_differentiable(Activation a);

/// Glorot-normal matrix: entries ~ N(0, 2 / (fan_in + fan_out)).
Tensor glorot_normal(std::size_t rows, std::size_t cols, Rng& rng);

/// y = x W^T + b, W is (out x in).
struct Dense {
    Parameter weight;
    Parameter bias;

    Dense() = default;
    Dense(const std::string& name, std::size_t in, std::size_t out, Rng& rng);

    std::size_t in_dim() const { return weight.value.shape()[1]; }
    std::size_t out_dim() const { return weight.value.shape()[0]; }
    Var forward(Graph& g, Var x) const;
};

/// Fully connected stack. Hidden layers use `hidden_activation`; the output
/// layer is linear. A net built from a single size is the identity map.
class DenseNet {
public:
    DenseNet() = default;
    DenseNet(const std::string& name, const std::vector<std::size_t>& sizes, Activation hidden_activation, Rng& rng);

    bool is_identity() const { return layers_.empty(); }
    std::size_t in_dim() const { return in_dim_; }
    std::size_t out_dim() const { return out_dim_; }
    Activation hidden_activation() const { return activation_; }
    std::size_t layer_count() const { return layers_.size(); }
    Dense& layer(std::size_t i) { return layers_[i]; }
    const Dense& layer(std::size_t i) const { return layers_[i]; }

    Var forward(Graph& g, Var x) const;
    /// Output of the first layer after its activation (the net's first hidden
    /// representation). Requires at least two layers.
    Var first_activation(Graph& g, Var x) const;

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;

private:
    std::vector<Dense> layers_;
    Activation activation_ = Activation::Tanh;
    std::size_t in_dim_ = 0;
    std::size_t out_dim_ = 0;
};

std::size_t parameter_count(const std::vector<Parameter*>& params);

}  // namespace hmog
