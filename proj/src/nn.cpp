#include "hmog/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace hmog {

Activation parse_activation(std::string_view name) {
    if (name == "identity") return Activation::Identity;
    if (name == "tanh") return Activation::Tanh;
    if (name == "softplus") return Activation::Softplus;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "leaky-relu") return Activation::LeakyRelu;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Tanh: return "tanh";
        case Activation::Softplus: return "softplus";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::LeakyRelu: return "leaky-relu";
    }
    return "unknown";
}

Var activate(Var x, Activation a) {
    switch (a) {
        case Activation::Identity: return x;
        case Activation::Tanh: return tanh(x);
        case Activation::Softplus: return softplus(x);
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::LeakyRelu: return leaky_relu(x, 0.2);
    }
    return x;
}

bool twice_differentiable(Activation a) { return a != Activation::LeakyRelu; }

Tensor glorot_normal(std::size_t rows, std::size_t cols, Rng& rng) {
    Tensor t({rows, cols});
    const double sd = std::sqrt(2.0 / static_cast<double>(rows + cols));
    for (auto& v : t.data()) v = sd * rng.normal();
    return t;
}

Dense::Dense(const std::string& name, std::size_t in, std::size_t out, Rng& rng)
    : weight{name + ".W", glorot_normal(out, in, rng)}, bias{name + ".b", Tensor({out}, 0.0)} {}

Var Dense::forward(Graph& g, Var x) const {
    return matmul(x, transpose(g.param(weight))) + g.param(bias);
}

DenseNet::DenseNet(const std::string& name, const std::vector<std::size_t>& sizes, Activation hidden_activation,
                   Rng& rng)
    : activation_(hidden_activation) {
    if (sizes.empty()) throw std::invalid_argument(name + ": dense net needs at least one size");
    in_dim_ = sizes.front();
    out_dim_ = sizes.back();
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        layers_.emplace_back(name + ".l" + std::to_string(i), sizes[i], sizes[i + 1], rng);
    }
}

Var DenseNet::forward(Graph& g, Var x) const {
    if (x.value().cols() != in_dim_) {
        throw ShapeError("dense net expects " + std::to_string(in_dim_) + " input columns, got shape " +
                         shape_str(x.shape()));
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        x = layers_[i].forward(g, x);
        if (i + 1 < layers_.size()) x = activate(x, activation_);
    }
    return x;
}

Var DenseNet::first_activation(Graph& g, Var x) const {
    if (layers_.size() < 2) throw std::logic_error("first_activation: net has no hidden layer");
    return activate(layers_[0].forward(g, x), activation_);
}

std::vector<Parameter*> DenseNet::parameters() {
    std::vector<Parameter*> out;
    for (auto& l : layers_) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

std::vector<const Parameter*> DenseNet::parameters() const {
    std::vector<const Parameter*> out;
    for (const auto& l : layers_) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

std::size_t parameter_count(const std::vector<Parameter*>& params) {
    std::size_t n = 0;
    for (const Parameter* p : params)
        if (p->trainable) n += p->value.size();
    return n;
}

}  // namespace hmog
