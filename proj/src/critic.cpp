#include "hmog/critic.hpp"

#include <stdexcept>

namespace hmog {

std::string_view head_name(HeadKind h) {
    switch (h) {
        case HeadKind::Wasserstein: return "wasserstein";
        case HeadKind::Sigmoid: return "sigmoid";
        case HeadKind::Softmax: return "softmax";
    }
    return "unknown";
}

namespace {

std::vector<std::size_t> sizes_for(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
    std::vector<std::size_t> s{in};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out);
    return s;
}

}  // namespace

CriticNet::CriticNet(std::size_t data_dim, const std::vector<std::size_t>& hidden, Activation activation,
                     HeadKind head, Rng& rng, std::size_t classes)
    : head_(head) {
    std::size_t outputs = 1;
    if (head == HeadKind::Softmax) {
        if (classes < 2) throw std::invalid_argument("softmax critic head needs K+1 >= 2 classes");
        outputs = classes;
    }
    net_ = DenseNet("critic", sizes_for(data_dim, hidden, outputs), activation, rng);
    // Both Wasserstein losses and the penalty are invariant to a constant score offset.
    if (head == HeadKind::Wasserstein) net_.layer(net_.layer_count() - 1).bias.trainable = false;
}

bool CriticNet::twice_differentiable() const { return hmog::twice_differentiable(net_.hidden_activation()); }

Var CriticNet::logits(Graph& g, Var x) const {
    if (x.value().rank() != 2 || x.value().cols() != net_.in_dim()) {
        throw ShapeError("critic (" + std::string(head_name(head_)) + " head) expects (n, " +
                         std::to_string(net_.in_dim()) + ") samples, got " + shape_str(x.shape()));
    }
    return net_.forward(g, x);
}

Var CriticNet::forward(Graph& g, Var x) const {
    Var out = logits(g, x);
    switch (head_) {
        case HeadKind::Wasserstein: return out;
        case HeadKind::Sigmoid: return sigmoid(out);
        case HeadKind::Softmax: return softmax(out);
    }
    return out;
}

AuxClassifier::AuxClassifier(std::size_t data_dim, const std::vector<std::size_t>& hidden, Activation activation,
                             std::size_t classes, Rng& rng)
    : net_("classifier", sizes_for(data_dim, hidden, classes), activation, rng) {
    if (classes < 1) throw std::invalid_argument("classifier needs at least one class");
}

Var AuxClassifier::forward(Graph& g, Var x) const { return softmax(net_.forward(g, x)); }

}  // namespace hmog
