#include "hmog/adam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmog {

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    if (!(cfg_.learning_rate > 0.0)) throw std::invalid_argument("adam: learning rate must be positive");
    if (!(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0) || !(cfg_.beta2 >= 0.0 && cfg_.beta2 < 1.0)) {
        throw std::invalid_argument("adam: betas must lie in [0, 1)");
    }
    slots_.reserve(params_.size());
    for (const Parameter* p : params_) {
        const Shape& s = p->value.shape();
        slots_.push_back({Tensor(s, 0.0), Tensor(s, 0.0), Tensor(s, 0.0)});
    }
}

void Adam::step(const std::vector<Tensor>& grads) {
    if (grads.size() != params_.size()) throw std::invalid_argument("adam: one gradient per parameter required");
    for (std::size_t k = 0; k < params_.size(); ++k) {
        if (grads[k].shape() != params_[k]->value.shape()) {
            throw ShapeError("adam: gradient shape " + shape_str(grads[k].shape()) + " does not match parameter " +
                             params_[k]->name + " " + shape_str(params_[k]->value.shape()));
        }
        for (double g : grads[k].data()) {
            if (std::isnan(g)) throw std::domain_error("adam: NaN gradient for parameter " + params_[k]->name);
        }
    }

    ++steps_;
    const double t = static_cast<double>(steps_);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t);

    for (std::size_t k = 0; k < params_.size(); ++k) {
        Parameter& p = *params_[k];
        if (!p.trainable) continue;
        AdamSlot& s = slots_[k];
        const auto& g = grads[k].data();
        auto& w = p.value.data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            s.m[i] = cfg_.beta1 * s.m[i] + (1.0 - cfg_.beta1) * g[i];
            s.v[i] = cfg_.beta2 * s.v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double m_hat = s.m[i] / bc1;
            double v_hat = s.v[i] / bc2;
            if (cfg_.amsgrad) {
                s.v_hat_max[i] = std::max(s.v_hat_max[i], v_hat);
                v_hat = s.v_hat_max[i];
            }
            w[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.eps);
        }
    }
}

std::vector<Tensor> gradients_for(Graph& g, const Gradients& grads, const std::vector<Parameter*>& params) {
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const Parameter* p : params) out.push_back(grads.value(g.param(*p)));
    return out;
}

}  // namespace hmog
