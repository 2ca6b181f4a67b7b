#pragma once

#include <cstdint>
#include <vector>

#include "hmog/graph.hpp"

namespace hmog {

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
    bool amsgrad = true;
};

/// Moments for one parameter.
struct AdamSlot {
    Tensor m;
    Tensor v;
    Tensor v_hat_max;  // running max of bias-corrected v (amsgrad)
};

/// Adam over a fixed list of parameters. With amsgrad the denominator uses
/// the elementwise running maximum of the bias-corrected second moment.
class Adam {
public:
    Adam(std::vector<Parameter*> params, AdamConfig cfg);

    /// One update; grads[i] belongs to params[i]. Throws on NaN gradients
    /// naming the parameter.
    void step(const std::vector<Tensor>& grads);

    std::uint64_t step_count() const { return steps_; }
    const std::vector<AdamSlot>& slots() const { return slots_; }
    const std::vector<Parameter*>& parameters() const { return params_; }
    const AdamConfig& config() const { return cfg_; }

private:
    std::vector<Parameter*> params_;
    std::vector<AdamSlot> slots_;
    AdamConfig cfg_;
    std::uint64_t steps_ = 0;
};

/// Gradients of `loss` for each parameter (zeros for parameters not reached).
std::vector<Tensor> gradients_for(Graph& g, const Gradients& grads, const std::vector<Parameter*>& params);

}  // namespace hmog
