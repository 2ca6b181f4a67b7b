#include "hmog/losses.hpp"

#include <stdexcept>

namespace hmog {

namespace {

void require_nonempty(Var v, const char* what) {
    if (v.value().size() == 0 || v.value().rows() == 0) throw std::invalid_argument(std::string(what) + ": empty batch");
}

Var safe_log(Var x) { return log(clamp_min(x, kLogFloor)); }

}  // namespace

LossPair original_gan_losses(Var d_real, Var d_fake) {
    require_nonempty(d_real, "original_gan_losses");
    require_nonempty(d_fake, "original_gan_losses");
    Var log_one_minus_fake = mean(safe_log(1.0 - d_fake));
    return {-mean(safe_log(d_real)) - log_one_minus_fake, log_one_minus_fake};
}

LossPair wasserstein_losses(Var d_real, Var d_fake) {
    require_nonempty(d_real, "wasserstein_losses");
    require_nonempty(d_fake, "wasserstein_losses");
    Var fake_mean = mean(d_fake);
    return {-(mean(d_real) - fake_mean), -fake_mean};
}

Var gradient_penalty(Graph& g, const CriticNet& critic, const Tensor& real, const Tensor& fake, Rng& rng) {
    Tensor eps({real.rows(), 1});
    for (auto& e : eps.data()) e = rng.uniform();
    return gradient_penalty(g, critic, real, fake, eps);
}

Var gradient_penalty(Graph& g, const CriticNet& critic, const Tensor& real, const Tensor& fake,
                     const Tensor& mix_weights) {
    if (real.shape() != fake.shape()) {
        throw ShapeError("gradient_penalty: real " + shape_str(real.shape()) + " vs fake " + shape_str(fake.shape()));
    }
    if (real.rows() == 0) throw std::invalid_argument("gradient_penalty: empty batch");
    if (mix_weights.size() != real.rows()) throw ShapeError("gradient_penalty: one mixing weight per sample required");
    if (!critic.twice_differentiable()) {
        throw std::domain_error("gradient_penalty: critic activation '" +
                                std::string(activation_name(critic.net().hidden_activation())) +
                                "' is not twice differentiable");
    }
    Tensor interp(real.shape());
    const std::size_t cols = real.cols();
    for (std::size_t t = 0; t < real.rows(); ++t) {
        const double e = mix_weights[t];
        for (std::size_t c = 0; c < cols; ++c) interp(t, c) = e * real(t, c) + (1.0 - e) * fake(t, c);
    }
    Var x_hat = g.variable(std::move(interp));
    Var scores = critic.forward(g, x_hat);
    Var grad = g.input_gradient(sum(scores), x_hat);
    return mean(square(l2_norm(grad) - 1.0));
}

Var pick_columns(Graph& g, Var probs, std::span<const std::size_t> cls) {
    const Tensor& p = probs.value();
    if (cls.size() != p.rows()) throw std::invalid_argument("pick_columns: one class per row required");
    Tensor mask(p.shape());
    for (std::size_t t = 0; t < cls.size(); ++t) {
        if (cls[t] >= p.cols()) throw std::out_of_range("class index " + std::to_string(cls[t]) + " out of range");
        mask(t, cls[t]) = 1.0;
    }
    return row_sum(probs * g.constant(std::move(mask)));
}

LossPair madgan_losses(Var d_real, Var d_fake, std::span<const std::size_t> fake_class) {
    require_nonempty(d_real, "madgan_losses");
    require_nonempty(d_fake, "madgan_losses");
    Graph& g = d_real.graph();
    for (std::size_t c : fake_class) {
        if (c == 0) throw std::invalid_argument("madgan_losses: class 0 is reserved for real samples");
    }
    std::vector<std::size_t> zeros_real(d_real.value().rows(), 0);
    std::vector<std::size_t> zeros_fake(d_fake.value().rows(), 0);
    Var real_term = mean(safe_log(pick_columns(g, d_real, zeros_real)));
    Var fake_term = mean(safe_log(pick_columns(g, d_fake, fake_class)));
    Var g_loss = mean(safe_log(1.0 - pick_columns(g, d_fake, zeros_fake)));
    return {-real_term - fake_term, g_loss};
}

LossPair mgan_losses(Var d_real, Var d_fake, Var c_fake, std::span<const std::size_t> generator) {
    LossPair base = original_gan_losses(d_real, d_fake);
    Var class_term = -mean(safe_log(pick_columns(c_fake.graph(), c_fake, generator)));
    return {base.d_loss, base.g_loss + class_term};
}

}  // namespace hmog
