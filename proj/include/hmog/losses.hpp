#pragma once

#include <span>

#include "hmog/critic.hpp"
#include "hmog/graph.hpp"
#include "hmog/rng.hpp"

namespace hmog {

/// Floor applied inside every log of a likelihood loss.
inline constexpr double kLogFloor = 1e-12;

struct LossPair {
    Var d_loss;  // minimized by the discriminator / critic
    Var g_loss;  // minimized by the generator side
};

/// d = -mean log D(real) - mean log(1 - D(fake)); g = mean log(1 - D(fake)).
LossPair original_gan_losses(Var d_real, Var d_fake);

/// critic = -(mean D(real) - mean D(fake)); gen = -mean D(fake).
LossPair wasserstein_losses(Var d_real, Var d_fake);

/// mean over samples of (|grad_x D(x_hat)| - 1)^2 at x_hat = eps*real + (1-eps)*fake.
/// The interpolation is detached; the result differentiates into the critic.
Var gradient_penalty(Graph& g, const CriticNet& critic, const Tensor& real, const Tensor& fake, Rng& rng);
/// Same with explicit per-sample mixing weights (n x 1).
Var gradient_penalty(Graph& g, const CriticNet& critic, const Tensor& real, const Tensor& fake,
                     const Tensor& mix_weights);

/// Entries probs(t, cls[t]) as an (n x 1) node.
Var pick_columns(Graph& g, Var probs, std::span<const std::size_t> cls);

/// (K+1)-class discriminator losses. `fake_class[t]` in [1, K] names the
/// generator of fake t; class 0 is reserved for real samples.
LossPair madgan_losses(Var d_real, Var d_fake, std::span<const std::size_t> fake_class);

/// Two-class discriminator plus K-class generator classifier. The returned
/// g_loss is the joint generator+classifier objective; `generator[t]` is the
/// 0-based index of the generator of fake t.
LossPair mgan_losses(Var d_real, Var d_fake, Var c_fake, std::span<const std::size_t> generator);

}  // namespace hmog
