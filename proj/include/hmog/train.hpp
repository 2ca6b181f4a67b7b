#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hmog/adam.hpp"
#include "hmog/critic.hpp"
#include "hmog/generators.hpp"
#include "hmog/rng.hpp"

namespace hmog {

enum class LossMode { WganGp, WganClip, OriginalGan, Madgan, Mgan, Megan };

LossMode parse_loss_mode(std::string_view name);
std::string_view loss_mode_name(LossMode m);
HeadKind head_for(LossMode m);
bool is_wasserstein(LossMode m);
/// Throws std::invalid_argument when the pairing is not supported.
void check_compatible(Architecture a, LossMode m);

struct TrainConfig {
    AdamConfig adam{};
    std::size_t batch_size = 128;
    std::size_t critic_steps = 5;
    double gp_lambda = 10.0;
    std::size_t total_steps = 0;
    LossMode loss_mode = LossMode::WganGp;
    double clip_bound = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Generator, critic and (for MGAN) the auxiliary classifier.
struct ModelBundle {
    ModelSpec spec;
    std::unique_ptr<Generator> generator;
    CriticNet critic;
    std::optional<AuxClassifier> classifier;

    /// Parameters updated by the generator step.
    std::vector<Parameter*> generator_step_parameters();
    /// Every parameter (generator, critic, classifier), for checkpoints.
    std::vector<Parameter*> all_parameters();
};

ModelBundle make_models(const ModelSpec& spec, LossMode mode, Rng& rng);

/// Draws a batch of real samples.
using DataSampler = std::function<Tensor(std::size_t n, Rng& rng)>;

struct StepLog {
    std::size_t step = 0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    double gp_term = 0.0;
    double wall_ms = 0.0;
};

class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::string diagnostics)
        : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}
    const std::string& diagnostics() const { return diagnostics_; }

private:
    std::string diagnostics_;
};

struct TrainCallbacks {
    std::function<void(const StepLog&)> on_step;
    std::function<void(std::size_t step)> on_eval;
    std::size_t eval_every = 0;
};

/// Alternating optimization: critic_steps critic updates, then one generator
/// update per iteration. Fully determined by the config seed.
class Trainer {
public:
    Trainer(ModelBundle& models, DataSampler data, const TrainConfig& cfg);

    /// One iteration; returns its log entry (wall_ms included).
    StepLog step();
    std::vector<StepLog> train(const TrainCallbacks& callbacks = {});

    /// Single critic / generator updates, exposed for tests.
    double critic_update(double* gp_out = nullptr);
    double generator_update();

    std::size_t steps_done() const { return steps_; }
    const TrainConfig& config() const { return cfg_; }

private:
    Tensor sample_latents(std::size_t n);
    [[noreturn]] void fail(const std::string& what, const Tensor& real, const Tensor& fake) const;

    ModelBundle& models_;
    DataSampler data_;
    TrainConfig cfg_;
    Rng rng_;
    Adam critic_opt_;
    Adam generator_opt_;
    std::size_t steps_ = 0;
    double last_d_loss_ = 0.0;
    double last_gp_ = 0.0;
};

/// Training-loss builders shared by the trainer and gradient checks. Fake
/// batches are drawn with `rng`; pass a fixed-seed rng for reproducibility.
struct CriticLoss {
    Var total;
    Var loss;
    std::optional<Var> penalty;
};
CriticLoss build_critic_loss(Graph& g, ModelBundle& m, const TrainConfig& cfg, const Tensor& real, const Tensor& z,
                             Rng& rng);
Var build_generator_loss(Graph& g, ModelBundle& m, const TrainConfig& cfg, const Tensor& z, Rng& rng);

}  // namespace hmog
