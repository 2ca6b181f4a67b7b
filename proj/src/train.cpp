#include "hmog/train.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "hmog/data.hpp"
#include "hmog/losses.hpp"

namespace hmog {

LossMode parse_loss_mode(std::string_view name) {
    if (name == "wgan-gp") return LossMode::WganGp;
    if (name == "wgan-clip") return LossMode::WganClip;
    if (name == "original-gan") return LossMode::OriginalGan;
    if (name == "madgan") return LossMode::Madgan;
    if (name == "mgan") return LossMode::Mgan;
    if (name == "megan") return LossMode::Megan;
    throw std::invalid_argument("unknown loss mode '" + std::string(name) + "'");
}

std::string_view loss_mode_name(LossMode m) {
    switch (m) {
        case LossMode::WganGp: return "wgan-gp";
        case LossMode::WganClip: return "wgan-clip";
        case LossMode::OriginalGan: return "original-gan";
        case LossMode::Madgan: return "madgan";
        case LossMode::Mgan: return "mgan";
        case LossMode::Megan: return "megan";
    }
    return "unknown";
}

bool is_wasserstein(LossMode m) { return m == LossMode::WganGp || m == LossMode::WganClip; }

HeadKind head_for(LossMode m) {
    if (is_wasserstein(m)) return HeadKind::Wasserstein;
    if (m == LossMode::Madgan) return HeadKind::Softmax;
    return HeadKind::Sigmoid;
}

void check_compatible(Architecture a, LossMode m) {
    bool ok = false;
    switch (a) {
        case Architecture::HMoG:
        case Architecture::MoG:
        case Architecture::FC: ok = is_wasserstein(m) || m == LossMode::OriginalGan; break;
        case Architecture::MADGAN: ok = m == LossMode::Madgan; break;
        case Architecture::MGAN: ok = m == LossMode::Mgan; break;
        case Architecture::MEGAN: ok = m == LossMode::Megan || m == LossMode::OriginalGan; break;
    }
    if (!ok) {
        throw std::invalid_argument("loss mode '" + std::string(loss_mode_name(m)) + "' is not supported for architecture '" +
                                    std::string(architecture_name(a)) + "'");
    }
}

void TrainConfig::validate() const {
    if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
        throw std::invalid_argument("betas must lie in [0, 1)");
    }
    if (!(adam.eps > 0.0)) throw std::invalid_argument("eps must be > 0");
    if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
    if (critic_steps < 1) throw std::invalid_argument("critic_steps must be >= 1");
    if (!(gp_lambda >= 0.0)) throw std::invalid_argument("gp_lambda must be >= 0");
    if (loss_mode == LossMode::WganClip && !(clip_bound > 0.0)) throw std::invalid_argument("clip_bound must be > 0");
}

std::vector<Parameter*> ModelBundle::generator_step_parameters() {
    auto out = generator->parameters();
    if (classifier) {
        for (Parameter* p : classifier->parameters()) out.push_back(p);
    }
    return out;
}

std::vector<Parameter*> ModelBundle::all_parameters() {
    auto out = generator->parameters();
    for (Parameter* p : critic.parameters()) out.push_back(p);
    if (classifier) {
        for (Parameter* p : classifier->parameters()) out.push_back(p);
    }
    return out;
}

ModelBundle make_models(const ModelSpec& spec, LossMode mode, Rng& rng) {
    check_compatible(spec.architecture, mode);
    ModelBundle b;
    b.spec = spec;
    b.generator = make_generator(spec, rng);
    const std::size_t k = b.generator->component_count();
    b.critic = CriticNet(spec.data_dim, spec.critic_hidden, spec.critic_activation, head_for(mode), rng, k + 1);
    if (mode == LossMode::Mgan) {
        b.classifier = AuxClassifier(spec.data_dim, spec.classifier_hidden, spec.critic_activation, k, rng);
    }
    return b;
}

// ---------------------------------------------------------------------------

CriticLoss build_critic_loss(Graph& g, ModelBundle& m, const TrainConfig& cfg, const Tensor& real, const Tensor& z,
                             Rng& rng) {
    Tensor fake;
    std::vector<std::size_t> component;
    {
        Graph::NoGradGuard guard(g);
        Generated gen = m.generator->generate(g, g.constant(z), rng);
        fake = gen.x.value();
        component = std::move(gen.component);
    }
    Var d_real = m.critic.forward(g, g.constant(real));
    Var d_fake = m.critic.forward(g, g.constant(fake));

    CriticLoss out;
    switch (cfg.loss_mode) {
        case LossMode::WganGp: {
            out.loss = wasserstein_losses(d_real, d_fake).d_loss;
            out.penalty = gradient_penalty(g, m.critic, real, fake, rng);
            out.total = cfg.gp_lambda != 0.0 ? out.loss + *out.penalty * cfg.gp_lambda : out.loss;
            return out;
        }
        case LossMode::WganClip: out.loss = wasserstein_losses(d_real, d_fake).d_loss; break;
        case LossMode::OriginalGan:
        case LossMode::Megan:
        case LossMode::Mgan: out.loss = original_gan_losses(d_real, d_fake).d_loss; break;
        case LossMode::Madgan: {
            for (auto& c : component) ++c;
            out.loss = madgan_losses(d_real, d_fake, component).d_loss;
            break;
        }
    }
    out.total = out.loss;
    return out;
}

Var build_generator_loss(Graph& g, ModelBundle& m, const TrainConfig& cfg, const Tensor& z, Rng& rng) {
    Generated gen = m.generator->generate(g, g.constant(z), rng);
    Var d_fake = m.critic.forward(g, gen.x);
    switch (cfg.loss_mode) {
        case LossMode::WganGp:
        case LossMode::WganClip: return -mean(d_fake);
        case LossMode::OriginalGan:
        case LossMode::Megan: return mean(log(clamp_min(1.0 - d_fake, kLogFloor)));
        case LossMode::Madgan: {
            std::vector<std::size_t> cls = gen.component;
            for (auto& c : cls) ++c;
            return madgan_losses(d_fake, d_fake, cls).g_loss;
        }
        case LossMode::Mgan: {
            if (!m.classifier) throw std::logic_error("mgan loss requires a classifier");
            Var c_fake = m.classifier->forward(g, gen.x);
            return mgan_losses(d_fake, d_fake, c_fake, gen.component).g_loss;
        }
    }
    throw std::logic_error("unhandled loss mode");
}

// ---------------------------------------------------------------------------

Trainer::Trainer(ModelBundle& models, DataSampler data, const TrainConfig& cfg)
    : models_(models),
      data_(std::move(data)),
      cfg_(cfg),
      rng_(Rng(cfg.seed).split(2)),
      critic_opt_(models.critic.parameters(), cfg.adam),
      generator_opt_(models.generator_step_parameters(), cfg.adam) {
    cfg_.validate();
    check_compatible(models_.generator->architecture(), cfg_.loss_mode);
}

Tensor Trainer::sample_latents(std::size_t n) { return sample_latent({models_.spec.latent_dim}, n, rng_); }

void Trainer::fail(const std::string& what, const Tensor& real, const Tensor& fake) const {
    auto stats = [](const Tensor& t) {
        std::ostringstream s;
        if (t.size() == 0) return std::string("empty");
        double lo = t[0], hi = t[0], total = 0.0;
        std::size_t non_finite = 0;
        for (double v : t.data()) {
            if (!std::isfinite(v)) {
                ++non_finite;
                continue;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            total += v;
        }
        s << "shape=" << shape_str(t.shape()) << " min=" << lo << " max=" << hi
          << " mean=" << total / static_cast<double>(t.size()) << " non_finite=" << non_finite;
        return s.str();
    };
    std::ostringstream d;
    d << "step=" << steps_ + 1 << "\nreal: " << stats(real) << "\nfake: " << stats(fake) << '\n';
    throw NumericalError(what, d.str());
}

double Trainer::critic_update(double* gp_out) {
    Tensor real = data_(cfg_.batch_size, rng_);
    Tensor z = sample_latents(cfg_.batch_size);
    Graph g;
    CriticLoss loss = build_critic_loss(g, models_, cfg_, real, z, rng_);
    const double value = loss.loss.value().item();
    const double gp = loss.penalty ? loss.penalty->value().item() : 0.0;
    if (!std::isfinite(loss.total.value().item())) {
        Graph probe;
        Graph::NoGradGuard guard(probe);
        Rng r = rng_;
        fail("non-finite critic loss", real, models_.generator->generate(probe, probe.constant(z), r).x.value());
    }
    Gradients grads = g.backward(loss.total);
    critic_opt_.step(gradients_for(g, grads, critic_opt_.parameters()));
    if (cfg_.loss_mode == LossMode::WganClip) {
        for (Parameter* p : models_.critic.parameters())
            for (auto& w : p->value.data()) w = std::clamp(w, -cfg_.clip_bound, cfg_.clip_bound);
    }
    if (gp_out) *gp_out = gp;
    return value;
}

double Trainer::generator_update() {
    Tensor z = sample_latents(cfg_.batch_size);
    Graph g;
    Var loss = build_generator_loss(g, models_, cfg_, z, rng_);
    const double value = loss.value().item();
    if (!std::isfinite(value)) {
        Graph probe;
        Graph::NoGradGuard guard(probe);
        Rng r = rng_;
        fail("non-finite generator loss", Tensor({0, models_.spec.data_dim}),
             models_.generator->generate(probe, probe.constant(z), r).x.value());
    }
    Gradients grads = g.backward(loss);
    generator_opt_.step(gradients_for(g, grads, generator_opt_.parameters()));
    return value;
}

StepLog Trainer::step() {
    const auto start = std::chrono::steady_clock::now();
    StepLog log;
    for (std::size_t i = 0; i < cfg_.critic_steps; ++i) last_d_loss_ = critic_update(&last_gp_);
    log.g_loss = generator_update();
    log.d_loss = last_d_loss_;
    log.gp_term = last_gp_;
    log.step = ++steps_;
    log.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return log;
}

std::vector<StepLog> Trainer::train(const TrainCallbacks& callbacks) {
    std::vector<StepLog> log;
    log.reserve(cfg_.total_steps);
    while (steps_ < cfg_.total_steps) {
        log.push_back(step());
        if (callbacks.on_step) callbacks.on_step(log.back());
        const bool periodic = callbacks.eval_every && steps_ % callbacks.eval_every == 0;
        if (callbacks.on_eval && (periodic || steps_ == cfg_.total_steps)) callbacks.on_eval(steps_);
    }
    return log;
}

}  // namespace hmog
