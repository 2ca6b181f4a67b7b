#include "hmog/config.hpp"

#include <yaml-cpp/yaml.h>

#include <bit>
#include <fstream>
#include <set>
#include <sstream>

namespace hmog {

namespace {

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
    if (!node.IsMap()) throw ConfigError(path, "expected a mapping");
    for (auto it = node.begin(); it != node.end(); ++it) {
        const auto key = it->first.as<std::string>();
        if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown key");
    }
}

template <typename T>
T read(const YAML::Node& node, const std::string& path) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(path, "invalid value '" + YAML::Dump(node) + "'");
    }
}

std::size_t read_count(const YAML::Node& node, const std::string& path, long long min) {
    const auto v = read<long long>(node, path);
    if (v < min) throw ConfigError(path, "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

std::vector<std::size_t> read_sizes(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence()) throw ConfigError(path, "expected a list of layer sizes");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(read_count(node[i], path + "[" + std::to_string(i) + "]", 1));
    return out;
}

Activation read_activation(const YAML::Node& node, const std::string& path) {
    try {
        return parse_activation(read<std::string>(node, path));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

void read_block(const YAML::Node& node, const std::string& path, std::vector<std::size_t>& hidden,
                Activation* activation) {
    std::set<std::string> keys{"hidden"};
    if (activation) keys.insert("activation");
    check_keys(node, path, keys);
    if (node["hidden"]) hidden = read_sizes(node["hidden"], path + ".hidden");
    if (activation && node["activation"]) *activation = read_activation(node["activation"], path + ".activation");
}

LossMode default_loss(Architecture a) {
    switch (a) {
        case Architecture::MADGAN: return LossMode::Madgan;
        case Architecture::MGAN: return LossMode::Mgan;
        case Architecture::MEGAN: return LossMode::Megan;
        default: return LossMode::WganGp;
    }
}

}  // namespace

std::string default_output_dir(const ModelSpec& model, std::uint64_t seed) {
    return "runs/" + std::string(architecture_name(model.architecture)) + "-seed" + std::to_string(seed);
}

ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("", std::string("malformed YAML: ") + e.what());
    }
    if (!root || root.IsNull()) throw ConfigError("", "empty config");
    check_keys(root, "",
               {"architecture", "generators", "depth", "latent_dim", "h_dim", "seed", "output_dir", "eval_every",
                "eval_samples", "truncation", "mixture", "generator", "shared", "critic", "classifier", "gate", "train",
                "metrics"});

    ExperimentConfig cfg;
    ModelSpec& m = cfg.model;
    if (!root["architecture"]) throw ConfigError("architecture", "required");
    try {
        m.architecture = parse_architecture(read<std::string>(root["architecture"], "architecture"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("architecture", e.what());
    }

    const bool has_depth = static_cast<bool>(root["depth"]);
    const bool has_k = static_cast<bool>(root["generators"]);
    if (m.architecture == Architecture::HMoG) {
        if (has_depth) {
            m.depth = read_count(root["depth"], "depth", 1);
            if (m.depth > 20) throw ConfigError("depth", "must be <= 20");
            m.generators = std::size_t{1} << m.depth;
            if (has_k && read_count(root["generators"], "generators", 2) != m.generators) {
                throw ConfigError("generators", "depth " + std::to_string(m.depth) + " gives 2^" + std::to_string(m.depth) +
                                                    " = " + std::to_string(m.generators) + " leaves, but generators = " +
                                                    std::to_string(read<long long>(root["generators"], "generators")));
            }
        } else if (has_k) {
            m.generators = read_count(root["generators"], "generators", 2);
            if (!std::has_single_bit(m.generators)) {
                throw ConfigError("generators", "hmog needs a power of two (2^depth), got " + std::to_string(m.generators));
            }
            m.depth = static_cast<std::size_t>(std::countr_zero(m.generators));
        }
    } else {
        if (has_depth) throw ConfigError("depth", "only applies to architecture hmog");
        if (m.architecture == Architecture::FC) {
            if (has_k) throw ConfigError("generators", "fc has a single generator");
            m.generators = 1;
        } else if (has_k) {
            m.generators = read_count(root["generators"], "generators", 2);
        }
    }
    if (m.architecture != Architecture::FC) {
        static const std::set<std::size_t> usual{4, 8, 16, 32};
        if (!usual.count(m.generators)) {
            cfg.notices.push_back("notice: " + std::to_string(m.generators) +
                                  " generators is outside the usual set {4, 8, 16, 32}");
        }
    }

    if (root["latent_dim"]) m.latent_dim = read_count(root["latent_dim"], "latent_dim", 1);
    if (root["h_dim"]) m.h_dim = read_count(root["h_dim"], "h_dim", 1);

    if (root["generator"]) read_block(root["generator"], "generator", m.generator_hidden, &m.generator_activation);
    if (root["shared"]) read_block(root["shared"], "shared", m.shared_hidden, &m.shared_activation);
    if (root["critic"]) read_block(root["critic"], "critic", m.critic_hidden, &m.critic_activation);
    if (root["classifier"]) read_block(root["classifier"], "classifier", m.classifier_hidden, nullptr);
    if (const YAML::Node gate = root["gate"]) {
        check_keys(gate, "gate", {"hidden", "temperature"});
        if (gate["hidden"]) m.gate_hidden = read_sizes(gate["hidden"], "gate.hidden");
        if (gate["temperature"]) {
            m.temperature = read<double>(gate["temperature"], "gate.temperature");
            if (!(m.temperature > 0.0)) throw ConfigError("gate.temperature", "must be > 0");
        }
    }
    if (m.architecture == Architecture::MEGAN && m.generator_hidden.empty()) {
        throw ConfigError("generator.hidden", "megan needs at least one hidden layer (gate input)");
    }
    TrainConfig& t = cfg.train;
    t.loss_mode = default_loss(m.architecture);
    bool critic_steps_set = false;
    if (const YAML::Node tr = root["train"]) {
        check_keys(tr, "train",
                   {"loss", "learning_rate", "betas", "eps", "amsgrad", "batch_size", "critic_steps", "gp_lambda",
                    "clip_bound", "total_steps"});
        if (tr["loss"]) {
            try {
                t.loss_mode = parse_loss_mode(read<std::string>(tr["loss"], "train.loss"));
            } catch (const std::invalid_argument& e) {
                throw ConfigError("train.loss", e.what());
            }
        }
        if (tr["learning_rate"]) t.adam.learning_rate = read<double>(tr["learning_rate"], "train.learning_rate");
        if (tr["betas"]) {
            const auto b = read<std::vector<double>>(tr["betas"], "train.betas");
            if (b.size() != 2) throw ConfigError("train.betas", "expected two values");
            t.adam.beta1 = b[0];
            t.adam.beta2 = b[1];
        }
        if (tr["eps"]) t.adam.eps = read<double>(tr["eps"], "train.eps");
        if (tr["amsgrad"]) t.adam.amsgrad = read<bool>(tr["amsgrad"], "train.amsgrad");
        if (tr["batch_size"]) t.batch_size = read_count(tr["batch_size"], "train.batch_size", 2);
        if (tr["critic_steps"]) {
            t.critic_steps = read_count(tr["critic_steps"], "train.critic_steps", 1);
            critic_steps_set = true;
        }
        if (tr["gp_lambda"]) t.gp_lambda = read<double>(tr["gp_lambda"], "train.gp_lambda");
        if (tr["clip_bound"]) t.clip_bound = read<double>(tr["clip_bound"], "train.clip_bound");
        if (tr["total_steps"]) t.total_steps = read_count(tr["total_steps"], "train.total_steps", 0);
    }
    if (!critic_steps_set) t.critic_steps = is_wasserstein(t.loss_mode) ? 5 : 1;
    try {
        check_compatible(m.architecture, t.loss_mode);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("train.loss", e.what());
    }
    try {
        t.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("train", e.what());
    }

    if (root["seed"]) {
        const auto s = read<std::string>(root["seed"], "seed");
        try {
            std::size_t used = 0;
            t.seed = std::stoull(s, &used);
            if (used != s.size() || s.front() == '-') throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw ConfigError("seed", "expected a non-negative 64-bit integer, got '" + s + "'");
        }
    }
    if (root["eval_every"]) cfg.eval_every = read_count(root["eval_every"], "eval_every", 0);
    if (root["eval_samples"]) cfg.eval_samples = read_count(root["eval_samples"], "eval_samples", 10);
    if (root["truncation"]) {
        cfg.truncation = read<double>(root["truncation"], "truncation");
        if (!(cfg.truncation >= 0.0 && cfg.truncation < 1.0)) throw ConfigError("truncation", "must be in [0, 1)");
    }
    if (const YAML::Node mt = root["metrics"]) {
        check_keys(mt, "metrics", {"knn_k", "radius_sigmas", "min_share"});
        if (mt["knn_k"]) cfg.metrics.knn_k = read_count(mt["knn_k"], "metrics.knn_k", 1);
        if (mt["radius_sigmas"]) cfg.metrics.radius_sigmas = read<double>(mt["radius_sigmas"], "metrics.radius_sigmas");
        if (mt["min_share"]) cfg.metrics.min_share = read<double>(mt["min_share"], "metrics.min_share");
        if (!(cfg.metrics.radius_sigmas > 0.0)) throw ConfigError("metrics.radius_sigmas", "must be > 0");
        if (!(cfg.metrics.min_share > 0.0 && cfg.metrics.min_share < 1.0)) {
            throw ConfigError("metrics.min_share", "must be in (0, 1)");
        }
    }
    if (cfg.metrics.knn_k >= 2 * cfg.eval_samples) throw ConfigError("metrics.knn_k", "must be < 2 * eval_samples");

    if (const YAML::Node mix = root["mixture"]) {
        try {
            if (mix.IsScalar()) {
                std::filesystem::path p = mix.as<std::string>();
                if (p.is_relative()) p = base_dir / p;
                cfg.mixture = load_mixture_spec(p);
            } else {
                cfg.mixture = parse_mixture_spec(YAML::Dump(mix));
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("mixture", e.what());
        }
    }

    cfg.output_dir = root["output_dir"] ? read<std::string>(root["output_dir"], "output_dir")
                                        : default_output_dir(m, t.seed);
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

std::string config_to_yaml(const ExperimentConfig& cfg) {
    const ModelSpec& m = cfg.model;
    const TrainConfig& t = cfg.train;
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    auto sizes = [&](const std::vector<std::size_t>& v) {
        out << YAML::Flow << YAML::BeginSeq;
        for (auto s : v) out << s;
        out << YAML::EndSeq;
    };
    out << YAML::BeginMap;
    out << YAML::Key << "architecture" << YAML::Value << std::string(architecture_name(m.architecture));
    if (m.architecture == Architecture::HMoG) out << YAML::Key << "depth" << YAML::Value << m.depth;
    if (m.architecture != Architecture::FC) out << YAML::Key << "generators" << YAML::Value << m.generators;
    out << YAML::Key << "latent_dim" << YAML::Value << m.latent_dim;
    out << YAML::Key << "h_dim" << YAML::Value << m.h_dim;
    out << YAML::Key << "seed" << YAML::Value << std::to_string(t.seed);
    out << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir;
    out << YAML::Key << "eval_every" << YAML::Value << cfg.eval_every;
    out << YAML::Key << "eval_samples" << YAML::Value << cfg.eval_samples;
    out << YAML::Key << "truncation" << YAML::Value << cfg.truncation;

    out << YAML::Key << "generator" << YAML::Value << YAML::BeginMap << YAML::Key << "hidden" << YAML::Value;
    sizes(m.generator_hidden);
    out << YAML::Key << "activation" << YAML::Value << std::string(activation_name(m.generator_activation))
        << YAML::EndMap;
    out << YAML::Key << "shared" << YAML::Value << YAML::BeginMap << YAML::Key << "hidden" << YAML::Value;
    sizes(m.shared_hidden);
    out << YAML::Key << "activation" << YAML::Value << std::string(activation_name(m.shared_activation)) << YAML::EndMap;
    out << YAML::Key << "critic" << YAML::Value << YAML::BeginMap << YAML::Key << "hidden" << YAML::Value;
    sizes(m.critic_hidden);
    out << YAML::Key << "activation" << YAML::Value << std::string(activation_name(m.critic_activation)) << YAML::EndMap;
    out << YAML::Key << "classifier" << YAML::Value << YAML::BeginMap << YAML::Key << "hidden" << YAML::Value;
    sizes(m.classifier_hidden);
    out << YAML::EndMap;
    out << YAML::Key << "gate" << YAML::Value << YAML::BeginMap << YAML::Key << "hidden" << YAML::Value;
    sizes(m.gate_hidden);
    out << YAML::Key << "temperature" << YAML::Value << m.temperature << YAML::EndMap;

    out << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "loss" << YAML::Value << std::string(loss_mode_name(t.loss_mode));
    out << YAML::Key << "learning_rate" << YAML::Value << t.adam.learning_rate;
    out << YAML::Key << "betas" << YAML::Value << YAML::Flow << std::vector<double>{t.adam.beta1, t.adam.beta2};
    out << YAML::Key << "eps" << YAML::Value << t.adam.eps;
    out << YAML::Key << "amsgrad" << YAML::Value << t.adam.amsgrad;
    out << YAML::Key << "batch_size" << YAML::Value << t.batch_size;
    out << YAML::Key << "critic_steps" << YAML::Value << t.critic_steps;
    out << YAML::Key << "gp_lambda" << YAML::Value << t.gp_lambda;
    out << YAML::Key << "clip_bound" << YAML::Value << t.clip_bound;
    out << YAML::Key << "total_steps" << YAML::Value << t.total_steps;
    out << YAML::EndMap;

    out << YAML::Key << "metrics" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "knn_k" << YAML::Value << cfg.metrics.knn_k;
    out << YAML::Key << "radius_sigmas" << YAML::Value << cfg.metrics.radius_sigmas;
    out << YAML::Key << "min_share" << YAML::Value << cfg.metrics.min_share;
    out << YAML::EndMap;

    out << YAML::Key << "mixture" << YAML::Value << YAML::Load(mixture_spec_to_yaml(cfg.mixture));
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace hmog
