#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmog/data.hpp"
#include "hmog/generators.hpp"
#include "hmog/metrics.hpp"
#include "hmog/train.hpp"

namespace hmog {

/// Invalid configuration; `key()` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct ExperimentConfig {
    ModelSpec model;
    TrainConfig train;
    GaussianMixtureSpec mixture = default_five_gaussians();
    std::size_t eval_every = 1000;
    std::size_t eval_samples = 2000;
    double truncation = 0.25;
    MetricOptions metrics;
    std::string output_dir;
    /// Non-fatal remarks produced while resolving (e.g. unusual K).
    std::vector<std::string> notices;
};

/// Parses YAML text. Relative mixture paths resolve against `base_dir`.
ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".");
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Fully resolved config (every default written out, mixture inline); parses
/// back to an equal config.
std::string config_to_yaml(const ExperimentConfig& cfg);

/// Default output directory name: "runs/<architecture>-seed<seed>".
std::string default_output_dir(const ModelSpec& model, std::uint64_t seed);

}  // namespace hmog
