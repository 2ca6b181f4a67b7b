#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hmog/config.hpp"
#include "hmog/metrics.hpp"
#include "hmog/train.hpp"

namespace hmog {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2 };

/// Rng streams derived from the experiment seed.
Rng init_stream(std::uint64_t seed);
Rng eval_stream(std::uint64_t seed, std::size_t step);

/// Fresh models for a config (initialized from the init stream).
ModelBundle build_models(const ExperimentConfig& cfg);

/// Parameters counted in the manifest: generator parameters without the
/// shared block.
std::size_t reported_parameter_count(ModelBundle& m);

struct EvalSnapshot {
    MetricReport report;
    Tensor real;
    Tensor fake;
    std::vector<std::size_t> component;
};

/// eval_samples real draws vs eval_samples generated from truncated latents,
/// all from the evaluation stream of `step`.
EvalSnapshot evaluate_model(ModelBundle& m, const ExperimentConfig& cfg, std::size_t step);

/// Output directory: `out` if given, else cfg.output_dir; relative paths are
/// placed under $HMOG_OUTPUT_ROOT when set.
std::filesystem::path resolve_run_dir(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out);

/// Trains, evaluates and writes every artifact into run_dir. Returns an
/// ExitCode; numerical failures are reported on `err` and in failure.txt.
int run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& run_dir, std::ostream& log,
                   std::ostream& err);

/// Reloads config + checkpoint and recomputes the final metrics.
MetricReport evaluate_run(const std::filesystem::path& run_dir, std::ostream& log);

/// Writes scatter.svg, and for tree/mixture models corr.svg (and tree.svg for hmog).
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& run_dir);

/// Table of the final metrics row of each run.
std::string compare_runs(const std::vector<std::filesystem::path>& run_dirs);

}  // namespace hmog
