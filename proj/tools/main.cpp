#include <CLI11.hpp>

#include <iostream>
#include <mutex>
#include <thread>

#include "hmog/runner.hpp"

namespace fs = std::filesystem;

namespace {

int run_command(const fs::path& config_path, const std::vector<std::uint64_t>& seeds,
                const std::optional<fs::path>& out, std::size_t jobs) {
    hmog::ExperimentConfig base;
    try {
        base = hmog::parse_config(config_path);
    } catch (const hmog::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return hmog::kExitConfig;
    }
    if (seeds.size() <= 1) {
        if (!seeds.empty()) {
            const bool default_dir = base.output_dir == hmog::default_output_dir(base.model, base.train.seed);
            base.train.seed = seeds.front();
            if (default_dir) base.output_dir = hmog::default_output_dir(base.model, base.train.seed);
        }
        const fs::path dir = hmog::resolve_run_dir(base, out);
        std::cout << "run directory: " << dir.string() << std::endl;
        return hmog::run_experiment(base, dir, std::cout, std::cerr);
    }

    // one isolated worker per seed, at most `jobs` at a time
    std::mutex io;
    std::vector<int> codes(seeds.size(), hmog::kExitOk);
    std::size_t next = 0;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(io);
                if (next == seeds.size()) return;
                i = next++;
            }
            hmog::ExperimentConfig cfg = base;
            cfg.train.seed = seeds[i];
            const fs::path dir = hmog::resolve_run_dir(cfg, out) / ("seed" + std::to_string(seeds[i]));
            std::ostringstream log, err;
            codes[i] = hmog::run_experiment(cfg, dir, log, err);
            std::lock_guard lock(io);
            std::cout << "== " << dir.string() << '\n' << log.str();
            std::cerr << err.str();
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < std::max<std::size_t>(1, std::min(jobs, seeds.size())); ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (int c : codes)
        if (c != hmog::kExitOk) return c;
    return hmog::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical mixture-of-generators GAN experiments"};
    app.require_subcommand(1);

    fs::path config_path;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    std::size_t jobs = 1;
    auto* run = app.add_subcommand("run", "Train and evaluate one experiment");
    run->add_option("config", config_path, "Experiment config (YAML)")->required();
    run->add_option("--seed", seeds, "Seed override; repeat for several independent runs");
    run->add_option("--out", out_dir, "Output directory (default: output_dir from the config)");
    run->add_option("--jobs", jobs, "Worker threads when several seeds are given")->check(CLI::PositiveNumber);

    fs::path eval_dir;
    auto* eval = app.add_subcommand("eval", "Recompute final metrics from a run directory");
    eval->add_option("run-dir", eval_dir)->required();

    fs::path plot_dir;
    auto* plot = app.add_subcommand("plot", "Write SVG plots for a run directory");
    plot->add_option("run-dir", plot_dir)->required();

    std::vector<fs::path> compare_dirs;
    auto* compare = app.add_subcommand("compare", "Table of final metrics for several runs");
    compare->add_option("run-dirs", compare_dirs)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : hmog::kExitConfig;
    }

    try {
        if (*run) {
            return run_command(config_path, seeds, out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir),
                               jobs);
        }
        if (*eval) {
            hmog::evaluate_run(eval_dir, std::cout);
            return hmog::kExitOk;
        }
        if (*plot) {
            for (const auto& p : hmog::emit_plots(plot_dir)) std::cout << p.string() << '\n';
            return hmog::kExitOk;
        }
        if (*compare) {
            std::cout << hmog::compare_runs(compare_dirs);
            return hmog::kExitOk;
        }
    } catch (const hmog::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return hmog::kExitConfig;
    } catch (const hmog::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n' << e.diagnostics();
        return hmog::kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return hmog::kExitConfig;
    }
    return hmog::kExitOk;
}
