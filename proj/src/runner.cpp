#include "hmog/runner.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "hmog/checkpoint.hpp"
#include "hmog/interpret.hpp"
#include "hmog/io.hpp"
#include "hmog/svg.hpp"

namespace hmog {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kEvalStreamBase = std::uint64_t{1} << 32;
constexpr std::size_t kInterpretDraws = 10000;
constexpr std::size_t kExemplars = 5;

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

std::string metrics_row(std::size_t step, const MetricReport& r) {
    return csv_line({std::to_string(step), format_double(r.frechet), format_double(r.knn.real_acc),
                     format_double(r.knn.fake_acc), std::to_string(r.coverage.modes_covered)});
}

std::string samples_csv(const EvalSnapshot& s) {
    std::string out = csv_line({"source", "x0", "x1", "component"});
    for (std::size_t t = 0; t < s.real.rows(); ++t)
        out += csv_line({"real", format_double(s.real(t, 0)), format_double(s.real(t, 1)), ""});
    for (std::size_t t = 0; t < s.fake.rows(); ++t) {
        out += csv_line({"fake", format_double(s.fake(t, 0)), format_double(s.fake(t, 1)), std::to_string(s.component[t])});
    }
    return out;
}

struct LoadedRun {
    ExperimentConfig cfg;
    ModelBundle models;
    std::size_t steps = 0;
};

LoadedRun load_run(const fs::path& run_dir) {
    const fs::path checkpoint = run_dir / "checkpoint.txt";
    if (!fs::exists(checkpoint)) throw std::runtime_error("missing checkpoint: " + checkpoint.string());
    LoadedRun run{parse_config(run_dir / "config.yaml"), {}, 0};
    run.models = build_models(run.cfg);
    load_checkpoint(checkpoint, run.models.all_parameters());
    const auto manifest = nlohmann::json::parse(read_text_file(run_dir / "manifest.json"));
    run.steps = manifest.at("steps_completed").get<std::size_t>();
    return run;
}

}  // namespace

Rng init_stream(std::uint64_t seed) { return Rng(seed).split(1); }
Rng eval_stream(std::uint64_t seed, std::size_t step) { return Rng(seed).split(kEvalStreamBase + step); }

ModelBundle build_models(const ExperimentConfig& cfg) {
    Rng rng = init_stream(cfg.train.seed);
    return make_models(cfg.model, cfg.train.loss_mode, rng);
}

std::size_t reported_parameter_count(ModelBundle& m) { return parameter_count(m.generator->own_parameters()); }

EvalSnapshot evaluate_model(ModelBundle& m, const ExperimentConfig& cfg, std::size_t step) {
    Rng rng = eval_stream(cfg.train.seed, step);
    EvalSnapshot s;
    s.real = sample_mixture(cfg.mixture, cfg.eval_samples, rng);
    const auto draws = static_cast<std::size_t>(
        std::ceil(static_cast<double>(cfg.eval_samples) / (1.0 - cfg.truncation)));
    Tensor z = truncate_latents(sample_latent({cfg.model.latent_dim}, draws, rng), cfg.truncation);
    std::vector<std::size_t> keep(cfg.eval_samples);
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    z = z.gather_rows(keep);
    Graph g;
    Graph::NoGradGuard guard(g);
    Generated gen = m.generator->generate(g, g.constant(z), rng);
    s.fake = gen.x.value();
    s.component = std::move(gen.component);
    if (!s.fake.all_finite()) throw NumericalError("non-finite generated samples at evaluation", "step=" + std::to_string(step));
    s.report = evaluate_samples(s.real, s.fake, cfg.mixture, cfg.metrics);
    return s;
}

fs::path resolve_run_dir(const ExperimentConfig& cfg, const std::optional<fs::path>& out) {
    fs::path dir = out ? *out : fs::path(cfg.output_dir);
    if (dir.is_relative()) {
        if (const char* root = std::getenv("HMOG_OUTPUT_ROOT"); root && *root) dir = fs::path(root) / dir;
    }
    return dir;
}

int run_experiment(const ExperimentConfig& cfg, const fs::path& run_dir, std::ostream& log, std::ostream& err) {
    fs::create_directories(run_dir);
    for (const auto& n : cfg.notices) err << n << '\n';

    ModelBundle models = build_models(cfg);
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["architecture"] = architecture_name(cfg.model.architecture);
    manifest["seed"] = cfg.train.seed;
    manifest["rng"] = Rng::kName;
    manifest["started_at"] = utc_now();
    manifest["parameter_count"] = reported_parameter_count(models);
    manifest["shared_parameter_count"] = parameter_count(models.generator->shared_parameters());
    manifest["critic_parameter_count"] = parameter_count(models.critic.parameters());
    manifest["classifier_parameter_count"] =
        models.classifier ? parameter_count(models.classifier->parameters()) : std::size_t{0};
    manifest["config"] = config_to_yaml(cfg);
    manifest["notices"] = cfg.notices;

    ExperimentConfig echoed = cfg;
    echoed.output_dir = run_dir.string();
    write_text_file(run_dir / "config.yaml", config_to_yaml(echoed));
    write_text_file(run_dir / "mixture.yaml", mixture_spec_to_yaml(cfg.mixture) + "\n");

    std::string train_log = csv_line({"step", "d_loss", "g_loss", "gp_term", "wall_ms"});
    std::string metrics = csv_line({"step", "frechet", "knn_real", "knn_fake", "modes_covered"});
    std::optional<EvalSnapshot> last;

    auto finish = [&](const std::string& status) {
        manifest["status"] = status;
        manifest["finished_at"] = utc_now();
        write_text_file(run_dir / "train_log.csv", train_log);
        write_text_file(run_dir / "metrics.csv", metrics);
        write_text_file(run_dir / "manifest.json", manifest.dump(2) + "\n");
    };

    Trainer trainer(models, [&](std::size_t n, Rng& r) { return sample_mixture(cfg.mixture, n, r); }, cfg.train);
    TrainCallbacks cb;
    cb.eval_every = cfg.eval_every;
    cb.on_step = [&](const StepLog& s) {
        train_log += csv_line({std::to_string(s.step), format_double(s.d_loss), format_double(s.g_loss),
                               format_double(s.gp_term), format_double(s.wall_ms)});
    };
    cb.on_eval = [&](std::size_t step) {
        last = evaluate_model(models, cfg, step);
        metrics += metrics_row(step, last->report);
        write_text_file(run_dir / "metrics.csv", metrics);
        log << "step " << step << "  frechet " << format_double(last->report.frechet) << "  5nn real/fake "
            << format_double(last->report.knn.real_acc) << '/' << format_double(last->report.knn.fake_acc)
            << "  modes " << last->report.coverage.modes_covered << '/' << cfg.mixture.size() << std::endl;
    };
    try {
        trainer.train(cb);
    } catch (const NumericalError& e) {
        manifest["steps_completed"] = trainer.steps_done();
        write_text_file(run_dir / "failure.txt", std::string(e.what()) + "\n" + e.diagnostics());
        finish("numerical-failure");
        err << "numerical failure: " << e.what() << '\n' << e.diagnostics();
        return kExitNumerical;
    }
    manifest["steps_completed"] = trainer.steps_done();

    save_checkpoint(run_dir / "checkpoint.txt", models.all_parameters());
    if (!last) last = evaluate_model(models, cfg, trainer.steps_done());
    write_text_file(run_dir / "samples.csv", samples_csv(*last));
    finish("ok");
    emit_plots(run_dir);
    return kExitOk;
}

MetricReport evaluate_run(const fs::path& run_dir, std::ostream& log) {
    LoadedRun run = load_run(run_dir);
    const EvalSnapshot s = evaluate_model(run.models, run.cfg, run.steps);
    log << "step,frechet,knn_real,knn_fake,knn_overall,modes_covered\n"
        << run.steps << ',' << format_double(s.report.frechet) << ',' << format_double(s.report.knn.real_acc) << ','
        << format_double(s.report.knn.fake_acc) << ',' << format_double(s.report.knn.overall) << ','
        << s.report.coverage.modes_covered << '\n';
    return s.report;
}

std::vector<fs::path> emit_plots(const fs::path& run_dir) {
    LoadedRun run = load_run(run_dir);
    const fs::path samples_path = run_dir / "samples.csv";
    if (!fs::exists(samples_path)) throw std::runtime_error("missing samples: " + samples_path.string());
    const CsvTable samples = read_csv(samples_path);
    std::vector<double> real, fake;
    std::vector<std::size_t> component;
    const std::size_t src = samples.column("source");
    for (std::size_t r = 0; r < samples.rows.size(); ++r) {
        auto& dst = samples.rows[r][src] == "real" ? real : fake;
        dst.push_back(samples.number(r, "x0"));
        dst.push_back(samples.number(r, "x1"));
        if (samples.rows[r][src] != "real") component.push_back(static_cast<std::size_t>(samples.number(r, "component")));
    }
    std::vector<fs::path> written;
    const std::size_t k = run.models.generator->component_count();
    write_text_file(run_dir / "scatter.svg", scatter_svg(Tensor({real.size() / 2, 2}, real),
                                                         Tensor({fake.size() / 2, 2}, fake), component, k));
    written.push_back(run_dir / "scatter.svg");

    Rng rng = eval_stream(run.cfg.train.seed, run.steps).split(7);
    const Tensor z = sample_latent({run.cfg.model.latent_dim}, kInterpretDraws, rng);
    if (auto* h = dynamic_cast<HmogGenerator*>(run.models.generator.get())) {
        write_text_file(run_dir / "corr.svg", corr_svg(gating_correlation(h->tree(), z)));
        const auto means = node_average_response(h->tree(), h->shared(), z);
        const auto ex = top_leaf_exemplars(h->tree(), h->shared(), z, kExemplars);
        write_text_file(run_dir / "tree.svg", tree_svg(means, ex));
        written.push_back(run_dir / "corr.svg");
        written.push_back(run_dir / "tree.svg");
    } else if (auto* mog = dynamic_cast<MogGenerator*>(run.models.generator.get())) {
        Graph g;
        Graph::NoGradGuard guard(g);
        const Tensor p = mog->mixture().gate_probabilities(g, g.constant(z)).value();
        write_text_file(run_dir / "corr.svg", corr_svg(responsibility_correlation(p)));
        written.push_back(run_dir / "corr.svg");
    }
    return written;
}

std::string compare_runs(const std::vector<fs::path>& run_dirs) {
    std::ostringstream s;
    s << std::left << std::setw(40) << "run" << std::right << std::setw(8) << "step" << std::setw(12) << "frechet"
      << std::setw(10) << "5nn_real" << std::setw(10) << "5nn_fake" << std::setw(8) << "modes" << '\n';
    for (const auto& dir : run_dirs) {
        const CsvTable t = read_csv(dir / "metrics.csv");
        s << std::left << std::setw(40) << dir.string() << std::right;
        if (t.rows.empty()) {
            s << std::setw(8) << "-" << std::setw(12) << "-" << std::setw(10) << "-" << std::setw(10) << "-"
              << std::setw(8) << "-" << '\n';
            continue;
        }
        const std::size_t r = t.rows.size() - 1;
        s << std::setw(8) << t.rows[r][t.column("step")] << std::fixed << std::setprecision(4) << std::setw(12)
          << t.number(r, "frechet") << std::setw(10) << t.number(r, "knn_real") << std::setw(10)
          << t.number(r, "knn_fake") << std::setw(8) << t.rows[r][t.column("modes_covered")] << '\n';
        s.unsetf(std::ios::fixed);
    }
    return s.str();
}

}  // namespace hmog
