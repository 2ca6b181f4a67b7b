#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>

#include "hmog/checkpoint.hpp"
#include "hmog/config.hpp"
#include "hmog/io.hpp"
#include "hmog/runner.hpp"
#include "hmog/svg.hpp"

using namespace hmog;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hmog_test_" + name);
    fs::remove_all(p);
    return p;
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

std::string config_key(const std::string& yaml) {
    try {
        parse_config_text(yaml);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<none>";
}

const char* kSmallRun = R"(architecture: hmog
depth: 3
seed: 11
eval_every: 3
eval_samples: 200
critic:
  hidden: [8, 8]
train:
  batch_size: 16
  critic_steps: 2
  total_steps: 6
)";

}  // namespace

TEST_CASE("config defaults follow the training protocol") {
    ExperimentConfig cfg = parse_config_text("architecture: hmog\ndepth: 3\n");
    CHECK(cfg.model.generators == 8);
    CHECK(cfg.train.batch_size == 128);
    CHECK(cfg.train.adam.learning_rate == 1e-4);
    CHECK(cfg.train.adam.beta1 == 0.5);
    CHECK(cfg.train.adam.beta2 == 0.999);
    CHECK(cfg.train.adam.amsgrad);
    CHECK(cfg.train.loss_mode == LossMode::WganGp);
    CHECK(cfg.train.critic_steps == 5);
    CHECK(cfg.train.gp_lambda == 10.0);
    CHECK(cfg.model.latent_dim == 2);
    CHECK(cfg.truncation == 0.25);
    CHECK(cfg.output_dir == "runs/hmog-seed0");
    CHECK(cfg.notices.empty());

    CHECK(parse_config_text("architecture: hmog\ngenerators: 16\n").model.depth == 4);
    CHECK(parse_config_text("architecture: madgan\n").train.loss_mode == LossMode::Madgan);
    CHECK(parse_config_text("architecture: madgan\n").train.critic_steps == 1);
    CHECK(parse_config_text("architecture: megan\n").train.loss_mode == LossMode::Megan);
    CHECK(parse_config_text("architecture: mog\ngenerators: 6\n").notices.size() == 1);
}

TEST_CASE("config errors name the offending key") {
    CHECK(config_key("architecture: hmog\ndepth: 3\ngenerators: 7\n") == "generators");
    CHECK(config_key("architecture: hmog\nlearning_rate: 1\n") == "learning_rate");
    CHECK(config_key("architecture: hmog\ntrain:\n  lr: 1\n") == "train.lr");
    CHECK(config_key("architecture: hmog\ntrain:\n  batch_size: 1\n") == "train.batch_size");
    CHECK(config_key("architecture: hmog\ntrain:\n  loss: madgan\n") == "train.loss");
    CHECK(config_key("architecture: gan\n") == "architecture");
    CHECK(config_key("depth: 3\n") == "architecture");
    CHECK(config_key("architecture: mog\ndepth: 3\n") == "depth");
    CHECK(config_key("architecture: fc\ngenerators: 4\n") == "generators");
    CHECK(config_key("architecture: hmog\nseed: -4\n") == "seed");
    CHECK(config_key("architecture: hmog\ntruncation: 1.5\n") == "truncation");
    CHECK(config_key("architecture: hmog\ncritic:\n  activation: swish\n") == "critic.activation");
    CHECK(config_key("architecture: megan\ngate:\n  temperature: 0\n") == "gate.temperature");
    CHECK(config_key("architecture: hmog\nmixture: /nonexistent.yaml\n") == "mixture");
    CHECK_THROWS_AS(parse_config("/nonexistent/config.yaml"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("architecture: [unclosed\n"), ConfigError);
}

TEST_CASE("config echo parses back to the same config") {
    const char* text = R"(architecture: megan
generators: 4
seed: 18446744073709551615
gate:
  hidden: [7]
  temperature: 0.3
shared:
  hidden: [5]
  activation: softplus
train:
  learning_rate: 0.00031
  betas: [0.4, 0.95]
metrics:
  knn_k: 3
mixture:
  components:
    - mean: [0.1, 0.2]
      covariance: [[1, 0], [0, 1]]
      weight: 1
)";
    const ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.train.seed == 18446744073709551615ull);
    const std::string echo = config_to_yaml(cfg);
    const ExperimentConfig back = parse_config_text(echo);
    CHECK(config_to_yaml(back) == echo);
    CHECK(back.model.temperature == 0.3);
    CHECK(back.train.adam.learning_rate == 0.00031);
    CHECK(back.mixture.components.at(0).mean == Vec2{0.1, 0.2});
}

TEST_CASE("doubles and csv round-trip exactly") {
    for (double v : {0.0, -0.0, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.1 + 0.2})
        CHECK(parse_double(format_double(v)) == v);
    CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_double(""), std::invalid_argument);

    const fs::path dir = scratch("csv");
    fs::create_directories(dir);
    std::string text = csv_line({"step", "value"});
    Rng rng(1);
    std::vector<double> values;
    for (int i = 0; i < 20; ++i) {
        values.push_back(rng.normal() * std::pow(10.0, rng.uniform_index(20)));
        text += csv_line({std::to_string(i), format_double(values.back())});
    }
    write_text_file(dir / "t.csv", text);
    const CsvTable t = read_csv(dir / "t.csv");
    REQUIRE(t.rows.size() == 20);
    for (std::size_t i = 0; i < 20; ++i) CHECK(t.number(i, "value") == values[i]);
    CHECK_THROWS(t.column("missing"));
    fs::remove_all(dir);
}

TEST_CASE("checkpoints round-trip and reject mismatches") {
    Rng rng(2);
    ModelSpec spec;
    ModelBundle a = make_models(spec, LossMode::WganGp, rng);
    ModelBundle b = make_models(spec, LossMode::WganGp, rng);
    const std::string text = checkpoint_text(a.all_parameters());
    restore_checkpoint_text(text, b.all_parameters());
    const auto pa = a.all_parameters(), pb = b.all_parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
    CHECK(checkpoint_text(pb) == text);

    CHECK_THROWS(restore_checkpoint_text("not a checkpoint\n", pb));
    std::vector<Parameter*> fewer(pb.begin(), pb.end() - 1);
    CHECK_THROWS(restore_checkpoint_text(text, fewer));
    Parameter extra{"extra", Tensor({2}, 0.0)};
    std::vector<Parameter*> more = pb;
    more.push_back(&extra);
    CHECK_THROWS(restore_checkpoint_text(text, more));
    Parameter wrong{pb[0]->name, Tensor({9, 9})};
    std::vector<Parameter*> reshaped = pb;
    reshaped[0] = &wrong;
    CHECK_THROWS(restore_checkpoint_text(text, reshaped));

    const fs::path dir = scratch("ckpt");
    fs::create_directories(dir);
    save_checkpoint(dir / "c.txt", pa);
    load_checkpoint(dir / "c.txt", pb);
    CHECK_THROWS(load_checkpoint(dir / "missing.txt", pb));
    fs::remove_all(dir);
}

TEST_CASE("svg element counts") {
    Rng rng(3);
    Tensor real({20, 2}), fake({40, 2});
    for (auto& v : real.data()) v = rng.normal();
    for (auto& v : fake.data()) v = rng.normal();
    std::vector<std::size_t> comp(40);
    for (std::size_t i = 0; i < 40; ++i) comp[i] = i % 8;
    const std::string scatter = scatter_svg(real, fake, comp, 8);
    CHECK(count(scatter, "class=\"legend-entry\"") == 8);
    std::set<std::string> colors;
    for (std::size_t i = 0; i < 8; ++i) colors.insert(palette_color(i, 8));
    CHECK(colors.size() == 8);

    Tensor corr({8, 8}, 0.5);
    CHECK(count(corr_svg(corr), "class=\"cell\"") == 64);

    std::vector<std::optional<std::vector<double>>> means(15, std::vector<double>{0.5, -1.0});
    means[4].reset();
    std::vector<std::vector<Exemplar>> ex(8, std::vector<Exemplar>(5, Exemplar{0, 0.9, {1.0, 2.0}}));
    const std::string tree = tree_svg(means, ex);
    CHECK(count(tree, "class=\"node\"") == 15);
    CHECK(count(tree, "class=\"exemplar\"") == 40);
}

TEST_CASE("zero-step run writes a manifest and an empty metrics table") {
    const fs::path dir = scratch("zero");
    ExperimentConfig cfg = parse_config_text("architecture: mog\ngenerators: 4\ntrain:\n  total_steps: 0\n");
    std::ostringstream log, err;
    CHECK(run_experiment(cfg, dir, log, err) == kExitOk);
    for (const char* f : {"config.yaml", "manifest.json", "metrics.csv", "train_log.csv", "checkpoint.txt", "samples.csv"})
        CHECK(fs::exists(dir / f));
    const CsvTable metrics = read_csv(dir / "metrics.csv");
    CHECK(metrics.rows.empty());
    CHECK(metrics.header == std::vector<std::string>{"step", "frechet", "knn_real", "knn_fake", "modes_covered"});
    const CsvTable train = read_csv(dir / "train_log.csv");
    CHECK(train.header == std::vector<std::string>{"step", "d_loss", "g_loss", "gp_term", "wall_ms"});
    const auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
    CHECK(manifest["status"] == "ok");
    CHECK(manifest["steps_completed"] == 0);
    fs::remove_all(dir);
}

TEST_CASE("identical config and seed give byte-identical metrics") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const ExperimentConfig cfg = parse_config_text(kSmallRun);
    std::ostringstream log, err;
    REQUIRE(run_experiment(cfg, a, log, err) == kExitOk);
    REQUIRE(run_experiment(cfg, b, log, err) == kExitOk);
    const std::string ma = read_text_file(a / "metrics.csv");
    CHECK(ma == read_text_file(b / "metrics.csv"));
    CHECK(read_text_file(a / "samples.csv") == read_text_file(b / "samples.csv"));
    CHECK(read_text_file(a / "checkpoint.txt") == read_text_file(b / "checkpoint.txt"));

    const CsvTable t = read_csv(a / "metrics.csv");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.number(0, "step") == 3);
    CHECK(t.number(1, "step") == 6);

    // The final metrics row is reproduced from the checkpoint.
    std::ostringstream elog;
    const MetricReport r = evaluate_run(a, elog);
    CHECK(r.frechet == t.number(1, "frechet"));
    CHECK(r.knn.real_acc == t.number(1, "knn_real"));
    CHECK(static_cast<double>(r.coverage.modes_covered) == t.number(1, "modes_covered"));

    ExperimentConfig other = cfg;
    other.train.seed = 12;
    const fs::path c = scratch("det_c");
    REQUIRE(run_experiment(other, c, log, err) == kExitOk);
    CHECK(ma != read_text_file(c / "metrics.csv"));

    const std::string table = compare_runs({a, c});
    CHECK(count(table, "\n") >= 3);
    for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("manifest parameter count excludes the shared block") {
    const fs::path dir = scratch("manifest");
    ExperimentConfig cfg = parse_config_text(R"(architecture: mgan
generators: 4
shared:
  hidden: [6]
train:
  total_steps: 1
  batch_size: 8
eval_samples: 50
)");
    std::ostringstream log, err;
    REQUIRE(run_experiment(cfg, dir, log, err) == kExitOk);
    ModelBundle m = build_models(cfg);
    std::size_t own = 0;
    for (Parameter* p : m.generator->own_parameters()) own += p->value.size();
    const auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
    CHECK(manifest["parameter_count"] == own);
    CHECK(reported_parameter_count(m) == own);
    CHECK(own < parameter_count(m.generator->parameters()));
    CHECK(manifest["architecture"] == "mgan");
    CHECK(manifest["version"] == kVersion);
    fs::remove_all(dir);
}

TEST_CASE("plots for a trained tree") {
    const fs::path dir = scratch("plots");
    const ExperimentConfig cfg = parse_config_text(kSmallRun);
    std::ostringstream log, err;
    REQUIRE(run_experiment(cfg, dir, log, err) == kExitOk);
    fs::remove(dir / "scatter.svg");
    const auto files = emit_plots(dir);
    CHECK(files.size() == 3);
    CHECK(count(read_text_file(dir / "scatter.svg"), "class=\"legend-entry\"") == 8);
    CHECK(count(read_text_file(dir / "corr.svg"), "class=\"cell\"") == 64);
    CHECK(count(read_text_file(dir / "tree.svg"), "class=\"node\"") == 15);
    fs::remove(dir / "checkpoint.txt");
    CHECK_THROWS(emit_plots(dir));
    fs::remove_all(dir);
}

TEST_CASE("non-finite training aborts with exit code 2 and a diagnostic dump") {
    const fs::path dir = scratch("nan");
    ExperimentConfig cfg = parse_config_text(kSmallRun);
    // An unbounded critic pushed by an absurd step size overflows on the next pass.
    cfg.model.critic_activation = Activation::Softplus;
    cfg.train.adam.learning_rate = 1e300;
    std::ostringstream log, err;
    CHECK(run_experiment(cfg, dir, log, err) == kExitNumerical);
    CHECK(fs::exists(dir / "failure.txt"));
    CHECK(read_text_file(dir / "failure.txt").find("real:") != std::string::npos);
    CHECK_FALSE(err.str().empty());
    fs::remove_all(dir);
}

TEST_CASE("output root override") {
    ExperimentConfig cfg = parse_config_text("architecture: fc\nseed: 5\n");
    const fs::path root = scratch("root");
    ::setenv("HMOG_OUTPUT_ROOT", root.c_str(), 1);
    CHECK(resolve_run_dir(cfg, std::nullopt) == root / "runs/fc-seed5");
    CHECK(resolve_run_dir(cfg, fs::path("/abs/dir")) == fs::path("/abs/dir"));
    ::unsetenv("HMOG_OUTPUT_ROOT");
    CHECK(resolve_run_dir(cfg, std::nullopt) == fs::path("runs/fc-seed5"));
}

TEST_CASE("rng streams are distinct and reproducible") {
    CHECK(init_stream(4).next_u64() == Rng(4).split(1).next_u64());
    Rng e1 = eval_stream(4, 1000), e2 = eval_stream(4, 1000), e3 = eval_stream(4, 2000);
    const auto v = e1.next_u64();
    CHECK(v == e2.next_u64());
    CHECK(v != e3.next_u64());
    CHECK(v != Rng(4).split(2).next_u64());
}

TEST_CASE("shipped configs parse") {
    const fs::path dir = fs::path(HMOG_SOURCE_DIR) / "configs";
    std::set<std::string> seen;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string stem = entry.path().stem().string();
        if (stem == "five_gaussians") continue;
        INFO(stem);
        const ExperimentConfig cfg = parse_config(entry.path());
        CHECK(parse_config_text(config_to_yaml(cfg)).train.total_steps == cfg.train.total_steps);
        CHECK(cfg.mixture.size() == 5);
        seen.insert(stem);
    }
    CHECK(seen == std::set<std::string>{"fc", "hmog", "madgan", "megan", "mgan", "mog", "toy_hmog", "toy_mog"});
    const ExperimentConfig toy = parse_config(dir / "toy_hmog.yaml");
    CHECK(toy.model.generators == 8);
    CHECK(toy.train.batch_size == 128);
    CHECK(toy.train.total_steps == 20000);
}
