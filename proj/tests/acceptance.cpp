#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <unistd.h>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hmog/adam.hpp"
#include "hmog/checkpoint.hpp"
#include "hmog/config.hpp"
#include "hmog/data.hpp"
#include "hmog/grad_check.hpp"
#include "hmog/interpret.hpp"
#include "hmog/io.hpp"
#include "hmog/metrics.hpp"
#include "hmog/runner.hpp"
#include "oracles.hpp"

using namespace hmog;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::ostringstream report_log;

void emit(const std::string& line) {
    std::cout << line << std::endl;
    report_log << line << '\n';
}

void report(int id, const std::string& name, Outcome& o) {
    emit(std::string(o.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(id) + " (" + name + "):" + o.detail.str());
}

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng, double sd = 1.0) {
    Tensor t({r, c});
    for (auto& x : t.data()) x = sd * rng.normal();
    return t;
}

void randomize(const std::vector<Parameter*>& ps, Rng& rng, double sd) {
    for (Parameter* p : ps)
        for (auto& x : p->value.data()) x = sd * rng.normal();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / ("hmog_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

// 1 -------------------------------------------------------------------------

void gradient_correctness(Outcome& o) {
    const auto t0 = Clock::now();
    const std::vector<std::pair<Architecture, LossMode>> cases{
        {Architecture::HMoG, LossMode::WganGp},  {Architecture::MoG, LossMode::WganGp},
        {Architecture::FC, LossMode::WganGp},    {Architecture::MADGAN, LossMode::Madgan},
        {Architecture::MGAN, LossMode::Mgan},    {Architecture::MEGAN, LossMode::Megan}};
    std::uint64_t seed = 100;
    for (auto [arch, mode] : cases) {
        ModelSpec spec;
        spec.architecture = arch;
        spec.depth = 3;
        spec.generators = arch == Architecture::FC ? 1 : 8;
        Rng init(++seed);
        ModelBundle m = make_models(spec, mode, init);
        TrainConfig cfg;
        cfg.loss_mode = mode;
        cfg.batch_size = 16;
        Rng data(++seed);
        const Tensor real = sample_mixture(default_five_gaussians(), 16, data);
        const Tensor z = sample_latent({spec.latent_dim}, 16, data);
        const std::uint64_t draw = ++seed;

        const std::string name(architecture_name(arch));
        double critic_err = 0, gp_err = 0, gen_err = 0;
        critic_err = grad_check(
                         [&](Graph& g) {
                             Rng r(draw);
                             return build_critic_loss(g, m, cfg, real, z, r).loss;
                         },
                         m.critic.parameters())
                         .max_relative_error;
        if (mode == LossMode::WganGp) {
            gp_err = grad_check(
                         [&](Graph& g) {
                             Rng r(draw);
                             return *build_critic_loss(g, m, cfg, real, z, r).penalty;
                         },
                         m.critic.parameters())
                         .max_relative_error;
        }
        if (arch == Architecture::MEGAN) {
            // The hard selection is piecewise constant; differentiate the
            // straight-through surrogate at a fixed Gumbel draw and choice.
            auto& gen = dynamic_cast<MeganGenerator&>(*m.generator);
            MeganPin pin;
            {
                Graph g;
                Rng r(draw);
                pin = gen.forward(g, g.constant(z), r).pin;
            }
            gen_err = grad_check(
                          [&](Graph& g) {
                              Rng unused(0);
                              MeganOutput out = gen.forward(g, g.constant(z), unused, &pin);
                              Var d_fake = m.critic.forward(g, out.x);
                              return mean(log(clamp_min(1.0 - d_fake, 1e-12)));
                          },
                          m.generator_step_parameters())
                          .max_relative_error;
        } else {
            gen_err = grad_check(
                          [&](Graph& g) {
                              Rng r(draw);
                              return build_generator_loss(g, m, cfg, z, r);
                          },
                          m.generator_step_parameters())
                          .max_relative_error;
        }
        o.detail << ' ' << name << " critic=" << critic_err;
        if (mode == LossMode::WganGp) o.detail << " gp=" << gp_err;
        o.detail << " gen=" << gen_err << ';';
        o.require(critic_err <= 1e-4, name + " critic loss");
        o.require(gp_err <= 1e-3, name + " gradient penalty");
        o.require(gen_err <= 1e-4, name + " generator loss");
    }
    const double elapsed = seconds_since(t0);
    o.detail << " time=" << elapsed << "s";
    o.require(elapsed <= 120.0, "runtime over 2 min");
}

// 2 -------------------------------------------------------------------------

void responsibility_normalization(Outcome& o) {
    Rng rng(2);
    double worst_sum = 0, worst_expansion = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t depth = 1 + rng.uniform_index(5);
        GeneratorTree tree(depth, 2, 2, rng);
        randomize(tree.parameters(), rng, 2.0);
        const Tensor z = random_matrix(1, 2, rng, 2.0);
        Graph g;
        const Var zv = g.constant(z);
        const Tensor out = tree.forward(g, zv).value();
        const Tensor resp = tree.leaf_responsibilities(g, zv).value();
        double sum = 0, mix[2] = {0, 0};
        for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
            sum += resp(0, l);
            const Tensor y = tree.leaf(l).forward(g, zv).value();
            for (std::size_t c = 0; c < 2; ++c) mix[c] += resp(0, l) * y(0, c);
        }
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        for (std::size_t c = 0; c < 2; ++c) worst_expansion = std::max(worst_expansion, std::abs(out(0, c) - mix[c]));
    }
    o.detail << " max|sum-1|=" << worst_sum << " max|forward-expansion|=" << worst_expansion;
    o.require(worst_sum <= 1e-12, "responsibility sum");
    o.require(worst_expansion <= 1e-10, "expansion");
}

// 3, 4 ----------------------------------------------------------------------

struct ToyRun {
    std::string label;
    int exit_code = 0;
    MetricReport final;
    fs::path dir;
    double seconds = 0;
};

std::vector<ToyRun> toy_runs(const fs::path& scratch) {
    std::vector<ToyRun> runs;
    for (const std::string arch : {"hmog", "mog"}) {
        const ExperimentConfig base = parse_config(fs::path(HMOG_SOURCE_DIR) / "configs" / ("toy_" + arch + ".yaml"));
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            ExperimentConfig cfg = base;
            cfg.train.seed = seed;
            ToyRun run;
            run.label = arch + "/seed" + std::to_string(seed);
            run.dir = scratch / (arch + "-seed" + std::to_string(seed));
            std::ostringstream log, err;
            const auto t0 = Clock::now();
            run.exit_code = run_experiment(cfg, run.dir, log, err);
            run.seconds = seconds_since(t0);
            if (run.exit_code == kExitOk) {
                std::ostringstream quiet;
                run.final = evaluate_run(run.dir, quiet);
            }
            std::ostringstream line;
            line << "toy run " << run.label << ": exit=" << run.exit_code << " modes=" << run.final.coverage.modes_covered
                 << " knn=" << run.final.knn.overall << " frechet=" << run.final.frechet << " time=" << run.seconds
                 << "s";
            emit(line.str());
            runs.push_back(run);
        }
    }
    return runs;
}

void toy_coverage(const std::vector<ToyRun>& runs, Outcome& o) {
    for (const std::string arch : {"hmog", "mog"}) {
        int covered = 0;
        double slowest = 0;
        for (const ToyRun& r : runs) {
            if (r.label.rfind(arch + "/", 0) != 0) continue;
            if (r.exit_code == kExitOk && r.final.coverage.modes_covered == 5) ++covered;
            slowest = std::max(slowest, r.seconds);
        }
        o.detail << ' ' << arch << " full coverage on " << covered << "/5 seeds (slowest run " << slowest << "s);";
        o.require(covered >= 4, arch + " coverage");
        o.require(slowest <= 900.0, arch + " runtime over 15 min");
    }
}

void toy_quality(const std::vector<ToyRun>& runs, Outcome& o) {
    for (const ToyRun& r : runs) {
        const bool ok = r.exit_code == kExitOk && r.final.knn.overall >= 0.5 && r.final.knn.overall <= 0.7 &&
                        r.final.frechet <= 0.5;
        o.detail << ' ' << r.label << " knn=" << r.final.knn.overall << " fd=" << r.final.frechet << ';';
        o.require(ok, r.label);
    }
}

// 5 -------------------------------------------------------------------------

void metric_oracles(Outcome& o) {
    Rng rng(5);
    int knn_mismatch = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(100), m = 1 + rng.uniform_index(100);
        const std::size_t k = 1 + rng.uniform_index(std::min<std::size_t>(9, n + m - 1));
        // Coarse integer grids produce many exact distance ties.
        Tensor real({n, 2}), fake({m, 2});
        const bool grid = trial % 2 == 0;
        for (auto& x : real.data()) x = grid ? static_cast<double>(rng.uniform_index(6)) : rng.normal();
        for (auto& x : fake.data()) x = grid ? static_cast<double>(rng.uniform_index(6)) : 0.5 + 1.2 * rng.normal();
        const KnnAccuracy a = knn_two_sample(real, fake, k);
        const oracle::Knn b = oracle::knn(real, fake, k);
        if (a.real_acc != b.real_acc || a.fake_acc != b.fake_acc) ++knn_mismatch;
    }
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::MatrixXd a = oracle::random_psd(2, rng), b = oracle::random_psd(2, rng);
        worst = std::max(worst, rel_err(trace_sqrt_product(a, b), oracle::trace_sqrt(a, b)));
    }
    o.detail << " knn mismatches=" << knn_mismatch << "/50 trace max rel err=" << worst;
    o.require(knn_mismatch == 0, "knn oracle");
    o.require(worst <= 1e-8, "trace oracle");
}

// 6 -------------------------------------------------------------------------

void optimizer_oracle(Outcome& o) {
    double worst = 0;
    for (bool amsgrad : {false, true}) {
        AdamConfig cfg{};
        cfg.amsgrad = amsgrad;
        Rng rng(amsgrad ? 61 : 60);
        Parameter p{"p", random_matrix(4, 5, rng)};
        Adam opt({&p}, cfg);
        std::vector<oracle::ScalarAdam> ref(20, oracle::ScalarAdam{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps, amsgrad});
        std::vector<double> w = p.value.data();
        for (int step = 0; step < 10; ++step) {
            Tensor g = random_matrix(4, 5, rng, step % 4 == 0 ? 10.0 : 0.3);
            for (std::size_t i = 0; i < 20; ++i) w[i] = ref[i].step(w[i], g[i]);
            opt.step({g});
            for (std::size_t i = 0; i < 20; ++i) worst = std::max(worst, std::abs(p.value[i] - w[i]));
        }
    }
    o.detail << " max |param - reference|=" << worst;
    o.require(worst <= 1e-12, "trace mismatch");
}

// 7 -------------------------------------------------------------------------

void interpretability(const fs::path& trained_run, Outcome& o) {
    ExperimentConfig cfg = parse_config(trained_run / "config.yaml");
    ModelBundle m = build_models(cfg);
    load_checkpoint(trained_run / "checkpoint.txt", m.all_parameters());
    auto& gen = dynamic_cast<HmogGenerator&>(*m.generator);
    const GeneratorTree& tree = gen.tree();
    o.require(tree.depth() == 3, "trained model is not depth 3");

    Rng rng(7);
    const Tensor z = sample_latent({2}, 1000, rng);
    const Tensor c = gating_correlation(tree, z);
    double asym = 0, diag = 0;
    for (std::size_t i = 0; i < c.shape()[0]; ++i) {
        diag = std::max(diag, std::abs(c(i, i) - 1.0));
        for (std::size_t j = 0; j < c.shape()[1]; ++j) asym = std::max(asym, std::abs(c(i, j) - c(j, i)));
    }
    o.detail << " asymmetry=" << asym << " diag err=" << diag;
    o.require(asym <= 1e-12 && diag == 0.0, "correlation symmetry / diagonal");

    // Depth-1 subtree: the root gate of the trained tree alone.
    GeneratorTree stump(1, 2, tree.leaf(0).bias.value.size(), rng);
    stump.gate(0).v.value = tree.gate(0).v.value;
    stump.gate(0).v0.value = tree.gate(0).v0.value;
    const double anti = gating_correlation(stump, z)(0, 1);
    o.detail << " depth-1 corr=" << anti;
    o.require(std::abs(anti + 1.0) <= 1e-9, "depth-1 anticorrelation");

    const Tensor x = generate_tree_samples(tree, gen.shared(), z);
    const auto resp = node_average_response(tree, gen.shared(), z);
    double root_err = 0;
    for (std::size_t col = 0; col < 2; ++col) {
        double mean = 0;
        for (std::size_t t = 0; t < z.shape()[0]; ++t) mean += x(t, col);
        mean /= static_cast<double>(z.shape()[0]);
        root_err = std::max(root_err, std::abs((*resp.at(0))[col] - mean));
    }
    o.detail << " root mean err=" << root_err;
    o.require(resp.at(0).has_value() && root_err <= 1e-10, "root average response");

    Rng draw(70), again(70);
    const auto ex = top_leaf_exemplars(tree, gen.shared(), 100, 5, draw);
    const Tensor zz = sample_latent({2}, 100, again);
    Graph g;
    const Tensor r = tree.leaf_responsibilities(g, g.constant(zz)).value();
    int mismatches = 0;
    for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t t = 0; t < 100; ++t) all.push_back({-r(t, leaf), t});
        std::sort(all.begin(), all.end());
        for (std::size_t q = 0; q < 5; ++q)
            if (ex.at(leaf).at(q).draw != all[q].second) ++mismatches;
    }
    o.detail << " exemplar mismatches=" << mismatches;
    o.require(mismatches == 0, "exemplar oracle");
}

// 8 -------------------------------------------------------------------------

void determinism(const fs::path& scratch, Outcome& o) {
    ExperimentConfig cfg = parse_config(fs::path(HMOG_SOURCE_DIR) / "configs" / "toy_hmog.yaml");
    cfg.train.total_steps = 300;
    cfg.eval_every = 100;
    cfg.train.seed = 8;
    std::string csv[2];
    for (int i = 0; i < 2; ++i) {
        const fs::path dir = scratch / ("determinism-" + std::to_string(i));
        std::ostringstream log, err;
        o.require(run_experiment(cfg, dir, log, err) == kExitOk, "run failed");
        csv[i] = read_text_file(dir / "metrics.csv");
    }
    o.detail << " metrics.csv bytes=" << csv[0].size();
    o.require(!csv[0].empty() && csv[0] == csv[1], "metrics differ");
}

}  // namespace

int main(int argc, char** argv) {
    // Optional list of criterion numbers to run, e.g. "acceptance 1 5 6".
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    auto selected = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

    const fs::path scratch = scratch_dir();
    int failures = 0, ran = 0;
    auto run = [&](int id, const std::string& name, const std::function<void(Outcome&)>& body) {
        if (!selected(id)) return;
        ++ran;
        Outcome o;
        try {
            body(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        report(id, name, o);
        if (!o.pass) ++failures;
    };

    run(1, "gradient correctness", gradient_correctness);
    run(2, "responsibility normalization", responsibility_normalization);

    std::vector<ToyRun> toys;
    try {
        if (selected(3) || selected(4) || selected(7)) toys = toy_runs(scratch);
    } catch (const std::exception& e) {
        std::cerr << "toy runs aborted: " << e.what() << '\n';
    }
    run(3, "toy mode coverage", [&](Outcome& o) {
        o.require(toys.size() == 10, "toy runs incomplete");
        toy_coverage(toys, o);
    });
    run(4, "toy two-sample quality", [&](Outcome& o) {
        o.require(toys.size() == 10, "toy runs incomplete");
        toy_quality(toys, o);
    });
    run(5, "metric oracles", metric_oracles);
    run(6, "optimizer oracle", optimizer_oracle);
    run(7, "interpretability pipeline", [&](Outcome& o) { interpretability(scratch / "hmog-seed1", o); });
    run(8, "determinism", [&](Outcome& o) { determinism(scratch, o); });

    std::error_code ec;
    fs::remove_all(scratch, ec);
    emit(std::to_string(ran - failures) + "/" + std::to_string(ran) + " criteria passed");
    write_text_file("acceptance_report.txt", report_log.str());
    return 0;
}
