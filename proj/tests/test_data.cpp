#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "hmog/data.hpp"
#include "oracles.hpp"

using namespace hmog;

namespace {

GaussianMixtureSpec single(Vec2 mean, Mat2 cov) { return GaussianMixtureSpec{{{mean, cov, 1.0}}}; }

}  // namespace

TEST_CASE("default mixture layout") {
    const GaussianMixtureSpec spec = default_five_gaussians();
    REQUIRE(spec.size() == 5);
    CHECK_NOTHROW(spec.validate());
    std::vector<Vec2> means;
    for (const auto& c : spec.components) {
        CHECK(c.weight == 0.2);
        CHECK(c.covariance == Mat2{{{0.25, 0.0}, {0.0, 0.25}}});
        means.push_back(c.mean);
    }
    for (Vec2 m : {Vec2{0, 0}, Vec2{4, 0}, Vec2{-4, 0}, Vec2{0, 4}, Vec2{0, -4}})
        CHECK(std::find(means.begin(), means.end(), m) != means.end());
}

TEST_CASE("mixture validation") {
    GaussianMixtureSpec s = single({0, 0}, {{{1, 0}, {0, 1}}});
    CHECK_NOTHROW(s.validate());
    s.components[0].weight = 0.5;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = single({0, 0}, {{{1, 2}, {2, 1}}});
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = single({0, 0}, {{{1, 0.1}, {0.2, 1}}});
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = single({0, 0}, {{{-1, 0}, {0, 1}}});
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = GaussianMixtureSpec{{{{0, 0}, {{{1, 0}, {0, 1}}}, 1.5}, {{1, 1}, {{{1, 0}, {0, 1}}}, -0.5}}};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    CHECK_THROWS_AS(GaussianMixtureSpec{}.validate(), std::invalid_argument);
    s = single({std::nan(""), 0}, {{{1, 0}, {0, 1}}});
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    Rng rng(1);
    CHECK_THROWS_AS(sample_mixture(single({0, 0}, {{{1, 3}, {3, 1}}}), 5, rng), std::invalid_argument);
}

TEST_CASE("cholesky of 2x2 covariances") {
    for (Mat2 c : {Mat2{{{4, 1}, {1, 2}}}, Mat2{{{0.25, 0}, {0, 0.25}}}, Mat2{{{1, 1}, {1, 1}}}, Mat2{{{0, 0}, {0, 2}}}}) {
        const Mat2 l = cholesky2(c);
        CHECK(l[0][1] == 0.0);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(l[i][0] * l[j][0] + l[i][1] * l[j][1] == doctest::Approx(c[i][j]).epsilon(1e-14));
    }
    CHECK(largest_eigenvalue2(Mat2{{{2, 0}, {0, 5}}}) == doctest::Approx(5.0));
    CHECK(largest_eigenvalue2(Mat2{{{2, 1}, {1, 2}}}) == doctest::Approx(3.0));
}

TEST_CASE("single component sample statistics") {
    Rng rng(2);
    Tensor x = sample_mixture(single({2, 3}, {{{1, 0}, {0, 1}}}), 10000, rng);
    CHECK(x.shape() == Shape{10000, 2});
    auto [mu, cov] = oracle::covariance(x);
    CHECK(std::abs(mu[0] - 2) < 0.1);
    CHECK(std::abs(mu[1] - 3) < 0.1);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(cov[i][j] - (i == j ? 1.0 : 0.0)) < 0.1);
}

TEST_CASE("anisotropic component covariance converges") {
    Rng rng(3);
    const Mat2 target{{{2.0, -0.7}, {-0.7, 0.5}}};
    Tensor x = sample_mixture(single({-1, 1}, target), 100000, rng);
    auto [mu, cov] = oracle::covariance(x);
    double err = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) err += (cov[i][j] - target[i][j]) * (cov[i][j] - target[i][j]);
    CHECK(std::sqrt(err) <= 0.05);
}

TEST_CASE("component frequencies follow the weights") {
    GaussianMixtureSpec spec = default_five_gaussians();
    const std::vector<double> w{0.1, 0.3, 0.2, 0.25, 0.15};
    for (std::size_t i = 0; i < 5; ++i) spec.components[i].weight = w[i];
    Rng rng(4);
    std::vector<std::size_t> labels;
    const std::size_t n = 100000;
    sample_mixture(spec, n, rng, labels);
    REQUIRE(labels.size() == n);
    std::vector<double> counts(5, 0.0);
    for (std::size_t l : labels) counts.at(l) += 1;
    double chi2 = 0;
    for (std::size_t i = 0; i < 5; ++i) chi2 += std::pow(counts[i] - n * w[i], 2) / (n * w[i]);
    // 99% quantile of chi-square with 4 degrees of freedom.
    CHECK(chi2 < 13.277);
}

TEST_CASE("degenerate weights and tiny batches") {
    GaussianMixtureSpec spec = default_five_gaussians();
    for (std::size_t i = 0; i < 5; ++i) spec.components[i].weight = i == 0 ? 1.0 : 0.0;
    Rng rng(5);
    std::vector<std::size_t> labels;
    sample_mixture(spec, 500, rng, labels);
    for (std::size_t l : labels) CHECK(l == 0);
    CHECK(sample_mixture(spec, 1, rng).shape() == Shape{1, 2});
}

TEST_CASE("sampling is seeded and deterministic") {
    Rng a(6), b(6);
    CHECK(sample_mixture(default_five_gaussians(), 50, a) == sample_mixture(default_five_gaussians(), 50, b));
    CHECK(sample_latent({2}, 3, a) == sample_latent({2}, 3, b));
}

TEST_CASE("latent sampling statistics") {
    Rng rng(7);
    Tensor z = sample_latent({2}, 10000, rng);
    CHECK(z.shape() == Shape{10000, 2});
    auto [mu, cov] = oracle::covariance(z);
    for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(mu[i]) < 0.05);
        CHECK(std::abs(cov[i][i] - 1) < 0.05);
    }
    CHECK(sample_latent({2}, 3, rng).shape() == Shape{3, 2});
    CHECK_THROWS_AS(sample_latent({0}, 3, rng), std::invalid_argument);
}

TEST_CASE("mixture spec yaml round-trip") {
    GaussianMixtureSpec spec = default_five_gaussians();
    spec.components[1].covariance = {{{0.3, 0.1}, {0.1, 0.2}}};
    spec.components[2].mean = {0.1, -1.0 / 3.0};
    const GaussianMixtureSpec back = parse_mixture_spec(mixture_spec_to_yaml(spec));
    REQUIRE(back.size() == spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        CHECK(back.components[i].mean == spec.components[i].mean);
        CHECK(back.components[i].covariance == spec.components[i].covariance);
        CHECK(back.components[i].weight == spec.components[i].weight);
    }

    const auto path = std::filesystem::temp_directory_path() / "hmog_test_mixture.yaml";
    {
        std::ofstream out(path);
        out << "components:\n"
               "  - mean: [1, 2]\n"
               "    covariance: [[1, 0], [0, 1]]\n"
               "    weight: 1\n";
    }
    const GaussianMixtureSpec loaded = load_mixture_spec(path);
    CHECK(loaded.components.at(0).mean == Vec2{1, 2});
    std::filesystem::remove(path);

    CHECK_THROWS_AS(parse_mixture_spec("items: []"), std::invalid_argument);
    CHECK_THROWS_AS(parse_mixture_spec("components:\n  - mean: [1, 2, 3]\n    covariance: [[1, 0], [0, 1]]\n    weight: 1\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_mixture_spec("components:\n  - mean: [1, 2]\n    covariance: [[1, 0], [0, 1]]\n    weight: 1\n    color: red\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_mixture_spec("components:\n  - mean: [1, 2]\n    covariance: [[1, 0], [0, 1]]\n    weight: 0.5\n"),
                    std::invalid_argument);
    CHECK_THROWS(load_mixture_spec("/nonexistent/mixture.yaml"));
}
