#include "hmog/data.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hmog {

namespace {

constexpr double kPsdTolerance = 1e-12;

std::string component_label(std::size_t i) { return "component " + std::to_string(i); }

}  // namespace

void GaussianMixtureSpec::validate() const {
    if (components.empty()) throw std::invalid_argument("mixture spec has no components");
    double total = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
        const auto& c = components[i];
        if (!(c.weight >= 0.0)) throw std::invalid_argument(component_label(i) + ": negative weight");
        total += c.weight;
        if (!std::isfinite(c.mean[0]) || !std::isfinite(c.mean[1])) {
            throw std::invalid_argument(component_label(i) + ": mean is not finite");
        }
        const Mat2& s = c.covariance;
        if (std::abs(s[0][1] - s[1][0]) > 1e-12) throw std::invalid_argument(component_label(i) + ": covariance not symmetric");
        const double det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        if (s[0][0] < -kPsdTolerance || s[1][1] < -kPsdTolerance || det < -kPsdTolerance) {
            throw std::invalid_argument(component_label(i) + ": covariance is not positive semidefinite");
        }
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("mixture weights sum to " + std::to_string(total) + ", expected 1");
    }
}

GaussianMixtureSpec default_five_gaussians() {
    GaussianMixtureSpec spec;
    const Mat2 cov{{{0.25, 0.0}, {0.0, 0.25}}};
    for (const Vec2& m : {Vec2{0.0, 0.0}, Vec2{4.0, 0.0}, Vec2{-4.0, 0.0}, Vec2{0.0, 4.0}, Vec2{0.0, -4.0}}) {
        spec.components.push_back({m, cov, 0.2});
    }
    return spec;
}

GaussianMixtureSpec parse_mixture_spec(const std::string& yaml_text) {
    YAML::Node root = YAML::Load(yaml_text);
    const YAML::Node list = root["components"];
    if (!list || !list.IsSequence()) throw std::invalid_argument("mixture spec: missing 'components' list");
    GaussianMixtureSpec spec;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const YAML::Node c = list[i];
        for (auto it = c.begin(); it != c.end(); ++it) {
            const auto key = it->first.as<std::string>();
            if (key != "mean" && key != "covariance" && key != "weight") {
                throw std::invalid_argument("mixture spec: components[" + std::to_string(i) + "]: unknown key '" + key + "'");
            }
        }
        GaussianComponent comp;
        const auto mean = c["mean"].as<std::vector<double>>();
        const auto cov = c["covariance"].as<std::vector<std::vector<double>>>();
        if (mean.size() != 2) throw std::invalid_argument("mixture spec: mean must have 2 entries");
        if (cov.size() != 2 || cov[0].size() != 2 || cov[1].size() != 2) {
            throw std::invalid_argument("mixture spec: covariance must be 2x2");
        }
        comp.mean = {mean[0], mean[1]};
        comp.covariance = {{{cov[0][0], cov[0][1]}, {cov[1][0], cov[1][1]}}};
        comp.weight = c["weight"].as<double>();
        spec.components.push_back(comp);
    }
    spec.validate();
    return spec;
}

GaussianMixtureSpec load_mixture_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mixture spec " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_mixture_spec(buf.str());
}

std::string mixture_spec_to_yaml(const GaussianMixtureSpec& spec) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap << YAML::Key << "components" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : spec.components) {
        out << YAML::BeginMap;
        out << YAML::Key << "mean" << YAML::Value << YAML::Flow << std::vector<double>{c.mean[0], c.mean[1]};
        out << YAML::Key << "covariance" << YAML::Value << YAML::Flow << YAML::BeginSeq
            << std::vector<double>{c.covariance[0][0], c.covariance[0][1]}
            << std::vector<double>{c.covariance[1][0], c.covariance[1][1]} << YAML::EndSeq;
        out << YAML::Key << "weight" << YAML::Value << c.weight;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
    return out.c_str();
}

Mat2 cholesky2(const Mat2& s) {
    const double det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    if (s[0][0] < -kPsdTolerance || s[1][1] < -kPsdTolerance || det < -kPsdTolerance) {
        throw std::invalid_argument("covariance is not positive semidefinite");
    }
    Mat2 l{};
    l[0][0] = std::sqrt(std::max(s[0][0], 0.0));
    l[1][0] = l[0][0] > 0.0 ? s[1][0] / l[0][0] : 0.0;
    l[1][1] = std::sqrt(std::max(s[1][1] - l[1][0] * l[1][0], 0.0));
    return l;
}

double largest_eigenvalue2(const Mat2& m) {
    const double tr = m[0][0] + m[1][1];
    const double diff = m[0][0] - m[1][1];
    return 0.5 * tr + 0.5 * std::sqrt(diff * diff + 4.0 * m[0][1] * m[1][0]);
}

Tensor sample_mixture(const GaussianMixtureSpec& spec, std::size_t n, Rng& rng, std::vector<std::size_t>& labels) {
    spec.validate();
    std::vector<Mat2> factors;
    factors.reserve(spec.size());
    for (const auto& c : spec.components) factors.push_back(cholesky2(c.covariance));

    Tensor out({n, 2});
    labels.assign(n, 0);
    for (std::size_t t = 0; t < n; ++t) {
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t k = spec.size() - 1;
        for (std::size_t i = 0; i < spec.size(); ++i) {
            acc += spec.components[i].weight;
            if (u < acc && spec.components[i].weight > 0.0) {
                k = i;
                break;
            }
        }
        while (spec.components[k].weight == 0.0 && k > 0) --k;
        const double a = rng.normal();
        const double b = rng.normal();
        const Mat2& l = factors[k];
        out(t, 0) = spec.components[k].mean[0] + l[0][0] * a;
        out(t, 1) = spec.components[k].mean[1] + l[1][0] * a + l[1][1] * b;
        labels[t] = k;
    }
    return out;
}

Tensor sample_mixture(const GaussianMixtureSpec& spec, std::size_t n, Rng& rng) {
    std::vector<std::size_t> labels;
    return sample_mixture(spec, n, rng, labels);
}

Tensor sample_latent(const LatentSpec& spec, std::size_t n, Rng& rng) {
    if (spec.dim == 0) throw std::invalid_argument("latent dimension must be >= 1");
    Tensor out({n, spec.dim});
    for (auto& v : out.data()) v = rng.normal();
    return out;
}

}  // namespace hmog
