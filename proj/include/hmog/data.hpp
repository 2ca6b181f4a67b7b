#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "hmog/rng.hpp"
#include "hmog/tensor.hpp"

namespace hmog {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

struct GaussianComponent {
    Vec2 mean{};
    Mat2 covariance{};
    double weight = 0.0;
};

/// Two-dimensional Gaussian mixture used as ground truth.
struct GaussianMixtureSpec {
    std::vector<GaussianComponent> components;

    /// Throws std::invalid_argument on negative weights, weights not summing
    /// to one, asymmetric or non-PSD covariances.
    void validate() const;
    std::size_t size() const { return components.size(); }
};

/// Five equally weighted components with covariance 0.25*I at (0,0), (+-4,0), (0,+-4).
GaussianMixtureSpec default_five_gaussians();

GaussianMixtureSpec load_mixture_spec(const std::filesystem::path& path);
GaussianMixtureSpec parse_mixture_spec(const std::string& yaml_text);
std::string mixture_spec_to_yaml(const GaussianMixtureSpec& spec);

/// Lower Cholesky factor of a 2x2 PSD matrix (semidefinite allowed).
Mat2 cholesky2(const Mat2& cov);
/// Largest eigenvalue of a symmetric 2x2 matrix.
double largest_eigenvalue2(const Mat2& m);

struct LatentSpec {
    std::size_t dim = 2;
};

/// (n x 2) draws: component by weight, then mean + L * N(0, I).
Tensor sample_mixture(const GaussianMixtureSpec& spec, std::size_t n, Rng& rng);
/// Same, also reporting the component of each draw.
Tensor sample_mixture(const GaussianMixtureSpec& spec, std::size_t n, Rng& rng, std::vector<std::size_t>& labels);

/// (n x dim) i.i.d. standard normal entries.
Tensor sample_latent(const LatentSpec& spec, std::size_t n, Rng& rng);

}  // namespace hmog
