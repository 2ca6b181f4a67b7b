#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "hmog/data.hpp"
#include "hmog/tensor.hpp"

namespace hmog {

struct GaussianFit {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// Sample mean and unbiased (n-1) covariance, symmetrized. Needs n >= 2.
GaussianFit fit_gaussian(const Tensor& samples);

/// Tr((A B)^{1/2}) for PSD A, B. Closed form for d <= 2, Denman-Beavers
/// iteration (tol 1e-10, 100 iterations) otherwise.
double trace_sqrt_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Squared Frechet distance |mu1-mu2|^2 + Tr(S1 + S2 - 2 (S1 S2)^{1/2}).
double frechet_distance(const GaussianFit& a, const GaussianFit& b);

struct KnnAccuracy {
    double real_acc = 0.0;
    double fake_acc = 0.0;
    double overall = 0.0;
};

/// Leave-one-out k-NN two-sample accuracy over the pooled set (real rows
/// first, then fake). Neighbors are ordered by squared Euclidean distance,
/// ties by lower pooled index; a vote tie is classified as real.
KnnAccuracy knn_two_sample(const Tensor& real, const Tensor& fake, std::size_t k);

struct ModeCoverage {
    std::size_t modes_covered = 0;
    /// Per component: samples assigned to it that fall inside its radius.
    std::vector<std::size_t> histogram;
};

/// Assigns each sample to the nearest component mean; a component is covered
/// when at least min_share*n of the samples lie within
/// radius_sigmas*sqrt(largest covariance eigenvalue) of its mean.
ModeCoverage mode_coverage(const Tensor& fake, const GaussianMixtureSpec& spec, double radius_sigmas,
                           double min_share);

/// Drops the floor(drop_fraction*n) rows of largest norm (lowest standard
/// normal density); survivors keep their input order.
Tensor truncate_latents(const Tensor& z, double drop_fraction);
/// Indices of the surviving rows, in input order.
std::vector<std::size_t> truncation_survivors(const Tensor& z, double drop_fraction);

struct MetricReport {
    double frechet = 0.0;
    KnnAccuracy knn;
    ModeCoverage coverage;
};

struct MetricOptions {
    std::size_t knn_k = 5;
    double radius_sigmas = 3.0;
    double min_share = 0.02;
};

MetricReport evaluate_samples(const Tensor& real, const Tensor& fake, const GaussianMixtureSpec& spec,
                              const MetricOptions& opts = {});

}  // namespace hmog
