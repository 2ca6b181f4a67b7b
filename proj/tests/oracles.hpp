#pragma once

// Independent reference implementations used by the unit tests and the
// acceptance suite. None of these call into the production code paths they
// check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "hmog/rng.hpp"
#include "hmog/tensor.hpp"

namespace oracle {

struct Knn {
    double real_acc, fake_acc, overall;
};

// Full sort of every distance; ties by lower pooled index, vote ties to real.
inline Knn knn(const hmog::Tensor& real, const hmog::Tensor& fake, std::size_t k) {
    std::vector<std::vector<double>> pts;
    for (std::size_t i = 0; i < real.rows(); ++i) pts.push_back(real.row_at(i).data());
    for (std::size_t i = 0; i < fake.rows(); ++i) pts.push_back(fake.row_at(i).data());
    const std::size_t n = real.rows(), total = pts.size();
    std::size_t hit_real = 0, hit_fake = 0;
    for (std::size_t i = 0; i < total; ++i) {
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t j = 0; j < total; ++j) {
            if (j == i) continue;
            double d = 0;
            for (std::size_t c = 0; c < pts[i].size(); ++c) d += (pts[i][c] - pts[j][c]) * (pts[i][c] - pts[j][c]);
            all.push_back({d, j});
        }
        std::sort(all.begin(), all.end());
        std::size_t votes_real = 0;
        for (std::size_t q = 0; q < k; ++q) votes_real += all[q].second < n;
        const bool says_real = votes_real * 2 >= k;
        if (i < n) hit_real += says_real;
        else hit_fake += !says_real;
    }
    const double m = static_cast<double>(total - n);
    return {n ? hit_real / static_cast<double>(n) : 0.0, m > 0 ? hit_fake / m : 0.0,
            static_cast<double>(hit_real + hit_fake) / static_cast<double>(total)};
}

// Sum of square roots of the eigenvalues of A*B from a general eigen solver.
inline double trace_sqrt(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(a * b, false);
    double s = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s += std::sqrt(std::max(es.eigenvalues()[i].real(), 0.0));
    return s;
}

inline Eigen::MatrixXd random_psd(std::size_t d, hmog::Rng& rng, bool allow_singular = false) {
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
    if (allow_singular && rng.uniform() < 0.2) g.col(0).setZero();
    return g * g.transpose();
}

// Double-loop mean and (n-1) covariance.
inline std::pair<std::vector<double>, std::vector<std::vector<double>>> covariance(const hmog::Tensor& x) {
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> mu(d, 0.0);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t c = 0; c < d; ++c) mu[c] += x(t, c) / static_cast<double>(n);
    std::vector<std::vector<double>> s(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t t = 0; t < n; ++t) s[i][j] += (x(t, i) - mu[i]) * (x(t, j) - mu[j]);
            s[i][j] /= static_cast<double>(n - 1);
        }
    return {mu, s};
}

// Scalar Adam written from the update rule.
struct ScalarAdam {
    double lr, b1, b2, eps;
    bool amsgrad;
    double m = 0, v = 0, vmax = 0;
    int t = 0;

    double step(double w, double g) {
        ++t;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mhat = m / (1 - std::pow(b1, t));
        double vhat = v / (1 - std::pow(b2, t));
        if (amsgrad) {
            vmax = std::max(vmax, vhat);
            vhat = vmax;
        }
        return w - lr * mhat / (std::sqrt(vhat) + eps);
    }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace oracle
