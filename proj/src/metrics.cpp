#include "hmog/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace hmog {

GaussianFit fit_gaussian(const Tensor& samples) {
    const std::size_t n = samples.rows(), d = samples.cols();
    if (n < 2) throw std::invalid_argument("fit_gaussian: need at least 2 samples, got " + std::to_string(n));
    GaussianFit fit{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)),
                    Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))};
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t c = 0; c < d; ++c) fit.mean(static_cast<Eigen::Index>(c)) += samples(t, c);
    fit.mean /= static_cast<double>(n);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < d; ++i) {
            const double di = samples(t, i) - fit.mean(static_cast<Eigen::Index>(i));
            for (std::size_t j = i; j < d; ++j) {
                fit.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                    di * (samples(t, j) - fit.mean(static_cast<Eigen::Index>(j)));
            }
        }
    }
    fit.covariance /= static_cast<double>(n - 1);
    for (Eigen::Index i = 0; i < fit.covariance.rows(); ++i)
        for (Eigen::Index j = 0; j < i; ++j) fit.covariance(i, j) = fit.covariance(j, i);
    return fit;
}

namespace {

double symmetric_trace_sqrt(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(a);
    const Eigen::VectorXd root = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd sqrt_a = ea.eigenvectors() * root.asDiagonal() * ea.eigenvectors().transpose();
    Eigen::MatrixXd inner = sqrt_a * b * sqrt_a;
    inner = 0.5 * (inner + inner.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ei(inner, Eigen::EigenvaluesOnly);
    return ei.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

std::optional<double> denman_beavers_trace(const Eigen::MatrixXd& m) {
    const Eigen::Index d = m.rows();
    Eigen::MatrixXd y = m;
    Eigen::MatrixXd z = Eigen::MatrixXd::Identity(d, d);
    for (int it = 0; it < 100; ++it) {
        Eigen::FullPivLU<Eigen::MatrixXd> ly(y), lz(z);
        if (!ly.isInvertible() || !lz.isInvertible()) return std::nullopt;
        const Eigen::MatrixXd y_next = 0.5 * (y + lz.inverse());
        const Eigen::MatrixXd z_next = 0.5 * (z + ly.inverse());
        const double change = (y_next - y).norm();
        y = y_next;
        z = z_next;
        if (!y.allFinite()) return std::nullopt;
        if (change <= 1e-10 * std::max(1.0, y.norm())) return y.trace();
    }
    return std::nullopt;
}

}  // namespace

double trace_sqrt_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        throw std::invalid_argument("trace_sqrt_product: dimension mismatch");
    }
    const Eigen::Index d = a.rows();
    if (d == 0) return 0.0;
    if (d == 1) return std::sqrt(std::max(a(0, 0) * b(0, 0), 0.0));
    if (d == 2) {
        // Eigenvalues l1, l2 of AB are real and non-negative; sqrt(l1) + sqrt(l2)
        // squared is tr(AB) + 2 sqrt(det(AB)).
        const Eigen::Matrix2d m = (a * b).topLeftCorner<2, 2>();
        const double det = a.topLeftCorner<2, 2>().determinant() * b.topLeftCorner<2, 2>().determinant();
        const double tr = m.trace();
        return std::sqrt(std::max(tr + 2.0 * std::sqrt(std::max(det, 0.0)), 0.0));
    }
    if (auto t = denman_beavers_trace(a * b)) return *t;
    return symmetric_trace_sqrt(a, b);
}

double frechet_distance(const GaussianFit& a, const GaussianFit& b) {
    if (a.mean.size() != b.mean.size() || a.covariance.rows() != b.covariance.rows()) {
        throw std::invalid_argument("frechet_distance: dimension mismatch (" + std::to_string(a.mean.size()) + " vs " +
                                    std::to_string(b.mean.size()) + ")");
    }
    const double mean_term = (a.mean - b.mean).squaredNorm();
    const double trace_term = a.covariance.trace() + b.covariance.trace() -
                              2.0 * trace_sqrt_product(a.covariance, b.covariance);
    const double d = mean_term + trace_term;
    if (d < -1e-8) {
        throw std::domain_error("frechet_distance: negative value " + std::to_string(d) +
                                " (covariances are not PSD to working precision)");
    }
    return std::max(d, 0.0);
}

KnnAccuracy knn_two_sample(const Tensor& real, const Tensor& fake, std::size_t k) {
    const std::size_t n = real.rows(), m = fake.rows(), total = n + m;
    if (k < 1) throw std::invalid_argument("knn_two_sample: k must be >= 1");
    if (k >= total) throw std::invalid_argument("knn_two_sample: k must be smaller than the pooled sample count");
    if (n > 0 && m > 0 && real.cols() != fake.cols()) throw std::invalid_argument("knn_two_sample: dimension mismatch");
    const std::size_t d = n > 0 ? real.cols() : fake.cols();

    std::vector<double> pts(total * d);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t c = 0; c < d; ++c) pts[t * d + c] = real(t, c);
    for (std::size_t t = 0; t < m; ++t)
        for (std::size_t c = 0; c < d; ++c) pts[(n + t) * d + c] = fake(t, c);

    std::size_t real_hits = 0, fake_hits = 0;
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        cand.clear();
        for (std::size_t j = 0; j < total; ++j) {
            if (j == i) continue;
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = pts[i * d + c] - pts[j * d + c];
                s += diff * diff;
            }
            cand.emplace_back(s, j);
        }
        std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1), cand.end());
        std::size_t real_votes = 0;
        for (std::size_t q = 0; q < k; ++q)
            if (cand[q].second < n) ++real_votes;
        const bool predicted_real = 2 * real_votes >= k;
        if (i < n && predicted_real) ++real_hits;
        if (i >= n && !predicted_real) ++fake_hits;
    }
    KnnAccuracy out;
    out.real_acc = n ? static_cast<double>(real_hits) / static_cast<double>(n) : 0.0;
    out.fake_acc = m ? static_cast<double>(fake_hits) / static_cast<double>(m) : 0.0;
    out.overall = static_cast<double>(real_hits + fake_hits) / static_cast<double>(total);
    return out;
}

ModeCoverage mode_coverage(const Tensor& fake, const GaussianMixtureSpec& spec, double radius_sigmas,
                           double min_share) {
    if (!(radius_sigmas > 0.0)) throw std::invalid_argument("mode_coverage: radius must be positive");
    if (!(min_share > 0.0 && min_share < 1.0)) throw std::invalid_argument("mode_coverage: min_share must be in (0,1)");
    ModeCoverage out;
    out.histogram.assign(spec.size(), 0);
    const std::size_t n = fake.rows();
    if (n == 0) return out;
    if (fake.cols() != 2) throw std::invalid_argument("mode_coverage: samples must be two-dimensional");

    std::vector<double> radius(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        radius[k] = radius_sigmas * std::sqrt(std::max(largest_eigenvalue2(spec.components[k].covariance), 0.0));
    }
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < spec.size(); ++k) {
            const double dx = fake(t, 0) - spec.components[k].mean[0];
            const double dy = fake(t, 1) - spec.components[k].mean[1];
            const double dist = dx * dx + dy * dy;
            if (dist < best_d) {
                best_d = dist;
                best = k;
            }
        }
        if (std::sqrt(best_d) <= radius[best]) ++out.histogram[best];
    }
    const double needed = min_share * static_cast<double>(n);
    for (std::size_t c : out.histogram)
        if (static_cast<double>(c) >= needed) ++out.modes_covered;
    return out;
}

std::vector<std::size_t> truncation_survivors(const Tensor& z, double drop_fraction) {
    if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) {
        throw std::invalid_argument("truncate_latents: drop fraction must be in [0, 1)");
    }
    const std::size_t n = z.rows();
    const auto drop = static_cast<std::size_t>(std::floor(drop_fraction * static_cast<double>(n)));
    std::vector<double> norm2(n, 0.0);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t c = 0; c < z.cols(); ++c) norm2[t] += z(t, c) * z(t, c);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norm2[a] < norm2[b]; });
    order.resize(n - drop);
    std::sort(order.begin(), order.end());
    return order;
}

Tensor truncate_latents(const Tensor& z, double drop_fraction) {
    const auto keep = truncation_survivors(z, drop_fraction);
    return z.gather_rows(keep);
}

MetricReport evaluate_samples(const Tensor& real, const Tensor& fake, const GaussianMixtureSpec& spec,
                              const MetricOptions& opts) {
    MetricReport r;
    r.frechet = frechet_distance(fit_gaussian(real), fit_gaussian(fake));
    r.knn = knn_two_sample(real, fake, opts.knn_k);
    r.coverage = mode_coverage(fake, spec, opts.radius_sigmas, opts.min_share);
    return r;
}

}  // namespace hmog
