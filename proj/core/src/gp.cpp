#include "hiforead/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hiforead/errors.hpp"

namespace hiforead {

namespace {

double sq_dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

// In-place Cholesky of a row-major symmetric matrix; false on failure.
bool cholesky(std::vector<double>& m, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = m[i * n + j];
            for (std::size_t k = 0; k < j; ++k) sum -= m[i * n + k] * m[j * n + k];
            if (i == j) {
                if (sum <= 0.0 || !std::isfinite(sum)) return false;
                m[i * n + j] = std::sqrt(sum);
            } else {
                m[i * n + j] = sum / m[j * n + j];
            }
        }
        for (std::size_t j = i + 1; j < n; ++j) m[i * n + j] = 0.0;
    }
    return true;
}

void solve_lower(const std::vector<double>& l, std::size_t n, std::vector<double>& b) {
    for (std::size_t i = 0; i < n; ++i) {
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l[i * n + k] * b[k];
        b[i] = sum / l[i * n + i];
    }
}

void solve_upper_from_lower(const std::vector<double>& l, std::size_t n,
                            std::vector<double>& b) {
    for (std::size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (std::size_t k = i + 1; k < n; ++k) sum -= l[k * n + i] * b[k];
        b[i] = sum / l[i * n + i];
    }
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

} // namespace

void GpSurrogate::add(std::array<double, 2> x, double y) {
    if (!std::isfinite(y)) throw Error("gp: non-finite observation");
    points_.push_back(x);
    targets_.push_back(y);
    dirty_ = true;
}

double GpSurrogate::best_observed() const {
    if (targets_.empty()) throw Error("gp: no observations");
    return *std::min_element(targets_.begin(), targets_.end());
}

void GpSurrogate::refit() const {
    const std::size_t n = targets_.size();
    if (n == 0) throw Error("gp: posterior queried before any observation");

    target_mean_ = 0.0;
    for (double y : targets_) target_mean_ += y;
    target_mean_ /= static_cast<double>(n);
    double var = 0.0;
    for (double y : targets_) var += (y - target_mean_) * (y - target_mean_);
    var /= static_cast<double>(n);
    target_scale_ = var < 1e-24 ? 1.0 : std::sqrt(var);

    const double inv_two_ls2 =
        1.0 / (2.0 * config_.length_scale * config_.length_scale);
    std::vector<double> kernel(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double k = config_.signal_variance *
                             std::exp(-sq_dist(points_[i], points_[j]) * inv_two_ls2);
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }
    for (std::size_t i = 0; i < n; ++i) kernel[i * n + i] += config_.noise_variance;

    chol_ = kernel;
    if (!cholesky(chol_, n)) {
        bool ok = false;
        for (double jitter = 1e-8; jitter <= 1e-4 + 1e-20; jitter *= 10.0) {
            chol_ = kernel;
            for (std::size_t i = 0; i < n; ++i) chol_[i * n + i] += jitter;
            if (cholesky(chol_, n)) {
                ok = true;
                break;
            }
        }
        if (!ok) throw Error("gp: kernel matrix singular even with jitter 1e-4");
    }

    alpha_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        alpha_[i] = (targets_[i] - target_mean_) / target_scale_;
    }
    solve_lower(chol_, n, alpha_);
    solve_upper_from_lower(chol_, n, alpha_);
    dirty_ = false;
}

GpSurrogate::Posterior GpSurrogate::posterior(std::array<double, 2> x) const {
    if (dirty_) refit();
    const std::size_t n = targets_.size();
    const double inv_two_ls2 =
        1.0 / (2.0 * config_.length_scale * config_.length_scale);

    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) {
        k[i] = config_.signal_variance *
               std::exp(-sq_dist(points_[i], x) * inv_two_ls2);
    }
    double mean_std = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_std += k[i] * alpha_[i];

    std::vector<double> v = k;
    solve_lower(chol_, n, v);
    double reduction = 0.0;
    for (double vi : v) reduction += vi * vi;
    const double var_std = std::max(0.0, config_.signal_variance - reduction);

    Posterior post;
    post.mean = target_mean_ + mean_std * target_scale_;
    post.stddev = std::sqrt(var_std) * target_scale_;
    return post;
}

AcquisitionKind parse_acquisition(const std::string& text) {
    if (text == "EI" || text == "ei") return AcquisitionKind::EI;
    if (text == "PI" || text == "pi") return AcquisitionKind::PI;
    if (text == "UCB" || text == "ucb") return AcquisitionKind::UCB;
    throw ConfigError("unknown acquisition kind '" + text + "' (EI|PI|UCB)");
}

const char* acquisition_name(AcquisitionKind kind) {
    switch (kind) {
        case AcquisitionKind::EI: return "EI";
        case AcquisitionKind::PI: return "PI";
        case AcquisitionKind::UCB: return "UCB";
    }
    return "?";
}

double acquisition_value(double mean, double stddev, AcquisitionKind kind,
                         double best_so_far, double xi_or_kappa) {
    switch (kind) {
        case AcquisitionKind::EI: {
            if (stddev <= 0.0) return 0.0;
            const double gap = best_so_far - xi_or_kappa - mean;
            const double z = gap / stddev;
            return std::max(0.0, gap * normal_cdf(z) + stddev * normal_pdf(z));
        }
        case AcquisitionKind::PI: {
            if (stddev <= 0.0) return 0.0;
            return normal_cdf((best_so_far - mean - xi_or_kappa) / stddev);
        }
        case AcquisitionKind::UCB:
            return -(mean - xi_or_kappa * stddev);
    }
    throw Error("unknown acquisition kind");
}

double acquisition(const GpSurrogate& surrogate, std::array<double, 2> x,
                   AcquisitionKind kind, double best_so_far, double xi_or_kappa) {
    const auto post = surrogate.posterior(x);
    return acquisition_value(post.mean, post.stddev, kind, best_so_far, xi_or_kappa);
}

} // namespace hiforead
