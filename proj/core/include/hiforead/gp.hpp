#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace hiforead {

/// Squared-exponential kernel hyper-parameters. Targets are standardized
/// internally (mean removed, divided by the sample standard deviation, or by
/// 1 when it degenerates), so signal_variance = 1 is the natural default.
struct GpConfig {
    double length_scale = 0.2;
    double signal_variance = 1.0;
    double noise_variance = 1e-6;
};

/// Gaussian-process regressor over 2-D inputs.
///
/// Posterior at x, in standardized target space, is the textbook form
///   mean = k(x,X) (K + noise I)^-1 y_std
///   var  = k(x,x) - k(x,X) (K + noise I)^-1 k(X,x)
/// then mapped back through the target standardization. A singular kernel
/// matrix is retried with jitter 1e-8 escalating tenfold up to 1e-4 before
/// failing.
class GpSurrogate {
public:
    explicit GpSurrogate(GpConfig config = {}) : config_(config) {}

    void add(std::array<double, 2> x, double y);

    std::size_t size() const { return targets_.size(); }
    const GpConfig& config() const { return config_; }
    const std::vector<std::array<double, 2>>& points() const { return points_; }
    const std::vector<double>& targets() const { return targets_; }

    /// Lowest observed target; requires size() >= 1.
    double best_observed() const;

    struct Posterior {
        double mean = 0.0;
        double stddev = 0.0;
    };

    Posterior posterior(std::array<double, 2> x) const;

private:
    void refit() const;

    GpConfig config_;
    std::vector<std::array<double, 2>> points_;
    std::vector<double> targets_;

    mutable bool dirty_ = true;
    mutable std::vector<double> chol_;  // lower-triangular factor, row-major
    mutable std::vector<double> alpha_; // (K + noise I)^-1 y_std
    mutable double target_mean_ = 0.0;
    mutable double target_scale_ = 1.0;
};

enum class AcquisitionKind { EI, PI, UCB };

AcquisitionKind parse_acquisition(const std::string& text);
const char* acquisition_name(AcquisitionKind kind);

/// Scores a candidate for a *minimization* problem:
///   EI  = E[max(best - xi - g, 0)] under the posterior Gaussian
///   PI  = Phi((best - mean - xi) / stddev)
///   UCB = -(mean - kappa * stddev)
/// EI and PI are 0 at stddev = 0.
double acquisition_value(double mean, double stddev, AcquisitionKind kind,
                         double best_so_far, double xi_or_kappa);

/// acquisition_value applied to the surrogate posterior at x.
double acquisition(const GpSurrogate& surrogate, std::array<double, 2> x,
                   AcquisitionKind kind, double best_so_far, double xi_or_kappa);

} // namespace hiforead
