#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hiforead/gp.hpp"

namespace hiforead {

/// Model order used throughout the ensemble: index 0 = lag_regression,
/// 1 = harmonic_regression, 2 = ets_additive.
inline constexpr std::size_t ensemble_model_count = 3;

/// A point on the 3-model weight simplex: w[i] >= 0, sum(w) = 1 within 1e-9.
struct EnsembleWeights {
    std::array<double, 3> w{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
};

/// Validation data for one fold: per-model forecasts over the validation
/// block plus the matching truth.
struct FoldObjectiveData {
    std::array<std::vector<double>, 3> model_forecasts;
    std::vector<double> truth;
};

struct BoConfig {
    AcquisitionKind acquisition = AcquisitionKind::EI;
    int init_points = 8;
    int iterations = 25;
    std::uint64_t seed = 0;
    GpConfig gp;
    double xi = 0.0;    // EI/PI exploration shift
    double kappa = 2.0; // UCB width
    int grid_resolution = 50;
};

struct BoResult {
    EnsembleWeights weights;
    double objective = 0.0;
    /// Best objective observed after each evaluation; non-increasing.
    std::vector<double> incumbent_trace;
    std::size_t evaluations = 0;
};

/// Bayesian optimization of the ensemble weights.
///
/// The objective is the mean over folds of the horizon-aggregate APE of the
/// weighted forecast; folds with zero truth sum are excluded (all excluded is
/// an error). Candidates live in (w1, w2) with w3 = 1 - w1 - w2. The init
/// design is the three simplex vertices, the centroid, then low-discrepancy
/// points, so the returned incumbent is never worse than the best single
/// model on validation. Deterministic for a fixed seed.
BoResult optimize_weights(const std::vector<FoldObjectiveData>& folds,
                          const BoConfig& config);

/// Elementwise weighted sum of the three model forecasts.
std::vector<double> combine(const std::array<std::vector<double>, 3>& forecasts,
                            const EnsembleWeights& weights);

} // namespace hiforead
