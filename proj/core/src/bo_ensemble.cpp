#include "hiforead/bo_ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hiforead/errors.hpp"
#include "hiforead/metrics.hpp"
#include "hiforead/parallel.hpp"

namespace hiforead {

namespace {

double halton(std::uint64_t index, std::uint64_t base) {
    double fraction = 1.0;
    double result = 0.0;
    while (index > 0) {
        fraction /= static_cast<double>(base);
        result += fraction * static_cast<double>(index % base);
        index /= base;
    }
    return result;
}

EnsembleWeights to_weights(std::array<double, 2> x) {
    EnsembleWeights weights;
    weights.w[0] = x[0];
    weights.w[1] = x[1];
    weights.w[2] = 1.0 - x[0] - x[1];
    if (weights.w[2] < 0.0) {
        weights.w[2] = 0.0;
        const double sum = weights.w[0] + weights.w[1];
        weights.w[0] /= sum;
        weights.w[1] /= sum;
    }
    return weights;
}

std::array<double, 2> clamp_to_simplex(std::array<double, 2> x) {
    x[0] = std::clamp(x[0], 0.0, 1.0);
    x[1] = std::clamp(x[1], 0.0, 1.0 - x[0]);
    return x;
}

} // namespace

std::vector<double> combine(const std::array<std::vector<double>, 3>& forecasts,
                            const EnsembleWeights& weights) {
    const std::size_t n = forecasts[0].size();
    if (forecasts[1].size() != n || forecasts[2].size() != n) {
        throw Error("combine: forecast length mismatch");
    }
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        out[t] = weights.w[0] * forecasts[0][t] + weights.w[1] * forecasts[1][t] +
                 weights.w[2] * forecasts[2][t];
    }
    return out;
}

BoResult optimize_weights(const std::vector<FoldObjectiveData>& folds,
                          const BoConfig& config) {
    if (folds.empty()) throw Error("optimize_weights: no folds");
    if (config.init_points < 3) throw Error("optimize_weights: init_points must be >= 3");
    if (config.iterations < 0) throw Error("optimize_weights: negative iterations");

    bool any_defined_fold = false;
    for (const auto& fold : folds) {
        const std::size_t n = fold.truth.size();
        for (const auto& f : fold.model_forecasts) {
            if (f.size() != n) throw Error("optimize_weights: fold length mismatch");
        }
        double truth_sum = 0.0;
        for (double v : fold.truth) truth_sum += v;
        if (truth_sum != 0.0) any_defined_fold = true;
    }
    if (!any_defined_fold) {
        throw Error("optimize_weights: APE undefined (zero truth sum) on every fold");
    }

    auto objective = [&](std::array<double, 2> x) {
        const EnsembleWeights weights = to_weights(x);
        double total = 0.0;
        std::size_t defined = 0;
        for (const auto& fold : folds) {
            const auto combined = combine(fold.model_forecasts, weights);
            if (const auto error = ape(combined, fold.truth)) {
                total += *error;
                ++defined;
            }
        }
        return total / static_cast<double>(defined);
    };

    BoResult result;
    GpSurrogate surrogate(config.gp);
    std::array<double, 2> incumbent_x{};
    double incumbent = 0.0;

    auto evaluate = [&](std::array<double, 2> x) {
        const double value = objective(x);
        surrogate.add(x, value);
        if (result.evaluations == 0 || value < incumbent) {
            incumbent = value;
            incumbent_x = x;
        }
        ++result.evaluations;
        result.incumbent_trace.push_back(incumbent);
    };

    // Init design: vertices, centroid, then a seeded Halton sequence folded
    // into the triangle.
    std::vector<std::array<double, 2>> init{{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}};
    if (config.init_points >= 4) init.push_back({1.0 / 3.0, 1.0 / 3.0});
    const std::uint64_t offset = 1 + (mix_seed(config.seed) % 64);
    for (std::uint64_t k = offset;
         init.size() < static_cast<std::size_t>(config.init_points); ++k) {
        double u = halton(k, 2);
        double v = halton(k, 3);
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        init.push_back({u, v});
    }
    for (const auto& x : init) evaluate(x);

    // Acquisition candidates: a dense triangular grid plus jittered copies of
    // the observed points.
    std::vector<std::array<double, 2>> grid;
    const int r = std::max(1, config.grid_resolution);
    grid.reserve(static_cast<std::size_t>((r + 1) * (r + 2) / 2));
    for (int i = 0; i <= r; ++i) {
        for (int j = 0; j <= r - i; ++j) {
            grid.push_back({static_cast<double>(i) / r, static_cast<double>(j) / r});
        }
    }
    std::mt19937_64 rng(mix_seed(config.seed, 0x626f6f7074ULL));
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);

    for (int it = 0; it < config.iterations; ++it) {
        std::vector<std::array<double, 2>> candidates = grid;
        for (const auto& p : surrogate.points()) {
            for (int c = 0; c < 2; ++c) {
                candidates.push_back(
                    clamp_to_simplex({p[0] + jitter(rng), p[1] + jitter(rng)}));
            }
        }
        double best_score = 0.0;
        std::size_t best_idx = candidates.size();
        const double param =
            config.acquisition == AcquisitionKind::UCB ? config.kappa : config.xi;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            const double score = acquisition(surrogate, candidates[c],
                                             config.acquisition, incumbent, param);
            if (best_idx == candidates.size() || score > best_score) {
                best_score = score;
                best_idx = c;
            }
        }
        evaluate(candidates[best_idx]);
    }

    result.weights = to_weights(incumbent_x);
    result.objective = incumbent;
    return result;
}

} // namespace hiforead
