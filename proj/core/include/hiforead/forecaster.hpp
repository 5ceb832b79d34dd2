#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hiforead/series.hpp"

namespace hiforead {

/// Base model families. The pipeline ensembles lag_regression,
/// harmonic_regression and ets_additive; seasonal_naive is a cheap reference
/// model.
enum class ModelKind { seasonal_naive, ets_additive, harmonic_regression, lag_regression };

const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// A fully specified forecaster: model family, hyper-parameters, and the
/// seasonal periods detected for the series (injected by the caller).
struct ForecasterSpec {
    ModelKind kind = ModelKind::ets_additive;
    std::map<std::string, double> hyper;
    std::vector<int> seasonal_periods;

    double hyper_or(const std::string& key, double fallback) const {
        auto it = hyper.find(key);
        return it == hyper.end() ? fallback : it->second;
    }
};

/// Absolute index of the first training observation; keeps periodic features
/// phase-aligned when a model is fit on a window that does not start at 0.
struct FitContext {
    std::int64_t start_index = 0;
};

namespace model_state {

struct SeasonalNaive {
    int period = 1;
    std::vector<double> last_cycle;
};

struct EtsAdditive {
    double level = 0.0;
    double trend = 0.0;
    std::vector<int> periods;
    std::vector<std::vector<double>> seasonal; // per period, indexed by t mod p
    std::size_t train_length = 0;
};

struct Harmonic {
    std::vector<double> coef;
    std::vector<int> periods;
    int fourier_order = 1;
    std::int64_t start_index = 0;
    std::size_t train_length = 0;
};

struct LagRegression {
    std::vector<double> coef;
    std::vector<int> lags;
    std::vector<int> periods;
    std::vector<double> tail; // last max(lags) observations, oldest first
    std::int64_t start_index = 0;
    std::size_t train_length = 0;
};

/// Level-only fallback for degenerate inputs.
struct Constant {
    double level = 0.0;
};

} // namespace model_state

/// Learned parameters plus one-step in-sample residuals (after warmup).
struct FitState {
    ModelKind kind = ModelKind::ets_additive;
    std::vector<double> residuals;
    bool degenerate_fallback = false;
    std::variant<model_state::SeasonalNaive, model_state::EtsAdditive,
                 model_state::Harmonic, model_state::LagRegression,
                 model_state::Constant>
        state;
};

/// Fits a model. Deterministic: identical (spec, train) pairs produce
/// bit-identical states. Throws Error when the series is too short for the
/// requested seasonal periods or lags.
FitState fit(const ForecasterSpec& spec, std::span<const double> train,
             const FitContext& context = {});

/// h-step-ahead forecast; deterministic given the state, and prefix-stable:
/// predict(s, a + b) starts with predict(s, a).
std::vector<double> predict(const FitState& state, std::size_t h_steps);

/// Picks the grid candidate with the lowest mean validation APE over the
/// folds (fit on each fold's train block, scored on its validation block).
/// Ties break toward the earliest grid position. Throws Error listing
/// per-candidate failures when no candidate can be evaluated.
ForecasterSpec select_hyperparams(ModelKind kind,
                                  const std::vector<ForecasterSpec>& grid,
                                  const std::vector<BacktestFold>& folds,
                                  std::span<const double> series);

} // namespace hiforead
