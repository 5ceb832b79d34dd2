#include "hiforead/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "hiforead/errors.hpp"
#include "hiforead/metrics.hpp"

namespace hiforead {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<int> sanitized_periods(const ForecasterSpec& spec,
                                   std::size_t train_length) {
    std::vector<int> periods;
    for (int p : spec.seasonal_periods) {
        if (p < 2) throw Error("seasonal period must be >= 2, got " + std::to_string(p));
        periods.push_back(p);
    }
    std::sort(periods.begin(), periods.end());
    periods.erase(std::unique(periods.begin(), periods.end()), periods.end());
    if (!periods.empty()) {
        const int max_p = periods.back();
        if (train_length < 2 * static_cast<std::size_t>(max_p)) {
            throw Error("series too short: " + std::to_string(train_length) +
                        " observations for seasonal period " + std::to_string(max_p));
        }
    }
    return periods;
}

bool is_constant(std::span<const double> y) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double max_dev = 0.0;
    for (double v : y) max_dev = std::max(max_dev, std::abs(v - mean));
    return max_dev <= 1e-12 * std::max(1.0, std::abs(mean));
}

double mean_of(std::span<const double> y) {
    double m = 0.0;
    for (double v : y) m += v;
    return m / static_cast<double>(y.size());
}

// Least squares fit of a + b*t over t = 0..n-1.
void line_fit(std::span<const double> y, double& a, double& b) {
    const double n = static_cast<double>(y.size());
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double td = static_cast<double>(t);
        st += td;
        sy += y[t];
        stt += td * td;
        sty += td * y[t];
    }
    const double denom = n * stt - st * st;
    if (denom == 0.0) {
        a = sy / n;
        b = 0.0;
        return;
    }
    b = (n * sty - st * sy) / denom;
    a = (sy - b * st) / n;
}

// Ridge regression; the intercept (column 0) is not penalized.
std::vector<double> ridge_solve(const std::vector<std::vector<double>>& rows,
                                const std::vector<double>& targets, double lambda) {
    const std::size_t n = rows.size();
    const std::size_t d = rows[0].size();
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                                static_cast<Eigen::Index>(d));
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < d; ++r) {
            xty(static_cast<Eigen::Index>(r)) += rows[i][r] * targets[i];
            for (std::size_t c = r; c < d; ++c) {
                xtx(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) +=
                    rows[i][r] * rows[i][c];
            }
        }
    }
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < r; ++c) {
            xtx(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                xtx(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
        }
    }
    for (std::size_t j = 1; j < d; ++j) {
        xtx(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += lambda;
    }
    const Eigen::VectorXd beta = xtx.ldlt().solve(xty);
    return {beta.data(), beta.data() + beta.size()};
}

void harmonic_features(std::vector<double>& row, std::int64_t u,
                       std::int64_t start_index, std::size_t train_length,
                       const std::vector<int>& periods, int order) {
    row.clear();
    row.push_back(1.0);
    row.push_back(static_cast<double>(u - start_index) /
                  static_cast<double>(train_length));
    for (int p : periods) {
        for (int f = 1; f <= order; ++f) {
            const double angle = two_pi * static_cast<double>(f) *
                                 static_cast<double>(u) / static_cast<double>(p);
            row.push_back(std::sin(angle));
            row.push_back(std::cos(angle));
        }
    }
}

void lag_features(std::vector<double>& row, std::int64_t u,
                  std::int64_t start_index, std::size_t train_length,
                  const std::vector<int>& periods,
                  const std::vector<double>& lag_values) {
    row.clear();
    row.push_back(1.0);
    row.push_back(static_cast<double>(u - start_index) /
                  static_cast<double>(train_length));
    row.insert(row.end(), lag_values.begin(), lag_values.end());
    for (int p : periods) {
        const double angle = two_pi * static_cast<double>(u) / static_cast<double>(p);
        row.push_back(std::sin(angle));
        row.push_back(std::cos(angle));
    }
}

void check_range(double value, double lo, double hi, const char* name) {
    if (!(value >= lo && value <= hi)) {
        throw Error(std::string("hyper-parameter ") + name + " = " +
                    std::to_string(value) + " out of range [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
}

FitState fit_seasonal_naive(const ForecasterSpec& spec,
                            std::span<const double> train,
                            const std::vector<int>& periods) {
    int period = static_cast<int>(spec.hyper_or("period", 0.0));
    if (period == 0) period = periods.empty() ? 1 : periods.back();
    if (period < 1) throw Error("seasonal_naive period must be >= 1");
    if (train.size() < static_cast<std::size_t>(period) + 1) {
        throw Error("series too short for seasonal_naive period " +
                    std::to_string(period));
    }

    FitState out;
    out.kind = ModelKind::seasonal_naive;
    model_state::SeasonalNaive s;
    s.period = period;
    s.last_cycle.assign(train.end() - period, train.end());
    const std::size_t warmup = static_cast<std::size_t>(period);
    out.residuals.reserve(train.size() - warmup);
    for (std::size_t t = warmup; t < train.size(); ++t) {
        out.residuals.push_back(train[t] - train[t - warmup]);
    }
    out.state = std::move(s);
    return out;
}

FitState fit_ets(const ForecasterSpec& spec, std::span<const double> train,
                 const std::vector<int>& periods) {
    const double alpha = spec.hyper_or("alpha", 0.3);
    const double beta = spec.hyper_or("beta", 0.1);
    check_range(alpha, 1e-6, 1.0, "alpha");
    check_range(beta, 0.0, 1.0, "beta");

    const std::size_t n = train.size();
    if (n < 3) throw Error("series too short for ets_additive");

    double intercept = 0.0, slope = 0.0;
    line_fit(train, intercept, slope);

    // Seasonal components by iterated phase averaging of the detrended series.
    std::vector<double> work(n);
    for (std::size_t t = 0; t < n; ++t) {
        work[t] = train[t] - (intercept + slope * static_cast<double>(t));
    }
    std::vector<std::vector<double>> seasonal(periods.size());
    for (std::size_t i = 0; i < periods.size(); ++i) {
        seasonal[i].assign(static_cast<std::size_t>(periods[i]), 0.0);
    }
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < periods.size(); ++i) {
            const std::size_t p = static_cast<std::size_t>(periods[i]);
            std::vector<double> phase_sum(p, 0.0);
            std::vector<std::size_t> phase_count(p, 0);
            for (std::size_t t = 0; t < n; ++t) {
                phase_sum[t % p] += work[t];
                ++phase_count[t % p];
            }
            double grand = 0.0;
            for (std::size_t ph = 0; ph < p; ++ph) {
                phase_sum[ph] /= static_cast<double>(phase_count[ph]);
                grand += phase_sum[ph];
            }
            grand /= static_cast<double>(p);
            for (std::size_t ph = 0; ph < p; ++ph) {
                const double component = phase_sum[ph] - grand;
                seasonal[i][ph] += component;
                for (std::size_t t = ph; t < n; t += p) work[t] -= component;
            }
        }
    }

    std::vector<double> deseason(train.begin(), train.end());
    for (std::size_t i = 0; i < periods.size(); ++i) {
        const std::size_t p = static_cast<std::size_t>(periods[i]);
        for (std::size_t t = 0; t < n; ++t) deseason[t] -= seasonal[i][t % p];
    }

    auto seasonal_at = [&](std::size_t t) {
        double s = 0.0;
        for (std::size_t i = 0; i < periods.size(); ++i) {
            s += seasonal[i][t % static_cast<std::size_t>(periods[i])];
        }
        return s;
    };

    // Holt's linear recursions on the deseasonalized series.
    double level = deseason[0];
    double trend = slope;
    const std::size_t warmup =
        periods.empty() ? 1 : static_cast<std::size_t>(periods.back());
    FitState out;
    out.kind = ModelKind::ets_additive;
    for (std::size_t t = 1; t < n; ++t) {
        const double one_step = level + trend + seasonal_at(t);
        if (t >= warmup) out.residuals.push_back(train[t] - one_step);
        const double prev_level = level;
        level = alpha * deseason[t] + (1.0 - alpha) * (level + trend);
        trend = beta * (level - prev_level) + (1.0 - beta) * trend;
    }

    model_state::EtsAdditive s;
    s.level = level;
    s.trend = trend;
    s.periods = periods;
    s.seasonal = std::move(seasonal);
    s.train_length = n;
    out.state = std::move(s);
    return out;
}

FitState fit_harmonic(const ForecasterSpec& spec, std::span<const double> train,
                      const std::vector<int>& periods, std::int64_t start_index) {
    const double lambda = spec.hyper_or("lambda", 1e-6);
    const int order = static_cast<int>(spec.hyper_or("fourier_order", 2.0));
    check_range(lambda, 0.0, 1e6, "lambda");
    check_range(order, 1, 4, "fourier_order");

    const std::size_t n = train.size();
    const std::size_t d = 2 + 2 * periods.size() * static_cast<std::size_t>(order);
    if (n < d + 1) throw Error("series too short for harmonic_regression");

    if (is_constant(train)) {
        FitState out;
        out.kind = ModelKind::harmonic_regression;
        out.degenerate_fallback = true;
        out.state = model_state::Constant{mean_of(train)};
        const std::size_t warmup =
            periods.empty() ? 0 : static_cast<std::size_t>(periods.back());
        out.residuals.assign(n - warmup, 0.0);
        return out;
    }

    std::vector<std::vector<double>> rows(n);
    std::vector<double> targets(train.begin(), train.end());
    for (std::size_t t = 0; t < n; ++t) {
        harmonic_features(rows[t], start_index + static_cast<std::int64_t>(t),
                          start_index, n, periods, order);
    }
    model_state::Harmonic s;
    s.coef = ridge_solve(rows, targets, lambda);
    s.periods = periods;
    s.fourier_order = order;
    s.start_index = start_index;
    s.train_length = n;

    FitState out;
    out.kind = ModelKind::harmonic_regression;
    const std::size_t warmup =
        periods.empty() ? 0 : static_cast<std::size_t>(periods.back());
    for (std::size_t t = warmup; t < n; ++t) {
        double fitted = 0.0;
        for (std::size_t j = 0; j < s.coef.size(); ++j) fitted += s.coef[j] * rows[t][j];
        out.residuals.push_back(train[t] - fitted);
    }
    out.state = std::move(s);
    return out;
}

FitState fit_lag(const ForecasterSpec& spec, std::span<const double> train,
                 const std::vector<int>& periods, std::int64_t start_index) {
    double lambda = spec.hyper_or("lambda", 1e-2);
    check_range(lambda, 0.0, 1e6, "lambda");
    lambda = std::max(lambda, 1e-8);

    std::vector<int> lags{1, 2};
    for (int p : periods) {
        if (p > 2) lags.push_back(p);
    }
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    const std::size_t max_lag = static_cast<std::size_t>(lags.back());

    const std::size_t n = train.size();
    const std::size_t d = 2 + lags.size() + 2 * periods.size();
    if (n < max_lag + d + 1) throw Error("series too short for lag_regression");

    if (is_constant(train)) {
        FitState out;
        out.kind = ModelKind::lag_regression;
        out.degenerate_fallback = true;
        out.state = model_state::Constant{mean_of(train)};
        const std::size_t warmup = std::max(
            max_lag, periods.empty() ? std::size_t{0}
                                     : static_cast<std::size_t>(periods.back()));
        out.residuals.assign(n - warmup, 0.0);
        return out;
    }

    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    std::vector<double> lag_values(lags.size());
    rows.reserve(n - max_lag);
    for (std::size_t t = max_lag; t < n; ++t) {
        for (std::size_t j = 0; j < lags.size(); ++j) {
            lag_values[j] = train[t - static_cast<std::size_t>(lags[j])];
        }
        rows.emplace_back();
        lag_features(rows.back(), start_index + static_cast<std::int64_t>(t),
                     start_index, n, periods, lag_values);
        targets.push_back(train[t]);
    }

    model_state::LagRegression s;
    s.coef = ridge_solve(rows, targets, lambda);
    s.lags = lags;
    s.periods = periods;
    s.tail.assign(train.end() - static_cast<std::ptrdiff_t>(max_lag), train.end());
    s.start_index = start_index;
    s.train_length = n;

    FitState out;
    out.kind = ModelKind::lag_regression;
    const std::size_t warmup = std::max(
        max_lag,
        periods.empty() ? std::size_t{0} : static_cast<std::size_t>(periods.back()));
    for (std::size_t t = warmup; t < n; ++t) {
        const auto& row = rows[t - max_lag];
        double fitted = 0.0;
        for (std::size_t j = 0; j < s.coef.size(); ++j) fitted += s.coef[j] * row[j];
        out.residuals.push_back(train[t] - fitted);
    }
    out.state = std::move(s);
    return out;
}

} // namespace

const char* model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::seasonal_naive: return "seasonal_naive";
        case ModelKind::ets_additive: return "ets_additive";
        case ModelKind::harmonic_regression: return "harmonic_regression";
        case ModelKind::lag_regression: return "lag_regression";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& text) {
    if (text == "seasonal_naive") return ModelKind::seasonal_naive;
    if (text == "ets_additive") return ModelKind::ets_additive;
    if (text == "harmonic_regression") return ModelKind::harmonic_regression;
    if (text == "lag_regression") return ModelKind::lag_regression;
    throw ConfigError("unknown model kind '" + text + "'");
}

FitState fit(const ForecasterSpec& spec, std::span<const double> train,
             const FitContext& context) {
    if (train.empty()) throw Error("fit: empty training series");
    for (double v : train) {
        if (!std::isfinite(v)) throw Error("fit: non-finite training value");
    }
    const std::vector<int> periods = sanitized_periods(spec, train.size());
    switch (spec.kind) {
        case ModelKind::seasonal_naive:
            return fit_seasonal_naive(spec, train, periods);
        case ModelKind::ets_additive:
            return fit_ets(spec, train, periods);
        case ModelKind::harmonic_regression:
            return fit_harmonic(spec, train, periods, context.start_index);
        case ModelKind::lag_regression:
            return fit_lag(spec, train, periods, context.start_index);
    }
    throw Error("fit: unknown model kind");
}

std::vector<double> predict(const FitState& state, std::size_t h_steps) {
    if (h_steps == 0) throw Error("predict: h_steps must be >= 1");
    std::vector<double> out;
    out.reserve(h_steps);

    if (const auto* c = std::get_if<model_state::Constant>(&state.state)) {
        out.assign(h_steps, c->level);
        return out;
    }
    if (const auto* s = std::get_if<model_state::SeasonalNaive>(&state.state)) {
        for (std::size_t j = 0; j < h_steps; ++j) {
            out.push_back(s->last_cycle[j % s->last_cycle.size()]);
        }
        return out;
    }
    if (const auto* s = std::get_if<model_state::EtsAdditive>(&state.state)) {
        for (std::size_t j = 0; j < h_steps; ++j) {
            double value = s->level + static_cast<double>(j + 1) * s->trend;
            for (std::size_t i = 0; i < s->periods.size(); ++i) {
                value += s->seasonal[i][(s->train_length + j) %
                                        static_cast<std::size_t>(s->periods[i])];
            }
            out.push_back(value);
        }
        return out;
    }
    if (const auto* s = std::get_if<model_state::Harmonic>(&state.state)) {
        std::vector<double> row;
        for (std::size_t j = 0; j < h_steps; ++j) {
            const std::int64_t u = s->start_index +
                                   static_cast<std::int64_t>(s->train_length + j);
            harmonic_features(row, u, s->start_index, s->train_length, s->periods,
                              s->fourier_order);
            double value = 0.0;
            for (std::size_t k = 0; k < s->coef.size(); ++k) value += s->coef[k] * row[k];
            out.push_back(value);
        }
        return out;
    }
    const auto& s = std::get<model_state::LagRegression>(state.state);
    std::vector<double> extended = s.tail; // recursive forecasts appended
    std::vector<double> row;
    std::vector<double> lag_values(s.lags.size());
    for (std::size_t j = 0; j < h_steps; ++j) {
        const std::size_t pos = extended.size();
        for (std::size_t k = 0; k < s.lags.size(); ++k) {
            lag_values[k] = extended[pos - static_cast<std::size_t>(s.lags[k])];
        }
        const std::int64_t u =
            s.start_index + static_cast<std::int64_t>(s.train_length + j);
        lag_features(row, u, s.start_index, s.train_length, s.periods, lag_values);
        double value = 0.0;
        for (std::size_t k = 0; k < s.coef.size(); ++k) value += s.coef[k] * row[k];
        out.push_back(value);
        extended.push_back(value);
    }
    return out;
}

ForecasterSpec select_hyperparams(ModelKind kind,
                                  const std::vector<ForecasterSpec>& grid,
                                  const std::vector<BacktestFold>& folds,
                                  std::span<const double> series) {
    if (grid.empty()) throw Error("select_hyperparams: empty grid");
    if (folds.empty()) throw Error("select_hyperparams: no folds");

    std::size_t best = grid.size();
    double best_score = 0.0;
    std::string failures;

    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (grid[g].kind != kind) {
            throw Error("select_hyperparams: grid candidate kind mismatch");
        }
        double total = 0.0;
        std::size_t defined = 0;
        std::string failure;
        for (const auto& fold : folds) {
            try {
                const auto train = series.subspan(fold.train_begin,
                                                  fold.train_end - fold.train_begin);
                const FitState state =
                    fit(grid[g], train,
                        {static_cast<std::int64_t>(fold.train_begin)});
                const auto forecast = predict(state, fold.val_end - fold.val_begin);
                const auto truth =
                    series.subspan(fold.val_begin, fold.val_end - fold.val_begin);
                if (const auto error = ape(forecast, truth)) {
                    total += *error;
                    ++defined;
                }
            } catch (const std::exception& e) {
                failure = e.what();
                break;
            }
        }
        if (!failure.empty() || defined == 0) {
            failures += "\n  candidate " + std::to_string(g) + ": " +
                        (failure.empty() ? "validation APE undefined on all folds"
                                         : failure);
            continue;
        }
        const double score = total / static_cast<double>(defined);
        if (best == grid.size() || score < best_score) {
            best = g;
            best_score = score;
        }
    }

    if (best == grid.size()) {
        throw Error("select_hyperparams: all candidates failed:" + failures);
    }
    return grid[best];
}

} // namespace hiforead
