#include "hiforead/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hiforead/errors.hpp"

namespace hiforead {

std::optional<double> ape(std::span<const double> forecast,
                          std::span<const double> actual) {
    if (forecast.size() != actual.size()) {
        throw Error("ape: forecast and actual lengths differ");
    }
    double forecast_sum = 0.0;
    double actual_sum = 0.0;
    for (std::size_t t = 0; t < actual.size(); ++t) {
        forecast_sum += forecast[t];
        actual_sum += actual[t];
    }
    if (actual_sum == 0.0) return std::nullopt;
    return std::abs(forecast_sum - actual_sum) / std::abs(actual_sum);
}

LevelSummary level_summary(std::vector<double> apes) {
    if (apes.empty()) throw Error("level_summary: no defined APE values");
    LevelSummary summary;
    double total = 0.0;
    for (double v : apes) total += v;
    summary.mean = total / static_cast<double>(apes.size());

    std::sort(apes.begin(), apes.end());
    const std::size_t n = apes.size();
    summary.median = (n % 2 == 1)
                         ? apes[n / 2]
                         : 0.5 * (apes[n / 2 - 1] + apes[n / 2]);
    return summary;
}

} // namespace hiforead
