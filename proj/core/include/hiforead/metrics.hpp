#pragma once

#include <optional>
#include <span>
#include <vector>

namespace hiforead {

/// Absolute percentage error of the horizon-summed forecast against the
/// horizon-summed truth: |sum(forecast) - sum(actual)| / |sum(actual)|.
/// Returns nullopt when the actual sum is zero (undefined APE).
std::optional<double> ape(std::span<const double> forecast,
                          std::span<const double> actual);

struct LevelSummary {
    double mean = 0.0;
    double median = 0.0;
};

/// Mean and median of per-node APE values at one level. The median is the
/// middle element for odd counts and the average of the two middle elements
/// for even counts. Throws Error when `apes` is empty.
LevelSummary level_summary(std::vector<double> apes);

} // namespace hiforead
