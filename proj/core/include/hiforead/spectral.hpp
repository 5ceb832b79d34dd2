#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <vector>

namespace hiforead {

/// Half-spectrum of a mean-centered series: bins f = 0..floor(T/2) of the
/// discrete Fourier transform sum_t y(t) * exp(-2*pi*i*f*t / T).
struct Periodogram {
    std::size_t length = 0; // T of the input series
    std::vector<double> amplitude;
    std::vector<double> phase; // radians in (-pi, pi]
};

/// Computes the periodogram. Requires T >= 4 and finite values; the series
/// is mean-centered before the transform. Radix-2 FFT for power-of-two T,
/// table-driven direct DFT otherwise.
Periodogram periodogram(std::span<const double> y);

/// Dominant integer seasonal periods of a series, each >= 2.
using SeasonalitySet = std::set<int>;

/// Picks the `max_peaks` highest-amplitude strict local maxima among non-DC
/// bins (f >= 2), converts each to a period ceil(T/f), then drops periods
/// above tau and deduplicates. Empty output is legal.
SeasonalitySet dominant_periods(const Periodogram& p, int max_peaks, int tau);

/// |a intersect b| / |a union b|; 0 when both sets are empty.
double jaccard(const SeasonalitySet& a, const SeasonalitySet& b);

} // namespace hiforead
