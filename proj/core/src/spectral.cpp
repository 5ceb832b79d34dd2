#include "hiforead/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "hiforead/errors.hpp"

namespace hiforead {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT.
void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Direct DFT of the half spectrum using a precomputed twiddle table; fine at
// desk scale (T <= ~2000).
std::vector<std::complex<double>> dft_half(const std::vector<double>& y) {
    const std::size_t n = y.size();
    std::vector<std::complex<double>> twiddle(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                             static_cast<double>(n);
        twiddle[k] = {std::cos(angle), std::sin(angle)};
    }
    const std::size_t half = n / 2;
    std::vector<std::complex<double>> bins(half + 1);
    for (std::size_t f = 0; f <= half; ++f) {
        std::complex<double> acc(0.0, 0.0);
        std::size_t idx = 0;
        for (std::size_t t = 0; t < n; ++t) {
            acc += y[t] * twiddle[idx];
            idx += f;
            if (idx >= n) idx -= n;
        }
        bins[f] = acc;
    }
    return bins;
}

} // namespace

Periodogram periodogram(std::span<const double> y) {
    const std::size_t n = y.size();
    if (n < 4) throw Error("periodogram requires at least 4 observations");

    double mean = 0.0;
    for (double v : y) {
        if (!std::isfinite(v)) throw Error("periodogram input contains non-finite values");
        mean += v;
    }
    mean /= static_cast<double>(n);

    std::vector<double> centered(n);
    for (std::size_t t = 0; t < n; ++t) centered[t] = y[t] - mean;

    std::vector<std::complex<double>> bins;
    if (is_power_of_two(n)) {
        std::vector<std::complex<double>> a(centered.begin(), centered.end());
        fft_radix2(a);
        bins.assign(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n / 2) + 1);
    } else {
        bins = dft_half(centered);
    }

    Periodogram p;
    p.length = n;
    p.amplitude.resize(bins.size());
    p.phase.resize(bins.size());
    for (std::size_t f = 0; f < bins.size(); ++f) {
        p.amplitude[f] = std::abs(bins[f]);
        p.phase[f] = std::atan2(bins[f].imag(), bins[f].real());
    }
    return p;
}

SeasonalitySet dominant_periods(const Periodogram& p, int max_peaks, int tau) {
    if (max_peaks < 1) throw Error("dominant_periods: max_peaks must be >= 1");
    if (tau < 2) throw Error("dominant_periods: tau must be >= 2");

    // Strict local maxima over frequency index, excluding f = 0 and f = 1.
    const std::size_t last = p.amplitude.empty() ? 0 : p.amplitude.size() - 1;
    std::vector<std::size_t> peaks;
    for (std::size_t f = 2; f <= last; ++f) {
        const double a = p.amplitude[f];
        const bool left_ok = a > p.amplitude[f - 1];
        const bool right_ok = f == last || a > p.amplitude[f + 1];
        if (left_ok && right_ok) peaks.push_back(f);
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [&](std::size_t lhs, std::size_t rhs) {
                         if (p.amplitude[lhs] != p.amplitude[rhs]) {
                             return p.amplitude[lhs] > p.amplitude[rhs];
                         }
                         return lhs < rhs;
                     });
    if (peaks.size() > static_cast<std::size_t>(max_peaks)) {
        peaks.resize(static_cast<std::size_t>(max_peaks));
    }

    SeasonalitySet periods;
    for (std::size_t f : peaks) {
        const int period = static_cast<int>(
            (p.length + f - 1) / f); // ceil(T / f)
        if (period <= tau) periods.insert(period);
    }
    return periods;
}

double jaccard(const SeasonalitySet& a, const SeasonalitySet& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t common = 0;
    for (int v : a) common += b.count(v);
    const std::size_t total = a.size() + b.size() - common;
    return static_cast<double>(common) / static_cast<double>(total);
}

} // namespace hiforead
