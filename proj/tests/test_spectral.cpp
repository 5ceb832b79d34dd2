#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "hiforead/errors.hpp"
#include "hiforead/spectral.hpp"

using namespace hiforead;

namespace {

std::vector<double> cosine(std::size_t length, double period, double amplitude,
                           double phase = 0.0) {
    std::vector<double> y(length);
    for (std::size_t t = 0; t < length; ++t) {
        y[t] = amplitude * std::cos(2.0 * std::numbers::pi *
                                    (static_cast<double>(t) + phase) / period);
    }
    return y;
}

// Naive reference DFT, independent of the library transform.
std::vector<double> naive_amplitudes(const std::vector<double>& y) {
    const std::size_t n = y.size();
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> amps(n / 2 + 1);
    for (std::size_t f = 0; f <= n / 2; ++f) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(f) *
                                 static_cast<double>(t) / static_cast<double>(n);
            acc += (y[t] - mean) * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        amps[f] = std::abs(acc);
    }
    return amps;
}

} // namespace

TEST_SUITE_BEGIN("spectral");

TEST_CASE("pure cosine concentrates at its bin") {
    const auto y = cosine(64, 8.0, 1.0);
    const Periodogram p = periodogram(y);
    REQUIRE(p.amplitude.size() == 33);
    CHECK(p.amplitude[8] == doctest::Approx(32.0).epsilon(1e-9));
    for (std::size_t f = 0; f < p.amplitude.size(); ++f) {
        if (f != 8) CHECK(p.amplitude[f] < 1e-9);
    }
    CHECK(dominant_periods(p, 3, 100) == SeasonalitySet{8});
}

TEST_CASE("constant series has an empty non-DC spectrum") {
    const std::vector<double> y(32, 5.5);
    const Periodogram p = periodogram(y);
    for (std::size_t f = 1; f < p.amplitude.size(); ++f) {
        CHECK(p.amplitude[f] < 1e-9);
    }
    CHECK(dominant_periods(p, 5, 16).empty());
}

TEST_CASE("two planted components both dominate (T=420)") {
    auto y = cosine(420, 7.0, 1.0);
    const auto second = cosine(420, 30.0, 0.8);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] += second[t];

    const Periodogram p = periodogram(y);
    // Direct DFT evaluation oracle.
    const auto reference = naive_amplitudes(y);
    REQUIRE(reference.size() == p.amplitude.size());
    for (std::size_t f = 0; f < reference.size(); ++f) {
        CHECK(p.amplitude[f] == doctest::Approx(reference[f]).epsilon(1e-9));
    }
    CHECK(p.amplitude[60] == doctest::Approx(210.0).epsilon(1e-9));
    CHECK(p.amplitude[14] == doctest::Approx(168.0).epsilon(1e-9));

    const SeasonalitySet periods = dominant_periods(p, 3, 210);
    CHECK(periods.count(7) == 1);
    CHECK(periods.count(30) == 1);
}

TEST_CASE("parseval energy identity on the centered series") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (const std::size_t n : {64, 100, 255}) {
        std::vector<double> y(n);
        for (double& v : y) v = 3.0 + noise(rng);
        double mean = 0.0;
        for (double v : y) mean += v;
        mean /= static_cast<double>(n);
        double energy = 0.0;
        for (double v : y) energy += (v - mean) * (v - mean);

        const Periodogram p = periodogram(y);
        double spectral = p.amplitude[0] * p.amplitude[0];
        const std::size_t half = n / 2;
        for (std::size_t f = 1; f <= half; ++f) {
            const bool self_conjugate = (n % 2 == 0) && f == half;
            spectral += (self_conjugate ? 1.0 : 2.0) * p.amplitude[f] * p.amplitude[f];
        }
        spectral /= static_cast<double>(n);
        CHECK(spectral == doctest::Approx(energy).epsilon(1e-9));
    }
}

TEST_CASE("tau filters large periods; ceiling deduplicates") {
    const auto y = cosine(64, 8.0, 1.0);
    const Periodogram p = periodogram(y);
    CHECK(dominant_periods(p, 3, 5).empty()); // 8 > tau
    CHECK_THROWS_AS(dominant_periods(p, 0, 10), Error);
    CHECK_THROWS_AS(dominant_periods(p, 3, 1), Error);

    // Frequencies 29 and 30 of T=256 both ceil to period 9.
    std::vector<double> two(256, 0.0);
    for (std::size_t t = 0; t < two.size(); ++t) {
        const double tt = static_cast<double>(t);
        two[t] = std::cos(2.0 * std::numbers::pi * 29.0 * tt / 256.0) +
                 std::cos(2.0 * std::numbers::pi * 31.0 * tt / 256.0);
    }
    const SeasonalitySet periods = dominant_periods(periodogram(two), 5, 128);
    CHECK(periods.count(9) == 1); // ceil(256/29) and ceil(256/31) are both 9
    CHECK(periods.size() == 1);
}

TEST_CASE("dominant periods are scale invariant") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> noise(0.0, 0.2);
    std::vector<double> y = cosine(140, 7.0, 1.0);
    for (double& v : y) v += noise(rng);

    const SeasonalitySet base = dominant_periods(periodogram(y), 4, 70);
    std::vector<double> scaled = y;
    for (double& v : scaled) v *= 37.5;
    CHECK(dominant_periods(periodogram(scaled), 4, 70) == base);
}

TEST_CASE("jaccard similarity") {
    CHECK(jaccard({7, 14}, {7, 28}) == doctest::Approx(1.0 / 3.0));
    CHECK(jaccard({7, 14}, {7, 14}) == 1.0);
    CHECK(jaccard({7}, {12}) == 0.0);
    CHECK(jaccard({}, {}) == 0.0);
    CHECK(jaccard({}, {7}) == 0.0);

    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        SeasonalitySet a, b;
        for (int i = 0; i < 4; ++i) {
            if (rng() % 2) a.insert(2 + static_cast<int>(rng() % 10));
            if (rng() % 2) b.insert(2 + static_cast<int>(rng() % 10));
        }
        const double j_ab = jaccard(a, b);
        CHECK(j_ab == jaccard(b, a));
        CHECK(j_ab >= 0.0);
        CHECK(j_ab <= 1.0);
        if (j_ab == 1.0) {
            CHECK(a == b);
            CHECK(!a.empty());
        }
        if (a == b && !a.empty()) CHECK(j_ab == 1.0);
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(periodogram(std::vector<double>{1.0, 2.0}), Error);
    std::vector<double> bad(16, 1.0);
    bad[7] = std::nan("");
    CHECK_THROWS_AS(periodogram(bad), Error);
}

TEST_CASE("planted seasonality recovery smoke test") {
    std::mt19937_64 rng(97);
    int recovered = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::normal_distribution<double> noise(0.0, 0.2); // SNR 5
        std::vector<double> y = cosine(140, 7.0, 1.0);
        for (double& v : y) v += noise(rng);
        const SeasonalitySet periods = dominant_periods(periodogram(y), 3, 70);
        if (periods.count(7) == 1) ++recovered;
    }
    CHECK(recovered >= 19);
}

TEST_SUITE_END();
