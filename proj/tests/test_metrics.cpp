#include <doctest.h>

#include <algorithm>
#include <random>

#include "hiforead/errors.hpp"
#include "hiforead/metrics.hpp"

using namespace hiforead;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("aggregate ape") {
    CHECK(*ape(std::vector<double>{55.0, 55.0}, std::vector<double>{60.0, 40.0}) ==
          doctest::Approx(0.10));
    CHECK(*ape(std::vector<double>{1.0, 2.0, 3.0}, std::vector<double>{1.0, 2.0, 3.0}) ==
          0.0);
    CHECK(*ape(std::vector<double>{10.0, 20.0}, std::vector<double>{5.0, 5.0}) ==
          doctest::Approx(2.0));
    CHECK(!ape(std::vector<double>{1.0}, std::vector<double>{0.0}).has_value());
    // Opposite-sign actuals cancel to zero as well.
    CHECK(!ape(std::vector<double>{1.0, 1.0}, std::vector<double>{-3.0, 3.0})
               .has_value());
    CHECK_THROWS_AS(ape(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                    Error);
}

TEST_CASE("ape is scale invariant") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> value(0.5, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> f(6), a(6);
        for (std::size_t t = 0; t < 6; ++t) {
            f[t] = value(rng);
            a[t] = value(rng);
        }
        const double c = value(rng);
        std::vector<double> fc = f, ac = a;
        for (double& v : fc) v *= c;
        for (double& v : ac) v *= c;
        CHECK(*ape(fc, ac) == doctest::Approx(*ape(f, a)).epsilon(1e-12));
    }
}

TEST_CASE("level summary mean and median") {
    const LevelSummary odd = level_summary({0.1, 0.2, 0.3});
    CHECK(odd.mean == doctest::Approx(0.2));
    CHECK(odd.median == doctest::Approx(0.2));

    const LevelSummary even = level_summary({0.9, 0.1});
    CHECK(even.mean == doctest::Approx(0.5));
    CHECK(even.median == doctest::Approx(0.5));

    CHECK_THROWS_AS(level_summary({}), Error);
}

TEST_CASE("level summary matches a sort-based oracle") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> value(0.0, 2.0);
    std::vector<double> apes(31);
    for (double& v : apes) v = value(rng);

    double total = 0.0;
    for (double v : apes) total += v;
    std::vector<double> sorted = apes;
    std::sort(sorted.begin(), sorted.end());

    const LevelSummary summary = level_summary(apes);
    CHECK(summary.mean == doctest::Approx(total / 31.0).epsilon(1e-12));
    CHECK(summary.median == doctest::Approx(sorted[15]).epsilon(1e-12));
}

TEST_CASE("mean is permutation invariant") {
    std::mt19937_64 rng(37);
    std::vector<double> apes(16);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    for (double& v : apes) v = value(rng);
    const LevelSummary before = level_summary(apes);
    std::shuffle(apes.begin(), apes.end(), rng);
    const LevelSummary after = level_summary(apes);
    CHECK(before.mean == doctest::Approx(after.mean).epsilon(1e-15));
    CHECK(before.median == after.median);
}

TEST_SUITE_END();
