#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "hiforead/errors.hpp"
#include "hiforead/series.hpp"
#include "support/synthetic.hpp"

using namespace hiforead;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "hiforead_tests" / name;
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
    return path.string();
}

} // namespace

TEST_SUITE_BEGIN("ingestion");

TEST_CASE("time keys round-trip") {
    CHECK(parse_time_key("2018-01-01", Frequency::daily, "t") == 17532);
    CHECK(format_time_key(17532, Frequency::daily) == "2018-01-01");
    CHECK(parse_time_key("1998-Q1", Frequency::quarterly, "t") == 1998 * 4);
    CHECK(format_time_key(1998 * 4 + 3, Frequency::quarterly) == "1998-Q4");

    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const std::int64_t day = static_cast<std::int64_t>(rng() % 40000);
        CHECK(parse_time_key(format_time_key(day, Frequency::daily),
                             Frequency::daily, "t") == day);
    }

    CHECK_THROWS_AS(parse_time_key("2018-13-01", Frequency::daily, "t"), DataError);
    CHECK_THROWS_AS(parse_time_key("2018-02-30", Frequency::daily, "t"), DataError);
    CHECK_THROWS_AS(parse_time_key("2018-Q5", Frequency::quarterly, "t"), DataError);
    CHECK_THROWS_AS(parse_time_key("garbage", Frequency::daily, "t"), DataError);
    // Leap day parses.
    CHECK(parse_time_key("2020-02-29", Frequency::daily, "t") ==
          parse_time_key("2020-02-28", Frequency::daily, "t") + 1);
}

TEST_CASE("long csv loading") {
    const auto dir = temp_dir("csv");

    SUBCASE("well-formed file") {
        const auto path = write_file(dir / "ok.csv",
                                     "series_id,timestamp,value\n"
                                     "A,2020-01-01,1.5\n"
                                     "A,2020-01-02,2.5\n"
                                     "B,2020-01-01,3.0\n");
        const auto records =
            load_long_csv(path, "series_id", "timestamp", "value", Frequency::daily);
        REQUIRE(records.size() == 3);
        CHECK(records[0].id == "A");
        CHECK(records[1].time_key == records[0].time_key + 1);
        CHECK(records[2].value == 3.0);
    }

    SUBCASE("empty file reports no records") {
        const auto path = write_file(dir / "empty.csv", "");
        CHECK_THROWS_WITH_AS(
            load_long_csv(path, "series_id", "timestamp", "value", Frequency::daily),
            doctest::Contains("no records"), DataError);
        const auto header_only =
            write_file(dir / "header.csv", "series_id,timestamp,value\n");
        CHECK_THROWS_WITH_AS(load_long_csv(header_only, "series_id", "timestamp",
                                           "value", Frequency::daily),
                             doctest::Contains("no records"), DataError);
    }

    SUBCASE("non-numeric value names the line") {
        const auto path = write_file(dir / "bad_value.csv",
                                     "series_id,timestamp,value\n"
                                     "A,2020-01-01,1.5\n"
                                     "A,2020-01-02,abc\n");
        CHECK_THROWS_WITH_AS(
            load_long_csv(path, "series_id", "timestamp", "value", Frequency::daily),
            doctest::Contains(":3"), DataError);
    }

    SUBCASE("malformed row names the line") {
        const auto path = write_file(dir / "bad_row.csv",
                                     "series_id,timestamp,value\n"
                                     "A,2020-01-01\n");
        CHECK_THROWS_WITH_AS(
            load_long_csv(path, "series_id", "timestamp", "value", Frequency::daily),
            doctest::Contains(":2"), DataError);
    }

    SUBCASE("missing column is reported by name") {
        const auto path = write_file(dir / "cols.csv", "id,when,value\nA,2020-01-01,1\n");
        CHECK_THROWS_WITH_AS(
            load_long_csv(path, "series_id", "when", "value", Frequency::daily),
            doctest::Contains("series_id"), DataError);
    }
}

TEST_CASE("series frame construction") {
    const Hierarchy h = build_hierarchy({{"R", "A"}, {"R", "B"}});
    auto record = [](const NodeId& id, std::int64_t t, double v) {
        return RawRecord{id, t, v};
    };

    SUBCASE("interior gaps zero-fill and are masked") {
        std::vector<RawRecord> records;
        for (std::int64_t t = 0; t < 10; ++t) {
            if (t != 3 && t != 4 && t != 7) records.push_back(record("A", t, 2.0));
            records.push_back(record("B", t, 1.0));
        }
        const SeriesFrame frame = build_series_frame(records, h, FillPolicy::zero);
        REQUIRE(frame.length() == 10);
        const auto& a = frame.values[h.index_of("A")];
        CHECK(a[3] == 0.0);
        CHECK(a[4] == 0.0);
        CHECK(a[7] == 0.0);
        CHECK(a[2] == 2.0);
        int masked = 0;
        for (auto m : frame.fill_mask[0]) masked += m;
        CHECK(masked == 3);
        // Observed positions are bit-identical to the input.
        CHECK(frame.fill_mask[0][2] == 0);
    }

    SUBCASE("dense input is an identity with an all-false mask") {
        std::vector<RawRecord> records;
        for (std::int64_t t = 0; t < 6; ++t) {
            records.push_back(record("A", t + 100, 1.25 * static_cast<double>(t)));
            records.push_back(record("B", t + 100, 3.0));
        }
        const SeriesFrame frame = build_series_frame(records, h, FillPolicy::zero);
        CHECK(frame.start_key == 100);
        for (const auto& mask : frame.fill_mask) {
            for (auto m : mask) CHECK(m == 0);
        }
        CHECK(frame.values[h.index_of("A")][4] == 5.0);
    }

    SUBCASE("parents equal independent sums of the raw records") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> value(0.0, 50.0);
        std::vector<RawRecord> records;
        std::vector<double> expected_root(8, 0.0);
        for (std::int64_t t = 0; t < 8; ++t) {
            for (const NodeId id : {"A", "B"}) {
                const double v = value(rng);
                records.push_back(record(id, t, v));
                expected_root[static_cast<std::size_t>(t)] += v;
            }
        }
        const SeriesFrame frame = build_series_frame(records, h, FillPolicy::zero);
        for (std::size_t t = 0; t < 8; ++t) {
            CHECK(frame.values[h.root()][t] ==
                  doctest::Approx(expected_root[t]).epsilon(1e-12));
        }
        // History is coherent by construction.
        ForecastSet f;
        f.values = frame.values;
        CHECK(check_coherence(h, f, 0.0).coherent);
    }

    SUBCASE("linear fill interpolates interior gaps and holds edges") {
        std::vector<RawRecord> records{record("A", 2, 10.0), record("A", 5, 4.0),
                                       record("B", 0, 1.0),  record("B", 1, 1.0),
                                       record("B", 2, 1.0),  record("B", 3, 1.0),
                                       record("B", 4, 1.0),  record("B", 5, 1.0)};
        const SeriesFrame frame = build_series_frame(records, h, FillPolicy::linear);
        const auto& a = frame.values[h.index_of("A")];
        CHECK(a[0] == 10.0); // edge hold
        CHECK(a[1] == 10.0);
        CHECK(a[3] == doctest::Approx(8.0));
        CHECK(a[4] == doctest::Approx(6.0));
        CHECK(a[5] == 4.0);
    }

    SUBCASE("bad ids and duplicates are rejected") {
        CHECK_THROWS_WITH_AS(
            build_series_frame({record("Z", 0, 1.0), record("A", 0, 1.0)}, h,
                               FillPolicy::zero),
            doctest::Contains("Z"), Error);
        CHECK_THROWS_WITH_AS(
            build_series_frame({record("R", 0, 1.0), record("A", 0, 1.0)}, h,
                               FillPolicy::zero),
            doctest::Contains("not a leaf"), DataError);
        CHECK_THROWS_WITH_AS(
            build_series_frame(
                {record("A", 0, 1.0), record("A", 0, 2.0), record("B", 0, 1.0)},
                h, FillPolicy::zero),
            doctest::Contains("duplicate"), DataError);
        CHECK_THROWS_WITH_AS(
            build_series_frame({record("A", 0, 1.0)}, h, FillPolicy::zero),
            doctest::Contains("no records for leaf"), DataError);
    }
}

TEST_CASE("rolling-origin folds") {
    SUBCASE("traffic-shaped layout") {
        const auto folds = make_folds(440, 70, 4, 140);
        REQUIRE(folds.size() == 4);
        CHECK(folds[3].test_begin == 370);
        CHECK(folds[3].test_end == 440);
        CHECK(folds[0].test_begin == 160);
        CHECK(folds[0].test_end == 230);
        CHECK(folds[0].val_begin == 90);
        CHECK(folds[0].val_end == 160);
        CHECK(folds[0].train_begin == 0);
        CHECK(folds[0].train_end == 90);
    }

    SUBCASE("minimal single fold") {
        const std::size_t h = 7;
        const auto folds = make_folds(3 * h, h, 1, 2 * h);
        REQUIRE(folds.size() == 1);
        CHECK(folds[0].train_begin == 0);
        CHECK(folds[0].train_end == h);
        CHECK(folds[0].val_begin == h);
        CHECK(folds[0].val_end == 2 * h);
        CHECK(folds[0].test_begin == 2 * h);
        CHECK(folds[0].test_end == 3 * h);
    }

    SUBCASE("too-short series is rejected") {
        CHECK_THROWS_WITH_AS(make_folds(10, 70, 4, 140),
                             doctest::Contains("too short"), Error);
    }

    SUBCASE("test ranges tile the final V*h steps") {
        std::mt19937_64 rng(9);
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t h = 2 + rng() % 20;
            const int v = 1 + static_cast<int>(rng() % 5);
            const std::size_t total =
                static_cast<std::size_t>(v) * h + 2 * h + rng() % 50;
            const auto folds = make_folds(total, h, v, 2 * h);
            std::size_t cursor = total - static_cast<std::size_t>(v) * h;
            for (const auto& fold : folds) {
                CHECK(fold.test_begin == cursor);
                CHECK(fold.test_end == cursor + h);
                CHECK(fold.val_end == fold.test_begin);
                CHECK(fold.val_begin + h == fold.val_end);
                CHECK(fold.train_end == fold.val_begin);
                cursor += h;
            }
            CHECK(cursor == total);
        }
    }
}

TEST_SUITE_END();
