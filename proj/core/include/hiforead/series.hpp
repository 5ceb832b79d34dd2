#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hiforead/hierarchy.hpp"

namespace hiforead {

enum class Frequency { daily, quarterly };
enum class FillPolicy { zero, linear };

Frequency parse_frequency(const std::string& text);
FillPolicy parse_fill_policy(const std::string& text);

/// One parsed observation row. `time_key` is the timestamp mapped to a
/// contiguous integer (days since epoch, or year*4 + quarter - 1).
struct RawRecord {
    NodeId id;
    std::int64_t time_key = 0;
    double value = 0.0;
};

/// Parses a long-format observations CSV (header required). Timestamps are
/// ISO-8601 dates for daily data and YYYY-Qn for quarterly.
std::vector<RawRecord> load_long_csv(const std::string& path,
                                     const std::string& id_column,
                                     const std::string& time_column,
                                     const std::string& value_column,
                                     Frequency frequency);

/// Aligned per-node history on a shared step index.
///
/// Leaf vectors are placed on the union time range with gaps filled per
/// policy; internal nodes are computed bottom-up, so the history is coherent
/// by construction. Immutable once built.
struct SeriesFrame {
    const Hierarchy* hierarchy = nullptr;
    std::vector<std::vector<double>> values;      // node index -> length T
    std::vector<std::vector<std::uint8_t>> fill_mask; // leaf order -> length T
    std::int64_t start_key = 0;
    Frequency frequency = Frequency::daily;

    std::size_t length() const {
        return values.empty() ? 0 : values[0].size();
    }
    std::string time_label(std::size_t step) const;
};

SeriesFrame build_series_frame(const std::vector<RawRecord>& records,
                               const Hierarchy& h, FillPolicy fill);

/// One rolling-origin evaluation split. Ranges are half-open step intervals;
/// validation immediately follows train and test immediately follows
/// validation.
struct BacktestFold {
    int fold_id = 0;
    std::size_t train_begin = 0;
    std::size_t train_end = 0;
    std::size_t val_begin = 0;
    std::size_t val_end = 0;
    std::size_t test_begin = 0;
    std::size_t test_end = 0;
};

/// Builds V back-to-back folds anchored to the series end: fold v's test
/// block ends at T - (V - v) * h. Requires T >= V * h + min_train.
std::vector<BacktestFold> make_folds(std::size_t total_length, std::size_t h_steps,
                                     int fold_count, std::size_t min_train);

inline std::vector<BacktestFold> make_folds(const SeriesFrame& frame,
                                            std::size_t h_steps, int fold_count) {
    return make_folds(frame.length(), h_steps, fold_count, 2 * h_steps);
}

/// Timestamp helpers (exposed for tests and label rendering).
std::int64_t parse_time_key(const std::string& text, Frequency frequency,
                            const std::string& context);
std::string format_time_key(std::int64_t key, Frequency frequency);

} // namespace hiforead
