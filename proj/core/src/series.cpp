#include "hiforead/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "hiforead/errors.hpp"
#include "csv_util.hpp"

namespace hiforead {

namespace {

bool parse_int(const std::string& text, std::size_t begin, std::size_t len,
               int& out) {
    if (begin + len > text.size()) return false;
    out = 0;
    for (std::size_t i = begin; i < begin + len; ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') return false;
        out = out * 10 + (c - '0');
    }
    return true;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy =
        static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool valid_date(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1) return false;
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int max_day = lengths[m - 1];
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (m == 2 && leap) max_day = 29;
    return d <= max_day;
}

} // namespace

Frequency parse_frequency(const std::string& text) {
    if (text == "daily") return Frequency::daily;
    if (text == "quarterly") return Frequency::quarterly;
    throw ConfigError("unknown frequency '" + text + "' (daily|quarterly)");
}

FillPolicy parse_fill_policy(const std::string& text) {
    if (text == "zero") return FillPolicy::zero;
    if (text == "linear") return FillPolicy::linear;
    throw ConfigError("unknown fill_policy '" + text + "' (zero|linear)");
}

std::int64_t parse_time_key(const std::string& text, Frequency frequency,
                            const std::string& context) {
    if (frequency == Frequency::daily) {
        // YYYY-MM-DD
        int y = 0, m = 0, d = 0;
        const bool shape = text.size() == 10 && text[4] == '-' && text[7] == '-' &&
                           parse_int(text, 0, 4, y) && parse_int(text, 5, 2, m) &&
                           parse_int(text, 8, 2, d);
        if (!shape || !valid_date(y, m, d)) {
            throw DataError(context + ": unparseable timestamp '" + text +
                            "' (expected YYYY-MM-DD)");
        }
        return days_from_civil(y, m, d);
    }
    // YYYY-Qn
    int y = 0, q = 0;
    const bool shape = text.size() == 7 && text[4] == '-' && text[5] == 'Q' &&
                       parse_int(text, 0, 4, y) && parse_int(text, 6, 1, q);
    if (!shape || q < 1 || q > 4) {
        throw DataError(context + ": unparseable timestamp '" + text +
                        "' (expected YYYY-Qn)");
    }
    return static_cast<std::int64_t>(y) * 4 + (q - 1);
}

std::string format_time_key(std::int64_t key, Frequency frequency) {
    char buffer[16];
    if (frequency == Frequency::daily) {
        int y = 0;
        unsigned m = 0, d = 0;
        civil_from_days(key, y, m, d);
        std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u", y, m, d);
    } else {
        const std::int64_t y = key >= 0 ? key / 4 : (key - 3) / 4;
        const int q = static_cast<int>(key - y * 4) + 1;
        std::snprintf(buffer, sizeof(buffer), "%04lld-Q%d",
                      static_cast<long long>(y), q);
    }
    return buffer;
}

std::string SeriesFrame::time_label(std::size_t step) const {
    return format_time_key(start_key + static_cast<std::int64_t>(step), frequency);
}

std::vector<RawRecord> load_long_csv(const std::string& path,
                                     const std::string& id_column,
                                     const std::string& time_column,
                                     const std::string& value_column,
                                     Frequency frequency) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open observations file " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": no records (empty file)");
    const auto header = csv::split_line(line);
    const std::size_t id_col = csv::column_index(header, id_column, path);
    const std::size_t time_col = csv::column_index(header, time_column, path);
    const std::size_t value_col = csv::column_index(header, value_column, path);

    std::vector<RawRecord> records;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line == "\r") continue;
        const auto fields = csv::split_line(line);
        const std::string context = path + ":" + std::to_string(line_number);
        if (fields.size() != header.size()) {
            throw DataError(context + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        RawRecord record;
        record.id = fields[id_col];
        record.time_key = parse_time_key(fields[time_col], frequency, context);
        record.value = csv::parse_double(fields[value_col], path, line_number);
        if (!std::isfinite(record.value)) {
            throw DataError(context + ": non-finite value");
        }
        records.push_back(std::move(record));
    }
    if (records.empty()) throw DataError(path + ": no records");
    return records;
}

SeriesFrame build_series_frame(const std::vector<RawRecord>& records,
                               const Hierarchy& h, FillPolicy fill) {
    if (records.empty()) throw DataError("no records to build frame from");

    const auto& bottom = h.leaves();
    std::unordered_map<std::size_t, std::size_t> leaf_position;
    for (std::size_t j = 0; j < bottom.size(); ++j) leaf_position.emplace(bottom[j], j);

    std::int64_t min_key = records[0].time_key;
    std::int64_t max_key = records[0].time_key;
    for (const auto& r : records) {
        min_key = std::min(min_key, r.time_key);
        max_key = std::max(max_key, r.time_key);
    }
    const std::size_t length = static_cast<std::size_t>(max_key - min_key) + 1;

    std::vector<std::vector<double>> leaf_values(
        bottom.size(), std::vector<double>(length, 0.0));
    std::vector<std::vector<std::uint8_t>> observed(
        bottom.size(), std::vector<std::uint8_t>(length, 0));

    for (const auto& r : records) {
        const std::size_t node = h.index_of(r.id); // throws for unknown ids
        auto it = leaf_position.find(node);
        if (it == leaf_position.end()) {
            throw DataError("series id '" + r.id + "' is not a leaf of the hierarchy");
        }
        const std::size_t j = it->second;
        const std::size_t t = static_cast<std::size_t>(r.time_key - min_key);
        if (observed[j][t]) {
            throw DataError("duplicate record for series '" + r.id + "' at step " +
                            std::to_string(t));
        }
        leaf_values[j][t] = r.value;
        observed[j][t] = 1;
    }

    SeriesFrame frame;
    frame.hierarchy = &h;
    frame.start_key = min_key;
    frame.fill_mask.assign(bottom.size(), std::vector<std::uint8_t>(length, 0));

    for (std::size_t j = 0; j < bottom.size(); ++j) {
        auto& y = leaf_values[j];
        const auto& obs = observed[j];
        bool any = false;
        for (std::size_t t = 0; t < length; ++t) {
            if (obs[t]) any = true;
            else frame.fill_mask[j][t] = 1;
        }
        if (!any) {
            throw DataError("no records for leaf '" + h.id_of(bottom[j]) + "'");
        }
        if (fill == FillPolicy::linear) {
            // Interior gaps interpolate between nearest observed neighbors;
            // edge gaps hold the nearest observed value.
            std::size_t prev = length; // last observed index, length = none yet
            for (std::size_t t = 0; t < length; ++t) {
                if (!obs[t]) continue;
                if (prev == length && t > 0) {
                    for (std::size_t u = 0; u < t; ++u) y[u] = y[t];
                } else if (prev != length && t > prev + 1) {
                    const double step = (y[t] - y[prev]) / static_cast<double>(t - prev);
                    for (std::size_t u = prev + 1; u < t; ++u) {
                        y[u] = y[prev] + step * static_cast<double>(u - prev);
                    }
                }
                prev = t;
            }
            for (std::size_t t = prev + 1; t < length; ++t) y[t] = y[prev];
        }
        // zero fill: gaps already hold 0.0
    }

    frame.values = aggregate_bottom_up(h, leaf_values);
    return frame;
}

std::vector<BacktestFold> make_folds(std::size_t total_length, std::size_t h_steps,
                                     int fold_count, std::size_t min_train) {
    if (h_steps == 0) throw ConfigError("horizon must be >= 1");
    if (fold_count < 1) throw ConfigError("fold count must be >= 1");
    // min_train covers everything before the first test block (train + val),
    // so it can never be smaller than one validation block plus one step.
    min_train = std::max(min_train, h_steps + 1);
    const std::size_t needed =
        static_cast<std::size_t>(fold_count) * h_steps + min_train;
    if (total_length < needed) {
        throw Error("series too short: length " + std::to_string(total_length) +
                    " < " + std::to_string(fold_count) + " folds * horizon " +
                    std::to_string(h_steps) + " + min train " +
                    std::to_string(min_train));
    }

    std::vector<BacktestFold> folds;
    folds.reserve(static_cast<std::size_t>(fold_count));
    for (int v = 1; v <= fold_count; ++v) {
        BacktestFold fold;
        fold.fold_id = v;
        fold.test_end = total_length -
                        static_cast<std::size_t>(fold_count - v) * h_steps;
        fold.test_begin = fold.test_end - h_steps;
        fold.val_end = fold.test_begin;
        fold.val_begin = fold.val_end - h_steps;
        fold.train_begin = 0;
        fold.train_end = fold.val_begin;
        folds.push_back(fold);
    }
    return folds;
}

} // namespace hiforead
