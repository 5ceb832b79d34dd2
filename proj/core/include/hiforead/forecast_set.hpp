#pragma once

#include <cstddef>
#include <vector>

namespace hiforead {

/// Pipeline stage that produced a forecast set.
enum class Stage { BO, TD, HHAFA, MINT, SSWFS, FINAL };

const char* stage_name(Stage stage);

/// Per-node h-step forecast vectors for one pipeline stage.
///
/// Vectors are indexed by the hierarchy's level-major node index. An empty
/// vector means the stage does not cover that node (e.g. MINT leaves out the
/// bottom level).
struct ForecastSet {
    Stage stage = Stage::BO;
    std::vector<std::vector<double>> values;

    bool covers(std::size_t node) const {
        return node < values.size() && !values[node].empty();
    }
    const std::vector<double>& at(std::size_t node) const { return values[node]; }
};

} // namespace hiforead
