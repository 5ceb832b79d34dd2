#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hiforead/bo_ensemble.hpp"
#include "hiforead/forecast_set.hpp"
#include "hiforead/forecaster.hpp"
#include "hiforead/series.hpp"

namespace hiforead {

/// Hyper-parameter grid for one model kind: every combination of the listed
/// values is a candidate.
using HyperGrid = std::map<std::string, std::vector<double>>;

/// Declarative pipeline configuration (JSON file; see README for the schema).
struct PipelineConfig {
    std::string observations_path;
    std::string hierarchy_path;
    Frequency frequency = Frequency::daily;
    std::size_t horizon = 0;
    int folds = 4;
    FillPolicy fill_policy = FillPolicy::zero;
    bool nonnegative = false;
    std::size_t min_train = 0; // 0: 2 * horizon
    std::size_t td_window = 0; // 0: horizon
    int max_peaks = 5;
    int tau = 0; // 0: floor(history / 2)
    BoConfig bo;
    std::map<ModelKind, HyperGrid> model_grids;
    int workers = 1;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::vector<Stage> stages; // empty: all stages

    std::size_t effective_min_train() const {
        return min_train > 0 ? min_train : 2 * horizon;
    }
};

/// Parses a JSON config file. Throws ConfigError for unreadable files,
/// malformed JSON, unknown keys, or wrong value types.
PipelineConfig parse_config(const std::string& path);

/// Semantic validation: value ranges and file existence. Returns one message
/// per violation, each prefixed with the config key path; empty means valid.
std::vector<std::string> validate_config(const PipelineConfig& config);

/// Expands a hyper grid into concrete specs (cartesian product, ordered by
/// key then value position). An empty grid yields the kind's default grid.
std::vector<ForecasterSpec> expand_grid(ModelKind kind, const HyperGrid& grid);

/// Built-in grids used when the config does not list one for a kind.
HyperGrid default_grid(ModelKind kind);

Stage parse_stage(const std::string& text);

} // namespace hiforead
