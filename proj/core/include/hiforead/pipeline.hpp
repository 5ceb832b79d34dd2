#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hiforead/config.hpp"
#include "hiforead/reconcile.hpp"

namespace hiforead {

/// Loaded and validated inputs: the hierarchy, the aligned frame, and the
/// rolling-origin folds.
struct PreparedData {
    std::unique_ptr<Hierarchy> hierarchy;
    SeriesFrame frame;
    std::vector<BacktestFold> folds;
};

PreparedData load_inputs(const PipelineConfig& config);

/// Describes one forecast origin for base-model preparation.
///
/// Data up to history_end is visible. Hyper-parameters are selected by mean
/// validation APE over selection_folds; bo_folds supply the weight-tuning
/// data. Target forecasts come from one fit on [0, history_end) predicting
/// target_offset + horizon steps and keeping the last `horizon` of them
/// (target_offset = 0 forecasts the block right after the origin).
struct OriginPlan {
    std::size_t history_end = 0;
    std::size_t horizon = 0;
    std::size_t target_offset = 0;
    std::vector<BacktestFold> selection_folds;
    std::vector<BacktestFold> bo_folds;
};

/// Fits the three ensemble models for every node: hyper selection, target
/// forecasts, in-sample residuals, and per-fold validation forecasts.
/// A model that fails to fit falls back to a last-value forecast and the
/// failure is appended to `notes`.
std::vector<NodeBaseForecasts> prepare_base_forecasts(
    const SeriesFrame& frame, const Hierarchy& h, const PipelineConfig& config,
    const OriginPlan& plan, std::vector<std::string>* notes = nullptr);

struct ForecastRun {
    PreparedData data;
    StageOutputs stages;
    std::vector<std::string> notes;
};

/// Full-history run: hypers selected over all folds, weights tuned on the
/// fold validation blocks, final models fit on the whole history.
ForecastRun run_forecast(const PipelineConfig& config);

/// Writes `<outdir>/stage_<name>.csv` for each requested stage plus
/// coherence.json. Returns true iff the FINAL set was requested and passes
/// full-hierarchy coherence at 1e-8 relative tolerance (or FINAL was not
/// requested at all).
bool write_forecast_outputs(const ForecastRun& run, const std::string& outdir,
                            std::vector<Stage> stages);

/// Multistage configuration derived from the pipeline config.
MultistageConfig multistage_config(const PipelineConfig& config,
                                   std::uint64_t bo_seed);

} // namespace hiforead
