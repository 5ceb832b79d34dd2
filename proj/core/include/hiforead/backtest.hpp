#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hiforead/pipeline.hpp"

namespace hiforead {

/// Stage rows of the backtest report, in pipeline order. The SSWFS row
/// scores the final reconciled set (MINT levels plus the synchronized bottom
/// level), mirroring how the stages compose.
inline constexpr std::array<Stage, 5> backtest_stage_rows{
    Stage::BO, Stage::TD, Stage::HHAFA, Stage::MINT, Stage::SSWFS};

/// Per-fold, per-stage, per-node APE values plus level-wise aggregates.
struct BacktestReport {
    int levels = 0;
    std::vector<std::string> node_ids;
    std::vector<int> node_levels;
    std::vector<BacktestFold> folds;

    /// APE values: [stage row][fold][node]; nullopt = undefined (zero truth
    /// sum) or stage does not cover the node's level.
    std::vector<std::vector<std::vector<std::optional<double>>>> fold_apes;
    /// Across-fold mean APE per node (mean over defined folds).
    std::vector<std::vector<std::optional<double>>> mean_apes;

    struct Cell {
        bool covered = false;
        std::size_t nodes = 0;    // nodes entering the aggregate
        std::size_t excluded = 0; // nodes with no defined fold
        double mean = 0.0;
        double median = 0.0;
    };
    std::vector<std::vector<Cell>> level_cells; // [stage row][level-1]

    struct StageCoherence {
        bool coherent = true;
        double max_rel_violation = 0.0;
    };
    std::vector<StageCoherence> coherence; // [stage row], worst over folds

    /// Wall-clock seconds per stage row summed over folds, plus base-model
    /// preparation time. Logged, never written to artifact files.
    std::vector<double> runtime_seconds;
    double prep_seconds = 0.0;

    std::vector<std::vector<std::array<double, 3>>> weights; // [fold][node]
    std::vector<std::string> notes;
};

/// Supplies the per-node base forecasts for one origin; swap in a stub to
/// test the reconciliation stages in isolation.
using BaseForecastProvider = std::function<std::vector<NodeBaseForecasts>(
    const SeriesFrame&, const Hierarchy&, const PipelineConfig&,
    const OriginPlan&, std::vector<std::string>*)>;

/// Rolling-origin backtest: for each fold, base models are fit on the train
/// block, ensemble weights are tuned on the validation block, and every
/// stage is scored on the test block. Hyper-parameters are selected per fold
/// from that fold's validation APE, so fold results are independent.
BacktestReport run_backtest(const SeriesFrame& frame, const Hierarchy& h,
                            const PipelineConfig& config,
                            BaseForecastProvider provider = nullptr);

/// `level,stage,mean_ape,median_ape` rows for covered (level, stage) cells.
void write_backtest_summary_csv(const BacktestReport& report,
                                const std::string& path);

/// Full per-node detail (fold APEs, weights, coherence, exclusions).
void write_backtest_detail_json(const BacktestReport& report,
                                const std::string& path);

/// Level-by-stage table with mean/median cells and the improvement of the
/// final row over the BO row.
std::string format_backtest_table(const BacktestReport& report);

} // namespace hiforead
